#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace affinorm {

using Index = std::uint32_t;
using Vector = std::vector<double>;

// Largest dimension for which dense derivative tensors are materialized.
inline constexpr std::size_t kDenseCap = 64;

struct Monomial {
    double coeff = 0.0;
    // (index, exponent) pairs, indices strictly increasing, exponents >= 1.
    std::vector<std::pair<Index, unsigned>> exps;
};

// Read-only view of one stored term.
struct MonomialView {
    double coeff;
    std::span<const Index> idx;
    std::span<const unsigned> exp;

    std::size_t support() const { return idx.size(); }
};

// Tally of monomial-support entries written by the kernels. Callers own it;
// the kernels only add to it.
struct KernelCounter {
    std::int64_t calls = 0;
    std::int64_t touched = 0;
};

// Sparse multi-index polynomial f(x) = sum_l c_l x^alpha_l, stored in a
// flattened compressed layout (term offsets into shared index/exponent arrays).
// Immutable after construction.
class SparsePolynomial {
public:
    SparsePolynomial() = default;

    // Validates each monomial, merges repeated multi-indices (first occurrence
    // keeps its position) and drops exact-zero coefficients.
    SparsePolynomial(std::size_t dim, const std::vector<Monomial>& terms);

    std::size_t dim() const { return dim_; }
    std::size_t num_terms() const { return coeffs_.size(); }
    std::size_t nnz() const { return idx_.size(); }
    double avg_support() const;
    unsigned max_degree() const;

    MonomialView term(std::size_t l) const;
    std::vector<Monomial> terms() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> coeffs_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Index> idx_;
    std::vector<unsigned> exp_;
};

// Dense oracle container: gradient, Hessian and third-derivative tensor,
// row-major, hess[i*d+j], third[(i*d+j)*d+k].
struct DenseDerivatives {
    std::size_t dim = 0;
    Vector grad;
    Vector hess;
    Vector third;

    double h(std::size_t i, std::size_t j) const { return hess[i * dim + j]; }
    double t(std::size_t i, std::size_t j, std::size_t k) const
    {
        return third[(i * dim + j) * dim + k];
    }
};

// Dense multi-index used by partial_derivative_monomial.
using MultiIndex = std::vector<unsigned>;

struct MonomialPartial {
    double coeff;          // (alpha)_beta
    MultiIndex residual;   // alpha - beta
};

// d^beta x^alpha = (alpha)_beta x^(alpha - beta) when beta <= alpha, otherwise
// nullopt. Shorter multi-index is padded with zeros.
std::optional<MonomialPartial> partial_derivative_monomial(const MultiIndex& alpha,
                                                           const MultiIndex& beta);

// Falling factorial (r)_k = r (r-1) ... (r-k+1), zero when k > r.
double falling_factorial(unsigned r, unsigned k);

double eval(const SparsePolynomial& poly, std::span<const double> x);

void gradient(const SparsePolynomial& poly, std::span<const double> x, std::span<double> out,
              KernelCounter* counter = nullptr);
Vector gradient(const SparsePolynomial& poly, std::span<const double> x);

void hess_vec(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> v,
              std::span<double> out, KernelCounter* counter = nullptr);
Vector hess_vec(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> v);

// out_k = sum_{i,j} d_ijk f(x) u_i v_j
void third_dir(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> u,
               std::span<const double> v, std::span<double> out, KernelCounter* counter = nullptr);
Vector third_dir(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> u,
                 std::span<const double> v);

DenseDerivatives dense_derivatives(const SparsePolynomial& poly, std::span<const double> x);

} // namespace affinorm
