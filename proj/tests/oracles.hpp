#pragma once

// Independent oracles used only by the tests. Nothing here calls the
// matrix-free kernels it is used to check.

#include "affinorm/polynomial.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using affinorm::Index;
using affinorm::Monomial;
using affinorm::SparsePolynomial;
using affinorm::Vector;

// Dense exponent vector of a term.
inline std::vector<unsigned> dense_alpha(const Monomial& m, std::size_t d)
{
    std::vector<unsigned> a(d, 0);
    for (const auto& [i, e] : m.exps) {
        a[i] = e;
    }
    return a;
}

// One application of d/dx_i to coeff * x^alpha.
inline void differentiate_once(double& coeff, std::vector<unsigned>& alpha, std::size_t i)
{
    if (alpha[i] == 0) {
        coeff = 0.0;
        return;
    }
    coeff *= static_cast<double>(alpha[i]);
    --alpha[i];
}

// d^beta of coeff * x^alpha by repeated single differentiation, evaluated at x
// in long double.
inline long double partial_by_repetition(const Monomial& m, std::span<const double> x,
                                         std::span<const std::size_t> dirs)
{
    double coeff = m.coeff;
    auto alpha = dense_alpha(m, x.size());
    for (std::size_t i : dirs) {
        differentiate_once(coeff, alpha, i);
    }
    long double v = coeff;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (unsigned k = 0; k < alpha[i]; ++k) {
            v *= x[i];
        }
    }
    return v;
}

// Neumaier-compensated sum of long double term values.
inline double compensated_eval(const SparsePolynomial& poly, std::span<const double> x)
{
    long double sum = 0.0L, comp = 0.0L;
    for (const Monomial& m : poly.terms()) {
        const long double t = partial_by_repetition(m, x, {});
        const long double s = sum + t;
        comp += std::fabs(sum) >= std::fabs(t) ? (sum - s) + t : (t - s) + sum;
        sum = s;
    }
    return static_cast<double>(sum + comp);
}

// Dense Hessian and third tensor by repeated differentiation, long double.
struct RepeatedDense {
    std::size_t d;
    std::vector<long double> hess;
    std::vector<long double> third;
};

inline RepeatedDense repeated_dense(const SparsePolynomial& poly, std::span<const double> x)
{
    const std::size_t d = poly.dim();
    RepeatedDense out{d, std::vector<long double>(d * d, 0.0L), std::vector<long double>(d * d * d, 0.0L)};
    for (const Monomial& m : poly.terms()) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const std::size_t ij[2] = {i, j};
                out.hess[i * d + j] += partial_by_repetition(m, x, ij);
                for (std::size_t k = 0; k < d; ++k) {
                    const std::size_t ijk[3] = {i, j, k};
                    out.third[(i * d + j) * d + k] += partial_by_repetition(m, x, ijk);
                }
            }
        }
    }
    return out;
}

inline double norm(std::span<const double> v)
{
    double s = 0.0;
    for (double e : v) {
        s += e * e;
    }
    return std::sqrt(s);
}

inline double diff_norm(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

// Random polynomial: d in [1, max_dim], degree <= 4, up to max_terms terms.
inline SparsePolynomial random_poly(std::mt19937_64& rng, std::size_t max_dim = 8, std::size_t max_terms = 12)
{
    std::uniform_int_distribution<std::size_t> dim_dist(1, max_dim);
    const std::size_t d = dim_dist(rng);
    std::uniform_int_distribution<std::size_t> nterm_dist(1, max_terms);
    std::uniform_int_distribution<std::size_t> idx_dist(0, d - 1);
    std::uniform_int_distribution<unsigned> deg_dist(1, 4);
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    std::vector<Monomial> terms;
    const std::size_t n = nterm_dist(rng);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<unsigned> alpha(d, 0);
        const unsigned deg = deg_dist(rng);
        for (unsigned k = 0; k < deg; ++k) {
            ++alpha[idx_dist(rng)];
        }
        Monomial m{coeff(rng), {}};
        for (std::size_t i = 0; i < d; ++i) {
            if (alpha[i]) {
                m.exps.emplace_back(static_cast<Index>(i), alpha[i]);
            }
        }
        terms.push_back(std::move(m));
    }
    return SparsePolynomial(d, terms);
}

// Random point; with probability zero_prob each coordinate is exactly 0.
inline Vector random_point(std::mt19937_64& rng, std::size_t d, double zero_prob)
{
    std::uniform_real_distribution<double> val(-1.5, 1.5);
    std::bernoulli_distribution zero(zero_prob);
    Vector x(d);
    for (double& e : x) {
        e = zero(rng) ? 0.0 : val(rng);
    }
    return x;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t d)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(d);
    for (double& e : v) {
        e = g(rng);
    }
    return v;
}

// Seeded random orthogonal matrix (row-major) from a QR factorization.
inline Vector random_orthogonal(std::mt19937_64& rng, std::size_t n)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            a(i, j) = g(rng);
        }
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    Vector out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

// Column-major d x (d-1) basis as an Eigen matrix.
inline Eigen::MatrixXd basis_matrix(const Vector& col_major, std::size_t d)
{
    const auto rows = static_cast<Eigen::Index>(d);
    return Eigen::Map<const Eigen::MatrixXd>(col_major.data(), rows, rows - 1);
}

// T^T H T + lambda I from the repeated-differentiation Hessian.
inline Eigen::MatrixXd tangent_hessian(const RepeatedDense& rep, const Eigen::MatrixXd& t, double lambda)
{
    const auto d = static_cast<Eigen::Index>(rep.d);
    Eigen::MatrixXd h(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            h(i, j) = static_cast<double>(rep.hess[static_cast<std::size_t>(i * d + j)]);
        }
    }
    Eigen::MatrixXd ht = t.transpose() * h * t;
    ht.diagonal().array() += lambda;
    return ht;
}

// a_i = sum_pq (H_T + lambda I)^{-1}_pq (d_i H_T)_pq with
// (d_i H_T)_pq = D^3 f[T e_p, T e_q, T e_i].
inline Vector trace_formula_logdet_grad(const SparsePolynomial& poly, std::span<const double> x,
                                        const Vector& basis, double lambda)
{
    const std::size_t d = poly.dim();
    const auto rep = repeated_dense(poly, x);
    const Eigen::MatrixXd t = basis_matrix(basis, d);
    const Eigen::MatrixXd inv = tangent_hessian(rep, t, lambda).inverse();
    const auto n = t.cols();
    Vector a(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        // D^3 f[., ., T e_i] as a d x d matrix
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = 0; q < d; ++q) {
                long double acc = 0.0L;
                for (std::size_t k = 0; k < d; ++k) {
                    acc += rep.third[(p * d + q) * d + k] * t(static_cast<Eigen::Index>(k), i);
                }
                m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = static_cast<double>(acc);
            }
        }
        const Eigen::MatrixXd di = t.transpose() * m * t;
        a[static_cast<std::size_t>(i)] = (inv.array() * di.array()).sum();
    }
    return a;
}

// log |det(T^T H(y) T + lambda I)| with the basis T held fixed.
inline double logdet_at(const SparsePolynomial& poly, std::span<const double> y, const Eigen::MatrixXd& t,
                        double lambda)
{
    const Eigen::MatrixXd ht = tangent_hessian(repeated_dense(poly, y), t, lambda);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(ht);
    double s = 0.0;
    for (Eigen::Index i = 0; i < ht.rows(); ++i) {
        s += std::log(std::abs(lu.matrixLU()(i, i)));
    }
    return s;
}

// Central differences of t -> log det(T^T H(x + t T e_i) T + lambda I) at t = 0.
inline Vector fd_logdet_grad(const SparsePolynomial& poly, std::span<const double> x, const Vector& basis,
                             double lambda, double step = 1e-5)
{
    const std::size_t d = poly.dim();
    const Eigen::MatrixXd t = basis_matrix(basis, d);
    Vector a(d - 1);
    for (std::size_t i = 0; i + 1 < d; ++i) {
        Vector xp(x.begin(), x.end()), xm(x.begin(), x.end());
        for (std::size_t k = 0; k < d; ++k) {
            xp[k] += step * t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
            xm[k] -= step * t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
        }
        a[i] = (logdet_at(poly, xp, t, lambda) - logdet_at(poly, xm, t, lambda)) / (2.0 * step);
    }
    return a;
}

// Smallest eigenvalue of T^T H T.
inline double min_tangent_eig(const SparsePolynomial& poly, std::span<const double> x, const Vector& basis)
{
    const Eigen::MatrixXd t = basis_matrix(basis, poly.dim());
    const Eigen::MatrixXd ht = tangent_hessian(repeated_dense(poly, x), t, 0.0);
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ht).eigenvalues().minCoeff();
}

// Random cubic/quartic terms on top of sum x_i^2 + x_i^4, dimension in
// [min_dim, max_dim], point in [-1, 1]^d. Locally convex enough that the tangent
// Hessian is usually positive definite; callers still check.
struct Instance {
    SparsePolynomial poly;
    Vector x;
};

inline Instance elliptic_instance(std::mt19937_64& rng, std::size_t min_dim, std::size_t max_dim)
{
    std::uniform_int_distribution<std::size_t> dim_dist(min_dim, max_dim);
    const std::size_t d = dim_dist(rng);
    std::uniform_int_distribution<std::size_t> idx(0, d - 1);
    std::uniform_int_distribution<unsigned> deg(3, 4);
    std::uniform_int_distribution<std::size_t> nterms(1, 2 * d);
    std::uniform_real_distribution<double> coeff(-0.3, 0.3);
    std::uniform_real_distribution<double> base(0.5, 1.5);
    std::vector<Monomial> terms;
    for (std::size_t i = 0; i < d; ++i) {
        terms.push_back({base(rng), {{static_cast<Index>(i), 2}}});
        terms.push_back({0.25 * base(rng), {{static_cast<Index>(i), 4}}});
    }
    const std::size_t n = nterms(rng);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<unsigned> alpha(d, 0);
        const unsigned g = deg(rng);
        for (unsigned k = 0; k < g; ++k) {
            ++alpha[idx(rng)];
        }
        Monomial m{coeff(rng), {}};
        for (std::size_t i = 0; i < d; ++i) {
            if (alpha[i]) {
                m.exps.emplace_back(static_cast<Index>(i), alpha[i]);
            }
        }
        terms.push_back(std::move(m));
    }
    std::uniform_real_distribution<double> pt(-1.0, 1.0);
    Vector x(d);
    for (double& e : x) {
        e = pt(rng);
    }
    return {SparsePolynomial(d, terms), x};
}

} // namespace oracle
