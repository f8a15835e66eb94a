#include "affinorm/polynomial.hpp"

#include "affinorm/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

namespace affinorm {

namespace {

double ipow(double base, unsigned e)
{
    double r = 1.0;
    for (unsigned k = 0; k < e; ++k) {
        r *= base;
    }
    return r;
}

void check_dim(const SparsePolynomial& poly, std::span<const double> v, const char* what)
{
    if (v.size() != poly.dim()) {
        throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(poly.dim()) +
                                ", got " + std::to_string(v.size()));
    }
}

double term_value(const MonomialView& t, std::span<const double> x)
{
    double val = t.coeff;
    for (std::size_t a = 0; a < t.support(); ++a) {
        val *= ipow(x[t.idx[a]], t.exp[a]);
    }
    return val;
}

// The quotient kernels cancel terms of size |t| / x_i^3, so their rounding
// error grows as a coordinate approaches zero. Below this magnitude the
// falling-factorial path is used instead.
constexpr double kQuotientFloor = 1.0 / 16.0;

bool quotient_path_ok(const MonomialView& t, std::span<const double> x)
{
    for (Index i : t.idx) {
        if (!(std::abs(x[i]) >= kQuotientFloor)) {
            return false;
        }
    }
    return true;
}

unsigned degree(const MonomialView& t)
{
    unsigned deg = 0;
    for (unsigned e : t.exp) {
        deg += e;
    }
    return deg;
}

// Evaluates reduced monomials x^(alpha - beta) for |beta| <= 3 in O(1) each when
// some support coordinates vanish. nonzero_product holds the product of
// x_j^alpha_j over the nonzero support coordinates; a reduction survives only
// if it consumes the full exponent of every zero coordinate.
class ZeroSafeTerm {
public:
    ZeroSafeTerm(const MonomialView& t, std::span<const double> x) : t_(t), x_(x)
    {
        for (std::size_t a = 0; a < t.support(); ++a) {
            const double xi = x[t.idx[a]];
            if (xi == 0.0) {
                if (zero_count_ < zeros_.size()) {
                    zeros_[zero_count_] = a;
                }
                ++zero_count_;
            } else {
                nonzero_product_ *= ipow(xi, t.exp[a]);
            }
        }
    }

    std::size_t zero_count() const { return zero_count_; }

    // c * (alpha)_beta * x^(alpha - beta), beta given as support positions
    // (repeats allowed).
    double partial(std::span<const std::size_t> positions) const
    {
        std::array<std::size_t, 3> pos{};
        std::array<unsigned, 3> mult{};
        std::size_t n = 0;
        for (std::size_t p : positions) {
            std::size_t k = 0;
            while (k < n && pos[k] != p) {
                ++k;
            }
            if (k == n) {
                pos[n] = p;
                mult[n] = 0;
                ++n;
            }
            ++mult[k];
        }
        if (zero_count_ > n) {
            return 0.0;
        }
        for (std::size_t z = 0; z < zero_count_; ++z) {
            const std::size_t zp = zeros_[z];
            bool consumed = false;
            for (std::size_t k = 0; k < n; ++k) {
                if (pos[k] == zp && mult[k] == t_.exp[zp]) {
                    consumed = true;
                }
            }
            if (!consumed) {
                return 0.0;
            }
        }
        double val = t_.coeff * nonzero_product_;
        for (std::size_t k = 0; k < n; ++k) {
            const unsigned e = t_.exp[pos[k]];
            val *= falling_factorial(e, mult[k]);
            const double xi = x_[t_.idx[pos[k]]];
            if (xi != 0.0) {
                val /= ipow(xi, std::min(mult[k], e));
            }
        }
        return val;
    }

private:
    const MonomialView& t_;
    std::span<const double> x_;
    double nonzero_product_ = 1.0;
    std::array<std::size_t, 3> zeros_{};
    std::size_t zero_count_ = 0;
};

} // namespace

SparsePolynomial::SparsePolynomial(std::size_t dim, const std::vector<Monomial>& terms) : dim_(dim)
{
    if (dim == 0) {
        throw FormatError("polynomial dimension must be positive");
    }
    std::map<std::vector<std::pair<Index, unsigned>>, std::size_t> seen;
    std::vector<Monomial> merged;
    merged.reserve(terms.size());
    for (std::size_t l = 0; l < terms.size(); ++l) {
        const Monomial& m = terms[l];
        for (std::size_t a = 0; a < m.exps.size(); ++a) {
            const auto [i, e] = m.exps[a];
            if (i >= dim) {
                throw FormatError("term " + std::to_string(l) + ": index " + std::to_string(i) +
                                  " out of range for dim " + std::to_string(dim));
            }
            if (e == 0) {
                throw FormatError("term " + std::to_string(l) + ": exponent must be >= 1");
            }
            if (a > 0 && m.exps[a - 1].first >= i) {
                throw FormatError("term " + std::to_string(l) +
                                  ": indices must be strictly increasing");
            }
        }
        auto [it, inserted] = seen.emplace(m.exps, merged.size());
        if (inserted) {
            merged.push_back(m);
        } else {
            merged[it->second].coeff += m.coeff;
        }
    }
    for (const Monomial& m : merged) {
        if (m.coeff == 0.0) {
            continue;
        }
        coeffs_.push_back(m.coeff);
        for (const auto& [i, e] : m.exps) {
            idx_.push_back(i);
            exp_.push_back(e);
        }
        offsets_.push_back(idx_.size());
    }
}

double SparsePolynomial::avg_support() const
{
    return coeffs_.empty() ? 0.0 : static_cast<double>(nnz()) / static_cast<double>(num_terms());
}

unsigned SparsePolynomial::max_degree() const
{
    unsigned best = 0;
    for (std::size_t l = 0; l < num_terms(); ++l) {
        unsigned deg = 0;
        for (std::size_t k = offsets_[l]; k < offsets_[l + 1]; ++k) {
            deg += exp_[k];
        }
        best = std::max(best, deg);
    }
    return best;
}

MonomialView SparsePolynomial::term(std::size_t l) const
{
    const std::size_t lo = offsets_[l];
    const std::size_t n = offsets_[l + 1] - lo;
    return {coeffs_[l], std::span<const Index>(idx_).subspan(lo, n),
            std::span<const unsigned>(exp_).subspan(lo, n)};
}

std::vector<Monomial> SparsePolynomial::terms() const
{
    std::vector<Monomial> out;
    out.reserve(num_terms());
    for (std::size_t l = 0; l < num_terms(); ++l) {
        const MonomialView t = term(l);
        Monomial m{t.coeff, {}};
        for (std::size_t a = 0; a < t.support(); ++a) {
            m.exps.emplace_back(t.idx[a], t.exp[a]);
        }
        out.push_back(std::move(m));
    }
    return out;
}

double falling_factorial(unsigned r, unsigned k)
{
    if (k > r) {
        return 0.0;
    }
    double f = 1.0;
    for (unsigned j = 0; j < k; ++j) {
        f *= static_cast<double>(r - j);
    }
    return f;
}

std::optional<MonomialPartial> partial_derivative_monomial(const MultiIndex& alpha,
                                                           const MultiIndex& beta)
{
    const std::size_t n = std::max(alpha.size(), beta.size());
    MonomialPartial out{1.0, MultiIndex(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned a = i < alpha.size() ? alpha[i] : 0;
        const unsigned b = i < beta.size() ? beta[i] : 0;
        if (b > a) {
            return std::nullopt;
        }
        out.coeff *= falling_factorial(a, b);
        out.residual[i] = a - b;
    }
    return out;
}

double eval(const SparsePolynomial& poly, std::span<const double> x)
{
    check_dim(poly, x, "eval");
    double sum = 0.0;
    for (std::size_t l = 0; l < poly.num_terms(); ++l) {
        sum += term_value(poly.term(l), x);
    }
    return sum;
}

void gradient(const SparsePolynomial& poly, std::span<const double> x, std::span<double> out,
              KernelCounter* counter)
{
    check_dim(poly, x, "gradient");
    check_dim(poly, out, "gradient output");
    std::fill(out.begin(), out.end(), 0.0);
    // prefix/suffix products keep the gradient exact at zero coordinates
    std::array<double, 64> suffix{};
    std::vector<double> suffix_heap;
    for (std::size_t l = 0; l < poly.num_terms(); ++l) {
        const MonomialView t = poly.term(l);
        const std::size_t s = t.support();
        double* suf = suffix.data();
        if (s + 1 > suffix.size()) {
            suffix_heap.assign(s + 1, 1.0);
            suf = suffix_heap.data();
        }
        suf[s] = 1.0;
        for (std::size_t a = s; a-- > 0;) {
            suf[a] = suf[a + 1] * ipow(x[t.idx[a]], t.exp[a]);
        }
        double prefix = t.coeff;
        for (std::size_t a = 0; a < s; ++a) {
            const double xi = x[t.idx[a]];
            const unsigned e = t.exp[a];
            out[t.idx[a]] += prefix * static_cast<double>(e) * ipow(xi, e - 1) * suf[a + 1];
            prefix *= ipow(xi, e);
        }
        if (counter) {
            counter->touched += static_cast<std::int64_t>(s);
        }
    }
    if (counter) {
        ++counter->calls;
    }
}

Vector gradient(const SparsePolynomial& poly, std::span<const double> x)
{
    Vector g(poly.dim());
    gradient(poly, x, g);
    return g;
}

void hess_vec(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> v,
              std::span<double> out, KernelCounter* counter)
{
    check_dim(poly, x, "hess_vec x");
    check_dim(poly, v, "hess_vec v");
    check_dim(poly, out, "hess_vec output");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t l = 0; l < poly.num_terms(); ++l) {
        const MonomialView t = poly.term(l);
        const std::size_t s = t.support();
        if (counter) {
            counter->touched += static_cast<std::int64_t>(s);
        }
        if (degree(t) < 2) {
            continue;
        }
        if (quotient_path_ok(t, x)) {
            const double tv = term_value(t, x);
            double beta = 0.0;
            for (std::size_t a = 0; a < s; ++a) {
                beta += t.exp[a] * v[t.idx[a]] / x[t.idx[a]];
            }
            for (std::size_t a = 0; a < s; ++a) {
                const Index i = t.idx[a];
                const double ai = t.exp[a] / x[i];
                out[i] += tv * ai * beta - tv * (ai / x[i]) * v[i];
            }
            continue;
        }
        const ZeroSafeTerm zt(t, x);
        if (zt.zero_count() > 2) {
            continue;
        }
        for (std::size_t a = 0; a < s; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < s; ++b) {
                const std::array<std::size_t, 2> pos{a, b};
                acc += zt.partial(pos) * v[t.idx[b]];
            }
            out[t.idx[a]] += acc;
        }
    }
    if (counter) {
        ++counter->calls;
    }
}

Vector hess_vec(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> v)
{
    Vector out(poly.dim());
    hess_vec(poly, x, v, out);
    return out;
}

void third_dir(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> u,
               std::span<const double> v, std::span<double> out, KernelCounter* counter)
{
    check_dim(poly, x, "third_dir x");
    check_dim(poly, u, "third_dir u");
    check_dim(poly, v, "third_dir v");
    check_dim(poly, out, "third_dir output");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t l = 0; l < poly.num_terms(); ++l) {
        const MonomialView t = poly.term(l);
        const std::size_t s = t.support();
        if (counter) {
            counter->touched += static_cast<std::int64_t>(s);
        }
        if (degree(t) < 3) {
            continue;
        }
        if (quotient_path_ok(t, x)) {
            const double tv = term_value(t, x);
            double au = 0.0;
            double av = 0.0;
            double c = 0.0;
            for (std::size_t a = 0; a < s; ++a) {
                const Index i = t.idx[a];
                const double w = t.exp[a] / x[i];
                au += w * u[i];
                av += w * v[i];
                c += w * (u[i] * v[i]) / x[i];
            }
            const double uv = au * av - c;
            for (std::size_t a = 0; a < s; ++a) {
                const Index k = t.idx[a];
                const double xk = x[k];
                const double term = uv / xk - (u[k] * av + v[k] * au) / (xk * xk) +
                                    2.0 * (u[k] * v[k]) / (xk * xk * xk);
                out[k] += tv * t.exp[a] * term;
            }
            continue;
        }
        const ZeroSafeTerm zt(t, x);
        if (zt.zero_count() > 3) {
            continue;
        }
        for (std::size_t c = 0; c < s; ++c) {
            double acc = 0.0;
            for (std::size_t a = 0; a < s; ++a) {
                for (std::size_t b = 0; b < s; ++b) {
                    const std::array<std::size_t, 3> pos{a, b, c};
                    acc += zt.partial(pos) * u[t.idx[a]] * v[t.idx[b]];
                }
            }
            out[t.idx[c]] += acc;
        }
    }
    if (counter) {
        ++counter->calls;
    }
}

Vector third_dir(const SparsePolynomial& poly, std::span<const double> x, std::span<const double> u,
                 std::span<const double> v)
{
    Vector out(poly.dim());
    third_dir(poly, x, u, v, out);
    return out;
}

DenseDerivatives dense_derivatives(const SparsePolynomial& poly, std::span<const double> x)
{
    const std::size_t d = poly.dim();
    if (d > kDenseCap) {
        throw std::invalid_argument("dense_derivatives: dimension " + std::to_string(d) +
                                    " exceeds dense cap " + std::to_string(kDenseCap));
    }
    check_dim(poly, x, "dense_derivatives");
    DenseDerivatives dd{d, Vector(d, 0.0), Vector(d * d, 0.0), Vector(d * d * d, 0.0)};

    // direct falling-factorial evaluation of c * d^beta x^alpha over the support
    auto partial = [&](const MonomialView& t, std::span<const std::size_t> positions) {
        double val = t.coeff;
        for (std::size_t a = 0; a < t.support(); ++a) {
            unsigned k = 0;
            for (std::size_t p : positions) {
                k += (p == a) ? 1u : 0u;
            }
            const unsigned e = t.exp[a];
            if (k > e) {
                return 0.0;
            }
            val *= falling_factorial(e, k) * ipow(x[t.idx[a]], e - k);
        }
        return val;
    };

    for (std::size_t l = 0; l < poly.num_terms(); ++l) {
        const MonomialView t = poly.term(l);
        const std::size_t s = t.support();
        for (std::size_t a = 0; a < s; ++a) {
            const std::array<std::size_t, 1> p1{a};
            dd.grad[t.idx[a]] += partial(t, p1);
            for (std::size_t b = a; b < s; ++b) {
                const std::array<std::size_t, 2> p2{a, b};
                dd.hess[t.idx[a] * d + t.idx[b]] += partial(t, p2);
                for (std::size_t c = b; c < s; ++c) {
                    const std::array<std::size_t, 3> p3{a, b, c};
                    dd.third[(t.idx[a] * d + t.idx[b]) * d + t.idx[c]] += partial(t, p3);
                }
            }
        }
    }
    // representatives live at i <= j (<= k); copy to every permutation
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            dd.hess[j * d + i] = dd.hess[i * d + j];
            for (std::size_t k = j; k < d; ++k) {
                const double val = dd.third[(i * d + j) * d + k];
                const std::array<std::array<std::size_t, 3>, 6> perms{{{i, j, k},
                                                                       {i, k, j},
                                                                       {j, i, k},
                                                                       {j, k, i},
                                                                       {k, i, j},
                                                                       {k, j, i}}};
                for (const auto& p : perms) {
                    dd.third[(p[0] * d + p[1]) * d + p[2]] = val;
                }
            }
        }
    }
    return dd;
}

} // namespace affinorm
