#include "affinorm/affine.hpp"

#include "affinorm/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace affinorm {

namespace {

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double e : v) {
        s += e * e;
    }
    return std::sqrt(s);
}

Vector unit(std::span<const double> v)
{
    const double n = norm2(v);
    Vector out(v.begin(), v.end());
    for (double& e : out) {
        e /= n;
    }
    return out;
}

// Everything the explicit formula needs, in aligned coordinates.
struct DenseAligned {
    TangentFrame frame;
    Eigen::MatrixXd basis; // d x (d-1)
    Eigen::VectorXd nu;
    Eigen::MatrixXd shifted; // H_T + lambda I
    Eigen::VectorXd h;
    Eigen::VectorXd a;     // f^{pq} f_{pqj} with f^{pq} from (H_T + lambda I)^{-1}
    double beta = 0.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
};

DenseAligned dense_aligned(const SparsePolynomial& poly, std::span<const double> x, double lambda)
{
    const std::size_t d = poly.dim();
    if (d > kDenseCap) {
        throw std::invalid_argument("reference: dimension exceeds dense cap");
    }
    if (x.size() != d) {
        throw DimensionMismatch("reference: point length differs from polynomial dimension");
    }
    const DenseDerivatives dd = dense_derivatives(poly, x);
    DenseAligned out{build_frame(dd.grad, grad_floor(x)), {}, {}, {}, {}, {}, 0.0, {}};
    const auto n = static_cast<Eigen::Index>(d - 1);
    const auto de = static_cast<Eigen::Index>(d);

    const Vector tb = out.frame.dense_basis();
    out.basis = Eigen::Map<const Eigen::MatrixXd>(tb.data(), de, n);
    out.nu = Eigen::Map<const Eigen::VectorXd>(out.frame.nu().data(), de);
    const Eigen::MatrixXd hess = Eigen::Map<const Eigen::MatrixXd>(dd.hess.data(), de, de);

    out.shifted = out.basis.transpose() * hess * out.basis;
    out.shifted.diagonal().array() += lambda;
    out.h = out.basis.transpose() * (hess * out.nu);

    // rotated third tensor F_pqr = sum_ijk D_ijk T_ip T_jq T_kr, one mode at a time
    std::vector<double> m1(d * d * (d - 1), 0.0); // [i][j][r]
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t r = 0; r < d - 1; ++r) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    s += dd.t(i, j, k) * out.basis(k, r);
                }
                m1[(i * d + j) * (d - 1) + r] = s;
            }
        }
    }
    std::vector<double> m2(d * (d - 1) * (d - 1), 0.0); // [i][q][r]
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t q = 0; q < d - 1; ++q) {
            for (std::size_t r = 0; r < d - 1; ++r) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    s += m1[(i * d + j) * (d - 1) + r] * out.basis(j, q);
                }
                m2[(i * (d - 1) + q) * (d - 1) + r] = s;
            }
        }
    }
    std::vector<double> rot((d - 1) * (d - 1) * (d - 1), 0.0); // [p][q][r]
    for (std::size_t p = 0; p < d - 1; ++p) {
        for (std::size_t q = 0; q < d - 1; ++q) {
            for (std::size_t r = 0; r < d - 1; ++r) {
                double s = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    s += m2[(i * (d - 1) + q) * (d - 1) + r] * out.basis(i, p);
                }
                rot[(p * (d - 1) + q) * (d - 1) + r] = s;
            }
        }
    }

    out.lu = Eigen::FullPivLU<Eigen::MatrixXd>(out.shifted);
    if (!out.lu.isInvertible()) {
        throw std::runtime_error("reference: H_T + lambda I is singular");
    }
    const Eigen::MatrixXd inv = out.lu.inverse();
    out.a = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < d - 1; ++r) {
        double s = 0.0;
        for (std::size_t p = 0; p < d - 1; ++p) {
            for (std::size_t q = 0; q < d - 1; ++q) {
                s += inv(p, q) * rot[(p * (d - 1) + q) * (d - 1) + r];
            }
        }
        out.a(static_cast<Eigen::Index>(r)) = s;
    }
    out.beta = out.frame.grad_norm() / static_cast<double>(d + 1);
    return out;
}

Vector to_vector(const Eigen::VectorXd& v)
{
    return Vector(v.data(), v.data() + v.size());
}

} // namespace

AffineNormalResult affine_normal(const SparsePolynomial& poly, std::span<const double> x,
                                 const AffineNormalConfig& cfg)
{
    const Vector g = gradient(poly, x);
    const TangentFrame frame = build_frame(g, grad_floor(x));
    return affine_normal_in_frame(poly, x, frame, cfg);
}

AffineNormalResult affine_normal_in_frame(const SparsePolynomial& poly, std::span<const double> x,
                                          const TangentFrame& frame, const AffineNormalConfig& cfg)
{
    const std::size_t d = poly.dim();
    if (x.size() != d || frame.dim() != d) {
        throw DimensionMismatch("affine_normal: point, frame and polynomial dimensions differ");
    }
    AffineNormalResult res;
    res.grad_norm = frame.grad_norm();

    const Vector h = mixed_term(poly, x, frame);
    res.counts.hv = 1;

    const LogDetGradReport ld =
        cfg.mode == Mode::exact
            ? logdet_grad_exact(poly, x, frame, cfg.krylov, cfg.probes.parallel)
            : logdet_grad_hutchinson(poly, x, frame, cfg.krylov, cfg.probes);
    res.counts.hv += ld.hv_count;
    res.counts.third = ld.third_count;
    res.counts.krylov = ld.krylov_iters_total;

    const double beta = frame.grad_norm() / static_cast<double>(d + 1);
    Vector b(h.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] = h[i] - beta * ld.a[i];
    }
    TangentOperator op(poly, x, frame);
    const SolveReport sol =
        cg_solve([&op](std::span<const double> v, std::span<double> out) { op.apply(v, out); }, b, cfg.krylov);
    res.counts.hv += op.hv_count();
    res.counts.krylov += sol.iterations;
    res.lambda_used = std::max(ld.lambda_used, sol.lambda_used);

    res.u = sol.solution;
    res.direction = frame.lift(res.u);
    for (std::size_t i = 0; i < d; ++i) {
        res.direction[i] -= frame.nu()[i];
        if (!std::isfinite(res.direction[i])) {
            throw NonFiniteValue("affine_normal: non-finite direction");
        }
    }
    res.direction_unit = unit(res.direction);
    return res;
}

AffineNormalResult reference_affine_normal(const SparsePolynomial& poly, std::span<const double> x,
                                           double lambda)
{
    const DenseAligned da = dense_aligned(poly, x, lambda);
    const Eigen::VectorXd u = da.lu.solve(da.h - da.beta * da.a);
    const Eigen::VectorXd dir = da.basis * u - da.nu;

    AffineNormalResult res;
    res.u = to_vector(u);
    res.direction = to_vector(dir);
    res.direction_unit = unit(res.direction);
    res.grad_norm = da.frame.grad_norm();
    res.lambda_used = lambda;
    return res;
}

DirectionError direction_error(std::span<const double> d1, std::span<const double> d2)
{
    if (d1.size() != d2.size()) {
        throw DimensionMismatch("direction_error: length mismatch");
    }
    const double n1 = norm2(d1);
    const double n2 = norm2(d2);
    if (n1 == 0.0 || n2 == 0.0) {
        throw std::invalid_argument("direction_error: zero vector");
    }
    double diff = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < d1.size(); ++i) {
        const double a = d1[i] / n1;
        const double b = d2[i] / n2;
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    // same angle as arccos of the inner product, without its loss of
    // resolution near 0 and 180 degrees
    const double angle = 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
    return {std::sqrt(diff), angle * 180.0 / std::numbers::pi};
}

ErrorBoundReport verify_error_bound(const SparsePolynomial& poly, std::span<const double> x,
                                    const AffineNormalConfig& cfg, const PerturbationSpec& spec)
{
    const DenseAligned da = dense_aligned(poly, x, cfg.krylov.lambda);
    const Eigen::Index n = da.a.size();

    ErrorBoundReport rep;
    rep.beta = da.beta;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(da.shifted, Eigen::EigenvaluesOnly);
    rep.inv_norm = 1.0 / eig.eigenvalues().cwiseAbs().minCoeff();

    const Eigen::VectorXd u = da.lu.solve(da.h - da.beta * da.a);
    const Eigen::VectorXd dir = da.basis * u - da.nu;

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    if (spec.delta_a_norm > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            delta(i) = gauss(rng);
        }
        delta *= spec.delta_a_norm / delta.norm();
    }
    const Eigen::VectorXd a_hat = da.a + delta;
    const Eigen::VectorXd rhs_hat = da.h - da.beta * a_hat;

    Eigen::VectorXd u_hat;
    if (spec.krylov_iters <= 0) {
        u_hat = da.lu.solve(rhs_hat);
    } else {
        KrylovConfig kc;
        kc.lambda = 0.0;
        kc.max_iter = spec.krylov_iters;
        kc.tol = 0.0;
        kc.escalation = 0;
        const Eigen::MatrixXd& A = da.shifted;
        const LinearOperator apply = [&A](std::span<const double> v, std::span<double> out) {
            Eigen::Map<Eigen::VectorXd>(out.data(), A.rows()) =
                A * Eigen::Map<const Eigen::VectorXd>(v.data(), A.cols());
        };
        const Vector rhs = to_vector(rhs_hat);
        const SolveReport sol = cg_solve(apply, rhs, kc);
        u_hat = Eigen::Map<const Eigen::VectorXd>(sol.solution.data(), n);
    }
    const Eigen::VectorXd residual = da.shifted * u_hat - rhs_hat;
    rep.residual_norm = residual.norm();
    rep.delta_a = (a_hat - da.a).norm();

    const Eigen::VectorXd dir_hat = da.basis * u_hat - da.nu;
    const double bound = rep.inv_norm * (rep.beta * rep.delta_a + rep.residual_norm);
    const double dir_err = (dir_hat - dir).norm();
    const double unit_err = (dir_hat.normalized() - dir.normalized()).norm();

    rep.checks.push_back({"tangent_coefficients", (u_hat - u).norm(), bound, true, true});
    rep.checks.push_back({"direction", dir_err, bound, true, true});
    const bool hyp = dir_err <= 0.5 * dir.norm();
    rep.checks.push_back({"normalized_direction", unit_err, 2.0 * dir_err / dir.norm(), hyp, true});
    rep.checks.push_back({"normalized_direction_full", unit_err, 2.0 * bound / dir.norm(), hyp, true});

    for (BoundCheck& c : rep.checks) {
        if (!c.applicable) {
            continue;
        }
        // slack for rounding in the dense evaluation of both sides
        c.holds = c.lhs <= c.rhs * (1.0 + 1e-9) + 1e-14;
        if (!c.holds) {
            ++rep.violations;
        }
    }
    return rep;
}

} // namespace affinorm
