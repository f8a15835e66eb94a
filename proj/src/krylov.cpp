#include "affinorm/krylov.hpp"

#include "affinorm/errors.hpp"

#include <cmath>
#include <string>

namespace affinorm {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace

void validate(const KrylovConfig& cfg)
{
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
        throw std::invalid_argument("KrylovConfig: lambda must be finite and >= 0");
    }
    if (cfg.max_iter < 1) {
        throw std::invalid_argument("KrylovConfig: max_iter must be positive");
    }
    if (!(cfg.tol >= 0.0 && cfg.tol < 1.0)) {
        throw std::invalid_argument("KrylovConfig: tol must lie in [0, 1)");
    }
    if (cfg.escalation < 0) {
        throw std::invalid_argument("KrylovConfig: escalation must be >= 0");
    }
}

SolveReport cg_solve(const LinearOperator& apply, std::span<const double> b, const KrylovConfig& cfg)
{
    validate(cfg);
    const std::size_t n = b.size();
    for (double e : b) {
        if (!std::isfinite(e)) {
            throw NonFiniteValue("cg_solve: right-hand side is not finite");
        }
    }
    SolveReport rep;
    rep.solution.assign(n, 0.0);
    rep.lambda_used = cfg.lambda;
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        rep.converged = true;
        return rep;
    }

    Vector r(n), p(n), ap(n);
    double lambda = cfg.lambda;
    for (int attempt = 0;; ++attempt) {
        Vector& y = rep.solution;
        std::fill(y.begin(), y.end(), 0.0);
        r.assign(b.begin(), b.end());
        p = r;
        double rr = bnorm * bnorm;
        double relres = 1.0;
        bool negative_curvature = false;
        for (int k = 0; k < cfg.max_iter; ++k) {
            apply(p, ap);
            ++rep.iterations;
            for (std::size_t i = 0; i < n; ++i) {
                ap[i] += lambda * p[i];
            }
            const double pap = dot(p, ap);
            if (!std::isfinite(pap)) {
                throw NonFiniteValue("cg_solve: non-finite curvature p^T A p");
            }
            if (pap <= 0.0) {
                negative_curvature = true;
                break;
            }
            const double alpha = rr / pap;
            for (std::size_t i = 0; i < n; ++i) {
                y[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            const double rr_new = dot(r, r);
            relres = std::sqrt(rr_new) / bnorm;
            if (relres <= cfg.tol || rr_new == 0.0) {
                break;
            }
            const double beta = rr_new / rr;
            rr = rr_new;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = r[i] + beta * p[i];
            }
        }
        if (!negative_curvature) {
            rep.final_relative_residual = relres;
            rep.converged = relres <= cfg.tol;
            rep.lambda_used = lambda;
            return rep;
        }
        if (attempt >= cfg.escalation) {
            throw IndefiniteOperator("cg_solve: negative curvature with lambda = " + std::to_string(lambda) +
                                     " after " + std::to_string(attempt) + " escalations");
        }
        lambda = lambda > 0.0 ? 100.0 * lambda : 1e-6;
    }
}

} // namespace affinorm
