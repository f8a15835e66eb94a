#pragma once

#include "affinorm/polynomial.hpp"

#include <functional>
#include <span>

namespace affinorm {

struct KrylovConfig {
    double lambda = 1e-6;
    int max_iter = 100;
    double tol = 1e-10;
    // negative-curvature restarts allowed, each multiplying lambda by 100
    int escalation = 4;
};

struct SolveReport {
    Vector solution;
    int iterations = 0;
    double final_relative_residual = 0.0;
    double lambda_used = 0.0;
    bool converged = false;
};

// out = A v for a symmetric operator A.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

// Conjugate gradients on (A + lambda I) y = b from y0 = 0. One operator
// application per iteration. On p^T (A + lambda I) p <= 0 the solve restarts
// from zero with lambda *= 100 (lambda = 1e-6 if it was 0), at most
// cfg.escalation times, then throws IndefiniteOperator.
SolveReport cg_solve(const LinearOperator& apply, std::span<const double> b, const KrylovConfig& cfg);

void validate(const KrylovConfig& cfg);

} // namespace affinorm
