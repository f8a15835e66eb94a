#pragma once

#include "affinorm/frame.hpp"
#include "affinorm/krylov.hpp"
#include "affinorm/logdet.hpp"
#include "affinorm/polynomial.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace affinorm {

enum class Mode { exact, hutchinson };

struct AffineNormalConfig {
    Mode mode = Mode::exact;
    KrylovConfig krylov{};
    ProbeConfig probes{};
};

struct OpCounts {
    std::int64_t hv = 0;
    std::int64_t third = 0;
    std::int64_t krylov = 0;
};

struct AffineNormalResult {
    Vector direction;      // T u - nu
    Vector direction_unit;
    Vector u;
    double grad_norm = 0.0;
    OpCounts counts;
    double lambda_used = 0.0;
};

// Matrix-free affine normal T u - nu at x, with
// (H_T + lambda I) u = T^T H nu - |g|/(d+1) a, a = grad_t log det(H_T + lambda I).
AffineNormalResult affine_normal(const SparsePolynomial& poly, std::span<const double> x,
                                 const AffineNormalConfig& cfg);

// Same computation on a caller-provided frame (any orthonormal completion).
AffineNormalResult affine_normal_in_frame(const SparsePolynomial& poly, std::span<const double> x,
                                          const TangentFrame& frame, const AffineNormalConfig& cfg);

// Dense explicit-formula reference: materializes the aligned frame, rotates the
// dense Hessian and third-derivative tensor, contracts f^{pq} f_{pqj} directly
// and solves the tangent system by LU. d <= kDenseCap only.
AffineNormalResult reference_affine_normal(const SparsePolynomial& poly, std::span<const double> x,
                                           double lambda);

struct DirectionError {
    double normalized_error = 0.0;
    double angle_deg = 0.0;
};

DirectionError direction_error(std::span<const double> d1, std::span<const double> d2);

struct PerturbationSpec {
    double delta_a_norm = 0.0; // |a_hat - a|
    int krylov_iters = 0;      // 0 = exact dense solve, otherwise CG truncated here
    std::uint64_t seed = 0;    // direction of the a perturbation
};

struct BoundCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool applicable = true;
    bool holds = true;
};

struct ErrorBoundReport {
    double beta = 0.0;
    double inv_norm = 0.0;    // |A^{-1}|_2
    double residual_norm = 0.0;
    double delta_a = 0.0;
    std::vector<BoundCheck> checks; // tangent vector, direction, normalized direction
    int violations = 0;
};

// Injects the perturbations into a dense exact computation and checks the
// three error-propagation inequalities.
ErrorBoundReport verify_error_bound(const SparsePolynomial& poly, std::span<const double> x,
                                    const AffineNormalConfig& cfg, const PerturbationSpec& spec);

} // namespace affinorm
