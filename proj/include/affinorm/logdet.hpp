#pragma once

#include "affinorm/frame.hpp"
#include "affinorm/krylov.hpp"
#include "affinorm/polynomial.hpp"

#include <cstdint>

namespace affinorm {

struct ProbeConfig {
    int q = 2;
    std::uint64_t seed = 0;
    bool parallel = false;
    // Debug hook: replace the q random probes by the d-1 canonical basis
    // vectors and return the plain sum, which is the exact trace.
    bool canonical_basis = false;
};

struct LogDetGradReport {
    Vector a;
    int probes_used = 0;
    std::int64_t hv_count = 0;
    std::int64_t third_count = 0;
    std::int64_t krylov_iters_total = 0;
    double lambda_used = 0.0;
};

// Rademacher probe number `probe` for `seed`, entries in {-1, +1}.
//
// Counter-based: key = mix(seed ^ mix(probe + 0x9E3779B97F4A7C15)), word k of the
// stream is mix(key + k), and entry j takes bit (j mod 64) of word j/64
// (set -> +1). mix is the SplitMix64 finalizer. Each probe is thus
// reproducible independently of evaluation order or thread count.
void rademacher_probe(std::uint64_t seed, std::uint64_t probe, std::span<double> out);

// a = grad_t log det(H_T + lambda I) via d-1 solves against canonical vectors.
// With parallel = true the solves run under OpenMP; results are merged in
// ascending basis order, so the output is bit-identical to the serial path.
LogDetGradReport logdet_grad_exact(const SparsePolynomial& poly, std::span<const double> x,
                                   const TangentFrame& frame, const KrylovConfig& cfg,
                                   bool parallel = false);

// Hutchinson estimate of the same quantity from q Rademacher probes.
LogDetGradReport logdet_grad_hutchinson(const SparsePolynomial& poly, std::span<const double> x,
                                        const TangentFrame& frame, const KrylovConfig& kcfg,
                                        const ProbeConfig& pcfg);

} // namespace affinorm
