#include "affinorm/logdet.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace affinorm {

namespace {

std::uint64_t splitmix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct ProbeResult {
    Vector contribution; // T^T D^3 f[T y, T xi, .]
    std::int64_t krylov = 0;
    std::int64_t hv = 0;
    double lambda = 0.0;
};

// One trace sample: solve (H_T + lambda I) y = xi, return T^T D^3f[Ty, T xi, .].
ProbeResult run_probe(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame,
                      const KrylovConfig& cfg, std::span<const double> xi)
{
    TangentOperator op(poly, x, frame);
    const SolveReport sol =
        cg_solve([&op](std::span<const double> v, std::span<double> out) { op.apply(v, out); }, xi, cfg);
    const Vector u = frame.lift(sol.solution);
    const Vector v = frame.lift(xi);
    Vector w(poly.dim());
    third_dir(poly, x, u, v, w);
    return {frame.project(w), sol.iterations, op.hv_count(), sol.lambda_used};
}

using ProbeSource = void (*)(std::uint64_t, std::uint64_t, std::span<double>);

void canonical_probe(std::uint64_t, std::uint64_t j, std::span<double> out)
{
    std::fill(out.begin(), out.end(), 0.0);
    out[j] = 1.0;
}

// Runs `count` probes and sums their contributions in ascending probe order.
LogDetGradReport accumulate(const SparsePolynomial& poly, std::span<const double> x, const TangentFrame& frame,
                            const KrylovConfig& cfg, std::size_t count, std::uint64_t seed, ProbeSource source,
                            bool parallel)
{
    const std::size_t n = frame.tangent_dim();
    LogDetGradReport rep;
    rep.a.assign(n, 0.0);
    rep.probes_used = static_cast<int>(count);
    rep.lambda_used = cfg.lambda;

    auto merge = [&rep](const ProbeResult& pr) {
        for (std::size_t i = 0; i < pr.contribution.size(); ++i) {
            rep.a[i] += pr.contribution[i];
        }
        rep.krylov_iters_total += pr.krylov;
        rep.hv_count += pr.hv;
        rep.third_count += 1;
        rep.lambda_used = std::max(rep.lambda_used, pr.lambda);
    };

    if (!parallel) {
        Vector xi(n);
        for (std::size_t l = 0; l < count; ++l) {
            source(seed, l, xi);
            merge(run_probe(poly, x, frame, cfg, xi));
        }
        return rep;
    }

    std::vector<ProbeResult> results(count);
    std::vector<std::exception_ptr> errors(count);
    const auto total = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t l = 0; l < total; ++l) {
        try {
            Vector xi(n);
            source(seed, static_cast<std::uint64_t>(l), xi);
            results[l] = run_probe(poly, x, frame, cfg, xi);
        } catch (...) {
            errors[l] = std::current_exception();
        }
    }
    for (std::size_t l = 0; l < count; ++l) {
        if (errors[l]) {
            std::rethrow_exception(errors[l]);
        }
        merge(results[l]);
    }
    return rep;
}

} // namespace

void rademacher_probe(std::uint64_t seed, std::uint64_t probe, std::span<double> out)
{
    const std::uint64_t key = splitmix(seed ^ splitmix(probe + 0x9E3779B97F4A7C15ULL));
    std::uint64_t word = 0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (j % 64 == 0) {
            word = splitmix(key + j / 64);
        }
        out[j] = ((word >> (j % 64)) & 1ULL) ? 1.0 : -1.0;
    }
}

LogDetGradReport logdet_grad_exact(const SparsePolynomial& poly, std::span<const double> x,
                                   const TangentFrame& frame, const KrylovConfig& cfg, bool parallel)
{
    return accumulate(poly, x, frame, cfg, frame.tangent_dim(), 0, canonical_probe, parallel);
}

LogDetGradReport logdet_grad_hutchinson(const SparsePolynomial& poly, std::span<const double> x,
                                        const TangentFrame& frame, const KrylovConfig& kcfg,
                                        const ProbeConfig& pcfg)
{
    if (pcfg.canonical_basis) {
        return accumulate(poly, x, frame, kcfg, frame.tangent_dim(), 0, canonical_probe, pcfg.parallel);
    }
    if (pcfg.q < 1) {
        throw std::invalid_argument("ProbeConfig: q must be >= 1");
    }
    LogDetGradReport rep = accumulate(poly, x, frame, kcfg, static_cast<std::size_t>(pcfg.q), pcfg.seed,
                                      rademacher_probe, pcfg.parallel);
    for (double& e : rep.a) {
        e /= pcfg.q;
    }
    return rep;
}

} // namespace affinorm
