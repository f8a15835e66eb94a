#include "affinorm/families.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace affinorm {

SparsePolynomial quartic_family(const QuarticFamilySpec& spec)
{
    const std::size_t d = spec.dim;
    if (d < 3) {
        throw std::invalid_argument("quartic_family: dim must be >= 3, got " + std::to_string(d));
    }
    std::vector<Monomial> terms;
    terms.reserve(d * 3 + d / 3);
    auto idx = [](std::size_t i) { return static_cast<Index>(i); };
    for (std::size_t i = 0; i < d; ++i) {
        terms.push_back({1.0 + 0.1 * static_cast<double>(i % 7), {{idx(i), 4}}});
    }
    for (std::size_t i = 0; i + 1 < d; ++i) {
        terms.push_back({0.5 + 0.05 * static_cast<double>(i % 5), {{idx(i), 2}, {idx(i + 1), 2}}});
    }
    for (std::size_t i = 0; i + 2 < d; ++i) {
        terms.push_back({0.1 * static_cast<double>(1 + i % 3), {{idx(i), 3}, {idx(i + 2), 1}}});
    }
    for (std::size_t k = 0; k < d / 3; ++k) {
        terms.push_back({0.2 * static_cast<double>(1 + k % 4),
                         {{idx(3 * k), 2}, {idx(3 * k + 1), 1}, {idx(3 * k + 2), 1}}});
    }
    return SparsePolynomial(d, terms);
}

SparsePolynomial random_sparse(const RandomSparseSpec& spec)
{
    if (spec.dim < 2) {
        throw std::invalid_argument("random_sparse: dim must be >= 2");
    }
    if (spec.m < 1) {
        throw std::invalid_argument("random_sparse: m must be >= 1");
    }
    if (!(spec.stab_eps >= 0.0)) {
        throw std::invalid_argument("random_sparse: stab_eps must be >= 0");
    }
    std::mt19937_64 rng(spec.seed);
    const std::size_t max_support = std::min<std::size_t>(5, spec.dim);
    std::uniform_int_distribution<std::size_t> support_dist(2, max_support);
    std::uniform_int_distribution<std::size_t> index_dist(0, spec.dim - 1);
    std::uniform_int_distribution<unsigned> exp_dist(1, 2);
    std::uniform_real_distribution<double> coeff_dist(-1.0, 1.0);

    std::set<std::vector<std::pair<Index, unsigned>>> seen;
    std::vector<Monomial> terms;
    terms.reserve(spec.m + spec.dim);
    while (terms.size() < spec.m) {
        const std::size_t s = support_dist(rng);
        std::vector<Index> support;
        while (support.size() < s) {
            const auto i = static_cast<Index>(index_dist(rng));
            if (std::find(support.begin(), support.end(), i) == support.end()) {
                support.push_back(i);
            }
        }
        std::sort(support.begin(), support.end());
        Monomial mono;
        unsigned degree = 0;
        for (Index i : support) {
            const unsigned e = exp_dist(rng);
            mono.exps.emplace_back(i, e);
            degree += e;
        }
        const unsigned cap = std::max<unsigned>(4, static_cast<unsigned>(s));
        for (std::size_t a = mono.exps.size(); a-- > 0 && degree > cap;) {
            if (mono.exps[a].second == 2) {
                mono.exps[a].second = 1;
                --degree;
            }
        }
        do {
            mono.coeff = coeff_dist(rng);
        } while (mono.coeff == 0.0);
        if (seen.insert(mono.exps).second) {
            terms.push_back(std::move(mono));
        }
    }
    if (spec.stab_eps > 0.0) {
        for (std::size_t i = 0; i < spec.dim; ++i) {
            terms.push_back({spec.stab_eps, {{static_cast<Index>(i), 4}}});
        }
    }
    return SparsePolynomial(spec.dim, terms);
}

std::vector<Vector> sample_points(std::size_t dim, std::size_t count)
{
    if (count < 1) {
        throw std::invalid_argument("sample_points: count must be >= 1");
    }
    std::vector<Vector> pts(count, Vector(dim));
    for (std::size_t p = 1; p <= count; ++p) {
        for (std::size_t i = 0; i < dim; ++i) {
            pts[p - 1][i] = 0.6 + 0.4 * std::sin(static_cast<double>(i + 1) + 0.7 * static_cast<double>(p));
        }
    }
    return pts;
}

SparsePolynomial sphere(std::size_t dim)
{
    std::vector<Monomial> terms;
    for (std::size_t i = 0; i < dim; ++i) {
        terms.push_back({1.0, {{static_cast<Index>(i), 2}}});
    }
    return SparsePolynomial(dim, terms);
}

} // namespace affinorm
