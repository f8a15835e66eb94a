#include "doctest.h"

#include "affinorm/families.hpp"

#include <cmath>
#include <set>

using namespace affinorm;

namespace {

bool same(const SparsePolynomial& a, const SparsePolynomial& b)
{
    if (a.dim() != b.dim() || a.num_terms() != b.num_terms()) {
        return false;
    }
    const auto ta = a.terms(), tb = b.terms();
    for (std::size_t l = 0; l < ta.size(); ++l) {
        if (ta[l].coeff != tb[l].coeff || ta[l].exps != tb[l].exps) {
            return false;
        }
    }
    return true;
}

using Exps = std::vector<std::pair<Index, unsigned>>;

double coeff_of(const SparsePolynomial& p, const Exps& e)
{
    for (const auto& m : p.terms()) {
        if (m.exps == e) {
            return m.coeff;
        }
    }
    return 0.0;
}

} // namespace

TEST_CASE("quartic family for d = 3")
{
    const auto p = quartic_family({3});
    CHECK(p.num_terms() == 7);
    CHECK(coeff_of(p, {{0, 4}}) == doctest::Approx(1.0));
    CHECK(coeff_of(p, {{1, 4}}) == doctest::Approx(1.1));
    CHECK(coeff_of(p, {{2, 4}}) == doctest::Approx(1.2));
    CHECK(coeff_of(p, {{0, 2}, {1, 2}}) == doctest::Approx(0.5));
    CHECK(coeff_of(p, {{1, 2}, {2, 2}}) == doctest::Approx(0.55));
    CHECK(coeff_of(p, {{0, 3}, {2, 1}}) == doctest::Approx(0.1));
    CHECK(coeff_of(p, {{0, 2}, {1, 1}, {2, 1}}) == doctest::Approx(0.2));
}

TEST_CASE("quartic family term count and shape")
{
    CHECK(quartic_family({20}).num_terms() == 63);
    CHECK_THROWS(quartic_family({2}));
    for (std::size_t d = 3; d <= 300; d += (d < 30 ? 1 : 37)) {
        const auto p = quartic_family({d});
        CHECK(p.num_terms() == d + (d - 1) + (d - 2) + d / 3);
        CHECK(p.avg_support() <= 3.0);
        CHECK(p.max_degree() == 4);
        CHECK(same(p, quartic_family({d})));
    }
    // coefficient cycles
    const auto p = quartic_family({30});
    CHECK(coeff_of(p, {{13, 4}}) == doctest::Approx(1.0 + 0.1 * (13 % 7)));
    CHECK(coeff_of(p, {{12, 2}, {13, 2}}) == doctest::Approx(0.5 + 0.05 * (12 % 5)));
    CHECK(coeff_of(p, {{10, 3}, {12, 1}}) == doctest::Approx(0.1 * (1 + 10 % 3)));
    CHECK(coeff_of(p, {{21, 2}, {22, 1}, {23, 1}}) == doctest::Approx(0.2 * (1 + 7 % 4)));
}

TEST_CASE("random sparse polynomials")
{
    const auto p = random_sparse({50, 500, 0, 0.01});
    CHECK(p.num_terms() == 550);
    CHECK(p.avg_support() >= 3.0);
    CHECK(p.avg_support() <= 4.0);
    CHECK(same(p, random_sparse({50, 500, 0, 0.01})));
    CHECK_FALSE(same(p, random_sparse({50, 500, 1, 0.01})));

    const auto tiny = random_sparse({2, 1, 9, 0.01});
    CHECK(tiny.num_terms() == 3);

    CHECK(random_sparse({10, 20, 0, 0.0}).num_terms() == 20);
    CHECK_THROWS(random_sparse({1, 5, 0, 0.01}));
    CHECK_THROWS(random_sparse({5, 0, 0, 0.01}));
}

TEST_CASE("random sparse term structure")
{
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const std::size_t dim = 40, m = 400;
        const auto p = random_sparse({dim, m, seed, 0.01});
        const auto terms = p.terms();
        REQUIRE(terms.size() == m + dim);
        std::set<Exps> seen;
        double support = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
            const auto& t = terms[l];
            CHECK(t.exps.size() >= 2);
            CHECK(t.exps.size() <= 5);
            unsigned deg = 0;
            for (const auto& [i, e] : t.exps) {
                CHECK(i < dim);
                CHECK((e == 1 || e == 2));
                deg += e;
            }
            CHECK(deg <= std::max<unsigned>(4, static_cast<unsigned>(t.exps.size())));
            CHECK(t.coeff != 0.0);
            CHECK(std::abs(t.coeff) <= 1.0);
            CHECK(seen.insert(t.exps).second);
            support += static_cast<double>(t.exps.size());
        }
        CHECK(support / m >= 3.0);
        CHECK(support / m <= 4.0);
        for (std::size_t i = 0; i < dim; ++i) {
            const auto& t = terms[m + i];
            CHECK(t.coeff == 0.01);
            CHECK(t.exps == Exps{{static_cast<Index>(i), 4}});
        }
    }
}

TEST_CASE("nnz grows linearly with m")
{
    std::vector<double> per_term;
    for (std::size_t m : {200u, 400u, 800u, 1600u, 3200u}) {
        const auto p = random_sparse({200, m, 0, 0.0});
        per_term.push_back(static_cast<double>(p.nnz()) / static_cast<double>(m));
    }
    for (double r : per_term) {
        CHECK(r == doctest::Approx(3.5).epsilon(0.05));
    }
}

TEST_CASE("sample points")
{
    const auto a = sample_points(3, 2), b = sample_points(3, 2);
    CHECK(a == b);
    CHECK(a[0][0] == doctest::Approx(0.6 + 0.4 * std::sin(1.0 + 0.7)));
    CHECK(a[1][2] == doctest::Approx(0.6 + 0.4 * std::sin(3.0 + 1.4)));
    double lo = 1.0, hi = 0.0;
    for (const auto& p : sample_points(800, 5)) {
        for (double e : p) {
            lo = std::min(lo, std::abs(e));
            hi = std::max(hi, e);
        }
    }
    CHECK(lo >= 0.2);
    CHECK(hi <= 1.0);
}

TEST_CASE("sphere")
{
    const auto s = sphere(4);
    CHECK(s.num_terms() == 4);
    CHECK(s.nnz() == 4);
    const Vector x{1.0, 2.0, 3.0, 4.0};
    CHECK(eval(s, x) == 30.0);
}
