#pragma once

#include "affinorm/polynomial.hpp"

#include <cstdint>
#include <vector>

namespace affinorm {

struct QuarticFamilySpec {
    std::size_t dim = 3;
};

struct RandomSparseSpec {
    std::size_t dim = 2;
    std::size_t m = 1;
    std::uint64_t seed = 0;
    double stab_eps = 0.01;
};

// sum a_i x_i^4 + sum b_i x_i^2 x_{i+1}^2 + sum c_i x_i^3 x_{i+2}
//   + sum_k gamma_k x_{3k}^2 x_{3k+1} x_{3k+2}   (0-based), with
// a_i = 1 + 0.1 (i mod 7), b_i = 0.5 + 0.05 (i mod 5), c_i = 0.1 (1 + i mod 3),
// gamma_k = 0.2 (1 + k mod 4).
SparsePolynomial quartic_family(const QuarticFamilySpec& spec);

// m random monomials (support uniform in {2..5}, distinct indices, exponents in
// {1, 2} lowered until the degree is at most max(4, support), coefficients
// uniform in [-1, 1] \ {0}, no repeated multi-index) followed by
// stab_eps * x_i^4 for every i. Deterministic in (dim, m, seed) via mt19937_64.
SparsePolynomial random_sparse(const RandomSparseSpec& spec);

// x_i = 0.6 + 0.4 sin(i + 1 + 0.7 p) for point p = 1..count, coordinate i = 0..dim-1.
std::vector<Vector> sample_points(std::size_t dim, std::size_t count);

// f = |x|^2
SparsePolynomial sphere(std::size_t dim);

} // namespace affinorm
