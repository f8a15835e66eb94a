#pragma once

#include "affinorm/polynomial.hpp"

#include <string>

namespace affinorm {

// {"dim": <int>, "terms": [{"coeff": <number>, "exps": [[<index>, <exponent>], ...]}, ...]}
// Indices 0-based and strictly ascending within a term. Violations raise
// FormatError naming the offending term.
SparsePolynomial parse_polynomial_json(const std::string& text);
SparsePolynomial read_polynomial_json(const std::string& path);

std::string to_polynomial_json(const SparsePolynomial& poly);
void write_polynomial_json(const SparsePolynomial& poly, const std::string& path);

} // namespace affinorm
