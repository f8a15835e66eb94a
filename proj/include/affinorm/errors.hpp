#pragma once

#include <stdexcept>
#include <string>

namespace affinorm {

// Raised when the gradient is too small for a level-set frame to exist.
class ZeroGradient : public std::runtime_error {
public:
    explicit ZeroGradient(const std::string& what) : std::runtime_error(what) {}
};

// Raised by the Krylov solver once all lambda escalations are spent.
class IndefiniteOperator : public std::runtime_error {
public:
    explicit IndefiniteOperator(const std::string& what) : std::runtime_error(what) {}
};

class NonFiniteValue : public std::runtime_error {
public:
    explicit NonFiniteValue(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public std::invalid_argument {
public:
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed polynomial input (JSON file or constructor arguments).
class FormatError : public std::invalid_argument {
public:
    explicit FormatError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace affinorm
