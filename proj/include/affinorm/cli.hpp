#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

namespace affinorm::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kNumericalError = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "a..b" (inclusive) or "a,b,c".
std::vector<std::size_t> parse_list(const std::string& text);

} // namespace affinorm::cli
