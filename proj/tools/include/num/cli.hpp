#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "num/model.hpp"

namespace num::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of `numtool`. Output that goes to stdout when no --output is
/// given is written to `out`; diagnostics and summaries go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Resolves a --scenario argument: a file path, `builtin:aggregating[:n]`,
/// `random` or `random-aggregating:<n>` (the last two use `seed`).
Scenario resolve_scenario(const std::string& spec, std::uint64_t seed);

/// Numbers separated by commas and/or whitespace; `#` starts a comment.
std::vector<double> parse_number_list(const std::string& text);

/// 17 significant digits, shortest round-trip form for integers.
std::string format_number(double v);

}  // namespace num::cli
