#pragma once

#include <string>
#include <string_view>

namespace rbme {

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double x);

/// Strict, locale independent; throws ParameterError on malformed input.
double parse_double(std::string_view s);

}  // namespace rbme
