#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fringe {

// Shortest decimal string that parses back to the same double bit pattern.
std::string format_double(double value);

// General format with a fixed number of significant digits.
// 17 digits round-trips any finite double.
std::string format_double(double value, int significant_digits);

// Strict parse of a full token; nullopt on any trailing junk or empty input.
std::optional<double> try_parse_double(std::string_view token);
std::optional<long long> try_parse_int(std::string_view token);
std::optional<unsigned long long> try_parse_uint(std::string_view token);

}  // namespace fringe
