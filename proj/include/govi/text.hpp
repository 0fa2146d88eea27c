#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace govi::text {

/// Shortest decimal that parses back to the same double.
std::string shortest(double value);
/// Fixed-point with `decimals` digits after the point.
std::string fixed(double value, int decimals);

std::vector<std::string_view> split(std::string_view line, char sep);
/// Whitespace-separated tokens.
std::vector<std::string_view> tokens(std::string_view line);
std::string_view trim(std::string_view s);

/// Strict numeric parsing of a whole token; nullopt-free by throwing
/// InvalidArgument with `what` in the message.
double parse_double(std::string_view token, std::string_view what);
long long parse_int(std::string_view token, std::string_view what);
unsigned long long parse_uint(std::string_view token, std::string_view what);

} // namespace govi::text
