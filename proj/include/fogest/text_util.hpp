#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fogest {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);

// Strict parsers; `where` prefixes the Parse error message.
double parse_double(std::string_view token, std::string_view where);
std::int64_t parse_int64(std::string_view token, std::string_view where);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace fogest
