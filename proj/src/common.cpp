#include "miace/common.hpp"

#include <charconv>
#include <cstdio>

namespace miace {

std::string format_double(double v) {
    char buf[40];
    // %.17g round-trips any finite double through strtod/from_chars.
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(std::string_view token, std::size_t line_no) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected a number, got '" + std::string(token) + "'");
    }
    return value;
}

long parse_long(std::string_view token, std::size_t line_no) {
    long value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected an integer, got '" + std::string(token) + "'");
    }
    return value;
}

} // namespace miace
