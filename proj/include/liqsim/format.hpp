#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace liqsim {

// Shortest decimal form that parses back to the identical double.  All file
// output goes through here so repeated runs are byte-comparable.
inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("bad number: '" + std::string(text) + "'");
    return v;
}

inline int64_t parse_int(std::string_view text) {
    int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("bad integer: '" + std::string(text) + "'");
    return v;
}

inline uint64_t parse_uint(std::string_view text) {
    uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::invalid_argument("bad unsigned integer: '" + std::string(text) + "'");
    return v;
}

}  // namespace liqsim
