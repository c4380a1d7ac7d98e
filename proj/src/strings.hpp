#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "error.hpp"

namespace fvn {

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw NumericError("cannot format double");
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& what) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(what + ": not a number: '" + s + "'");
    }
    return v;
}

inline int64_t parse_int(const std::string& s, const std::string& what) {
    int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError(what + ": not an integer: '" + s + "'");
    }
    return v;
}

} // namespace fvn
