#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include "moco/util/error.hpp"

namespace moco {

// 17 significant digits round-trips any finite f64 bit-exactly through strtod.
inline std::string fmt_f64(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_f64(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) throw DataError("not a number: '" + s + "'");
    return v;
}

}  // namespace moco
