#pragma once

#include <cstdio>
#include <string>

namespace ebnc {

// Reports use 9 significant digits; serialized CPTs use 17 so that a
// parse -> serialize -> parse round trip reproduces doubles exactly.
inline std::string format_real(double value, int significant_digits = 9) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", significant_digits, value);
    return std::string(buffer);
}

inline std::string format_real_exact(double value) { return format_real(value, 17); }

}  // namespace ebnc
