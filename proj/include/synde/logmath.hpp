#pragma once

#include <cmath>
#include <limits>

namespace synde {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) noexcept {
    if (a < b)
        std::swap(a, b);
    if (b == kNegInf)
        return a;
    return a + std::log1p(std::exp(b - a));
}

inline double safe_log(double p) noexcept { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace synde
