#pragma once

#include <cmath>

namespace singletrack {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double theta) {
    // std::remainder lands in [-pi, pi]; only the exact -pi endpoint
    // needs to be folded onto +pi.
    double r = std::remainder(theta, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

}  // namespace singletrack
