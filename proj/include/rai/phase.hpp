#pragma once

#include <cmath>

#include "rai/constants.hpp"

namespace rai {

/// Wrap an angle into [0, 2pi).
inline double wrap_two_pi(double phi) {
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0; // fmod rounding can land exactly on 2pi
    return r;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_pm_pi(double phi) {
    double r = wrap_two_pi(phi);
    return r > std::numbers::pi ? r - two_pi : r;
}

/// Shortest angular distance between two phases.
inline double circular_distance(double a, double b) {
    return std::abs(wrap_pm_pi(a - b));
}

} // namespace rai
