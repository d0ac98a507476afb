#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecodrive/corridor.hpp"

namespace ecodrive::kinematics {

/// Earliest h >= 0 with v*h + a*h^2/2 == d, or +inf if the distance is never reached.
inline double time_to_cover(double v, double a, double d)
{
    if (d <= 0.0) {
        return 0.0;
    }
    if (std::abs(a) < 1e-12) {
        return v > 0.0 ? d / v : std::numeric_limits<double>::infinity();
    }
    const double disc = v * v + 2.0 * a * d;
    if (disc < 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    // Numerically stable form of (-v + sqrt(disc)) / a.
    const double root = std::sqrt(disc);
    return 2.0 * d / (v + root);
}

/// Distance from which a vehicle at speed v can still stop within |decel|,
/// plus one control step of travel so that a check made once per step is never late.
inline double braking_trigger_distance(double v, double decel_abs, double step_s)
{
    return v * v / (2.0 * decel_abs) + v * step_s;
}

/// Whether a driver approaching a light at distance d with speed v has to
/// stop: it is red now, or it turns red before the driver gets there at the
/// current speed.
inline bool stop_required(const SignalSchedule& sig, double t, double d, double v)
{
    if (phase_at(sig, t) == Phase::Red) {
        return true;
    }
    if (v <= 0.0) {
        return false;
    }
    return t + d / v >= next_red_onset(sig, t);
}

}  // namespace ecodrive::kinematics
