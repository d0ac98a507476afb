#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ecodrive/baseline_driver.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/kinematics.hpp"
#include "ecodrive/trajectory.hpp"

namespace ecodrive {

/// Tolerances for constraint checks on generated trajectories.
struct CheckTolerance {
    double speed_m_s = 1e-6;
    double accel_m_s2 = 1e-6;
    double time_s = 1e-6;
};

namespace detail {

// Instant at which the trajectory moves past `line`: the last sample sitting
// on it, or the kinematic interpolation inside the arc that spans it.
inline std::optional<double> crossing_time(const Trajectory& traj, double line)
{
    const auto& s = traj.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const auto& a = s[i - 1];
        const auto& b = s[i];
        if (b.x_m <= line || a.x_m > line) {
            continue;
        }
        if (a.x_m == line) {
            return a.t_s;
        }
        const double dx = b.x_m - a.x_m;
        const double acc = (b.v_m_s * b.v_m_s - a.v_m_s * a.v_m_s) / (2.0 * dx);
        const double full = kinematics::time_to_cover(a.v_m_s, acc, dx);
        const double part = kinematics::time_to_cover(a.v_m_s, acc, line - a.x_m);
        if (!std::isfinite(full) || !(full > 0.0)) {
            return a.t_s;
        }
        return a.t_s + (b.t_s - a.t_s) * part / full;
    }
    return std::nullopt;
}

}  // namespace detail

/// Lists every red-light, speed-limit, acceleration-bound and time-budget
/// violation of a trajectory. An empty result means the trajectory is valid.
/// Pass a non-positive budget to skip the trip-time check.
inline std::vector<std::string> check_constraints(const Trajectory& traj, const Corridor& c,
                                                  const RegularDriverRules& r, double budget_s = -1.0,
                                                  const CheckTolerance& tol = {})
{
    std::vector<std::string> out;
    char buf[200];
    const auto& s = traj.samples;
    if (s.empty()) {
        out.emplace_back("empty trajectory");
        return out;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].v_m_s < -tol.speed_m_s || s[i].v_m_s > c.speed_limit_m_s + tol.speed_m_s) {
            std::snprintf(buf, sizeof buf, "speed %.6f out of [0, limit] at sample %zu", s[i].v_m_s, i);
            out.emplace_back(buf);
        }
        if (i == 0) {
            continue;
        }
        const double dx = s[i].x_m - s[i - 1].x_m;
        if (dx > 0.0) {
            const double acc = (s[i].v_m_s * s[i].v_m_s - s[i - 1].v_m_s * s[i - 1].v_m_s) / (2.0 * dx);
            if (acc > r.accel_max_m_s2 + tol.accel_m_s2 || acc < r.decel_min_m_s2 - tol.accel_m_s2) {
                std::snprintf(buf, sizeof buf, "acceleration %.6f out of bounds on segment %zu", acc, i - 1);
                out.emplace_back(buf);
            }
        }
    }
    if (s.back().x_m < c.length() - 1e-6) {
        out.emplace_back("trajectory ends before the corridor exit");
    }
    for (std::size_t k = 0; k < c.signals.size(); ++k) {
        const auto t = detail::crossing_time(traj, c.signals[k].stop_line_m);
        if (!t) {
            std::snprintf(buf, sizeof buf, "light %zu never crossed", k);
            out.emplace_back(buf);
        } else if (!crossing_allowed(c, k, *t)) {
            std::snprintf(buf, sizeof buf, "light %zu crossed on red at t=%.4f", k, *t);
            out.emplace_back(buf);
        }
    }
    if (budget_s > 0.0 && traj.trip_time() > budget_s + tol.time_s) {
        std::snprintf(buf, sizeof buf, "trip time %.4f exceeds budget %.4f", traj.trip_time(), budget_s);
        out.emplace_back(buf);
    }
    return out;
}

}  // namespace ecodrive
