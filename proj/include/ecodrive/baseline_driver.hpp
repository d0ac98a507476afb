#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "ecodrive/corridor.hpp"
#include "ecodrive/errors.hpp"
#include "ecodrive/kinematics.hpp"
#include "ecodrive/powertrain.hpp"
#include "ecodrive/trajectory.hpp"

namespace ecodrive {

/// Rule set of the reference ("regular") driver.
struct RegularDriverRules {
    double sight_distance_m = 75.0;
    double accel_max_m_s2 = 2.0;
    double decel_min_m_s2 = -4.0;
    double timestep_s = 0.1;

    void validate() const
    {
        if (!(sight_distance_m > 0.0)) {
            throw ParameterError("driver.sight_distance_m must be positive");
        }
        if (!(accel_max_m_s2 > 0.0) || !(decel_min_m_s2 < 0.0)) {
            throw ParameterError("driver acceleration limits must satisfy accel_max > 0 > decel_min");
        }
        if (!(timestep_s > 0.0)) {
            throw ParameterError("driver.timestep_s must be positive");
        }
    }
};

namespace detail {

inline constexpr double kPositionEps = 1e-9;

// One constant-acceleration step with the events every closed-loop driver
// needs: hitting the speed cap, stopping, reaching the stop line when braking
// onto it, leaving the corridor and crossing a stop line.
struct StepPlan {
    double accel = 0.0;
    bool brake_to_line = false;
};

struct LoopState {
    double t = 0.0;
    double x = 0.0;
    double v = 0.0;
    std::size_t next_light = 0;
};

// Advances `s` by at most `dt`. Returns false when a red crossing would occur
// (caller must re-plan with braking).
inline bool advance(LoopState& s, const StepPlan& plan, double dt, const Corridor& c, Trajectory& traj)
{
    const double limit = c.speed_limit_m_s;
    const double length = c.length();
    const double a = plan.accel;
    double h = dt;
    bool lands_on_line = false;
    bool hits_cap = false;
    bool stops = false;

    if (a > 0.0 && s.v < limit) {
        const double to_cap = (limit - s.v) / a;
        if (to_cap <= h) {
            h = to_cap;
            hits_cap = true;
        }
    }
    if (plan.brake_to_line) {
        const double d = c.signals[s.next_light].stop_line_m - s.x;
        const double to_stop = s.v > 0.0 ? 2.0 * d / s.v : 0.0;
        if (to_stop <= h) {
            h = to_stop;
            lands_on_line = true;
        }
    } else if (a < 0.0 && s.v > 0.0) {
        const double to_stop = s.v / -a;
        if (to_stop <= h) {
            h = to_stop;
            stops = true;
        }
    }

    double x_new = s.x + s.v * h + 0.5 * a * h * h;
    double v_new = s.v + a * h;
    if (lands_on_line) {
        x_new = c.signals[s.next_light].stop_line_m;
        v_new = 0.0;
    } else if (stops) {
        v_new = 0.0;
    } else if (hits_cap) {
        v_new = limit;
    }

    bool exits = false;
    if (x_new >= length - kPositionEps) {
        const double h_exit = kinematics::time_to_cover(s.v, a, length - s.x);
        if (h_exit <= h) {
            h = h_exit;
            x_new = length;
            v_new = std::max(0.0, s.v + a * h);
            if (hits_cap && std::abs(v_new - limit) < 1e-9) {
                v_new = limit;
            }
            exits = true;
        }
    }

    if (s.next_light < c.signals.size()) {
        const double line = c.signals[s.next_light].stop_line_m;
        if (s.x <= line && x_new > line + kPositionEps) {
            const double h_cross = kinematics::time_to_cover(s.v, a, line - s.x);
            if (!crossing_allowed(c, s.next_light, s.t + h_cross)) {
                return false;
            }
            ++s.next_light;
        }
    }

    s.t += h;
    s.x = exits ? length : x_new;
    s.v = std::clamp(v_new, 0.0, limit);
    traj.push(s.t, s.x, s.v);
    return true;
}

}  // namespace detail

/// Simulates the regular driver through the corridor, entering at the speed
/// limit at t = 0.
///
/// The driver brakes at a = -v^2 / (2 d) (stopping exactly on the line) once
/// a light that requires stopping is within sight, waits out the red, then
/// accelerates at `accel_max_m_s2` back to the limit. The look-ahead is never
/// shorter than the distance needed to stop within `decel_min_m_s2`, so every
/// stop stays inside the acceleration bounds.
inline Trajectory simulate_regular(const Corridor& c, const VehicleParams& vehicle, const RegularDriverRules& r = {})
{
    c.validate();
    vehicle.validate();
    r.validate();

    Trajectory traj;
    detail::LoopState s{0.0, 0.0, c.speed_limit_m_s, 0};
    traj.push(s.t, s.x, s.v);
    const double limit = c.speed_limit_m_s;
    const double length = c.length();
    const double decel_abs = -r.decel_min_m_s2;
    bool noted_extended_sight = false;

    std::size_t guard = 0;
    const std::size_t max_steps = 10'000'000;
    while (s.x < length - detail::kPositionEps) {
        if (++guard > max_steps) {
            throw std::runtime_error("simulate_regular: step limit exceeded");
        }
        detail::StepPlan plan;
        plan.accel = s.v < limit ? r.accel_max_m_s2 : 0.0;

        if (s.next_light < c.signals.size()) {
            const auto& sig = c.signals[s.next_light];
            const double d = sig.stop_line_m - s.x;
            if (d <= detail::kPositionEps && s.v <= 0.0) {
                if (phase_at(sig, s.t) == Phase::Red) {
                    s.t = next_green_onset(sig, s.t);
                    s.x = sig.stop_line_m;
                    traj.push(s.t, s.x, 0.0);
                    continue;
                }
            } else if (d > detail::kPositionEps && kinematics::stop_required(sig, s.t, d, s.v)) {
                const double trigger = kinematics::braking_trigger_distance(s.v, decel_abs, r.timestep_s);
                if (d <= std::max(r.sight_distance_m, trigger)) {
                    if (d > r.sight_distance_m && !noted_extended_sight) {
                        traj.diagnostics.push_back("braking started beyond sight distance to respect decel limit");
                        noted_extended_sight = true;
                    }
                    plan.accel = -s.v * s.v / (2.0 * d);
                    plan.brake_to_line = s.v > 0.0;
                    if (plan.accel < r.decel_min_m_s2 - 1e-9) {
                        traj.emergency_stop = true;
                        traj.diagnostics.push_back("emergency stop: required deceleration exceeds decel_min at t="
                                                   + std::to_string(s.t));
                    }
                }
            }
        }

        if (!detail::advance(s, plan, r.timestep_s, c, traj)) {
            // The light could not be cleared before red; stop on the line regardless of comfort.
            const double d = c.signals[s.next_light].stop_line_m - s.x;
            detail::StepPlan brake{-s.v * s.v / (2.0 * std::max(d, detail::kPositionEps)), true};
            traj.emergency_stop = true;
            traj.diagnostics.push_back("emergency stop at light " + std::to_string(s.next_light) + " at t="
                                       + std::to_string(s.t));
            if (!detail::advance(s, brake, r.timestep_s, c, traj)) {
                throw std::logic_error("simulate_regular: cannot avoid red crossing");
            }
        }
    }
    return traj;
}

}  // namespace ecodrive
