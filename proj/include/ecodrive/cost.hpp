#pragma once

#include <cmath>
#include <cstddef>

#include "ecodrive/battery.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/powertrain.hpp"
#include "ecodrive/trajectory.hpp"

namespace ecodrive {

struct Prices {
    double electricity_usd_per_kwh = 0.12;
};

inline constexpr double kJoulePerKwh = 3.6e6;

/// Trip cost split into electricity and pack wear.
struct CostBreakdown {
    double electricity_usd = 0.0;
    double battery_usd = 0.0;
    double total_usd = 0.0;
    double trip_time_s = 0.0;
    double energy_kwh = 0.0;
    double soh_delta = 0.0;  // <= 0
};

/// Cost of one arc of a trajectory: either constant-acceleration motion over a
/// distance or a stationary wait.
struct ArcCost {
    double duration_s = 0.0;
    double energy_j = 0.0;
    double mean_power_w = 0.0;
    double accel_m_s2 = 0.0;
    double soh_delta = 0.0;
    double electricity_usd = 0.0;
    double battery_usd = 0.0;
    double total_usd = 0.0;
};

inline ArcCost price_arc(double duration_s, double mean_power_w, const BatteryModel& b, const Prices& prices)
{
    ArcCost arc;
    arc.duration_s = duration_s;
    arc.mean_power_w = mean_power_w;
    arc.energy_j = mean_power_w * duration_s;
    arc.soh_delta = soh_decay_rate(mean_power_w, b) * duration_s;
    arc.electricity_usd = prices.electricity_usd_per_kwh * arc.energy_j / kJoulePerKwh;
    arc.battery_usd = decay_cost_rate(mean_power_w, b) * duration_s;
    arc.total_usd = arc.electricity_usd + arc.battery_usd;
    return arc;
}

inline ArcCost motion_cost(double v_start, double v_end, double length_m, double grade, const VehicleParams& v,
                           const BatteryModel& b, const Prices& prices)
{
    const auto seg = segment_energy(KinematicSegment{v_start, v_end, length_m, grade}, v);
    ArcCost arc = price_arc(seg.duration_s, seg.mean_power_w, b, prices);
    arc.accel_m_s2 = seg.accel_m_s2;
    return arc;
}

inline ArcCost wait_cost(double duration_s, double idle_power_w, const BatteryModel& b, const Prices& prices)
{
    return price_arc(duration_s, idle_power_w, b, prices);
}

inline void accumulate(CostBreakdown& acc, const ArcCost& arc)
{
    acc.electricity_usd += arc.electricity_usd;
    acc.battery_usd += arc.battery_usd;
    acc.energy_kwh += arc.energy_j / kJoulePerKwh;
    acc.soh_delta += arc.soh_delta;
}

struct ConsistencyTolerance {
    // Allowed |dx - mean(v) * dt| per segment, as a fraction of dx plus an absolute slack.
    double relative = 0.12;
    double absolute_m = 0.05;
};

/// Checks ordering, sign and trapezoid consistency of a sample sequence.
/// Throws ValidationError naming the first offending sample.
inline void validate_trajectory(const Trajectory& traj, const ConsistencyTolerance& tol = {})
{
    const auto& s = traj.samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i].t_s) || !std::isfinite(s[i].x_m) || !std::isfinite(s[i].v_m_s)) {
            throw ValidationError(i, "non-finite value");
        }
        if (s[i].v_m_s < 0.0) {
            throw ValidationError(i, "negative speed");
        }
        if (i == 0) {
            continue;
        }
        const double dt = s[i].t_s - s[i - 1].t_s;
        const double dx = s[i].x_m - s[i - 1].x_m;
        if (dt < 0.0) {
            throw ValidationError(i, "time decreases");
        }
        if (dx < 0.0) {
            throw ValidationError(i, "position decreases");
        }
        if (dx == 0.0) {
            if (s[i].v_m_s != 0.0 || s[i - 1].v_m_s != 0.0) {
                if (dt > 0.0) {
                    throw ValidationError(i, "time passes at a fixed position while moving");
                }
            }
            continue;
        }
        if (s[i].v_m_s + s[i - 1].v_m_s <= 0.0) {
            throw ValidationError(i, "position advances at zero speed");
        }
        const double predicted = 0.5 * (s[i].v_m_s + s[i - 1].v_m_s) * dt;
        if (std::abs(predicted - dx) > tol.relative * dx + tol.absolute_m) {
            throw ValidationError(i, "distance inconsistent with speeds and time step");
        }
    }
}

namespace detail {

template <typename Visitor>
void for_each_arc(const Trajectory& traj, const GradeProfile& grade, double idle_power_w, const VehicleParams& v,
                  const BatteryModel& b, const Prices& prices, Visitor&& visit)
{
    const auto& s = traj.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double dx = s[i].x_m - s[i - 1].x_m;
        const double dt = s[i].t_s - s[i - 1].t_s;
        if (dx > 0.0) {
            const double g = grade.at(s[i - 1].x_m + 0.5 * dx);
            visit(i - 1, motion_cost(s[i - 1].v_m_s, s[i].v_m_s, dx, g, v, b, prices));
        } else if (dt > 0.0) {
            visit(i - 1, wait_cost(dt, idle_power_w, b, prices));
        } else {
            visit(i - 1, ArcCost{});
        }
    }
}

}  // namespace detail

/// Integrates electricity and pack-wear cost over a trajectory, arc by arc.
/// Moving arcs are priced as constant-acceleration segments between samples;
/// stationary arcs draw `idle_power_w`.
inline CostBreakdown evaluate_trajectory(const Trajectory& traj, const VehicleParams& v, const BatteryModel& b,
                                         const Prices& prices, const GradeProfile& grade = {},
                                         double idle_power_w = 0.0, const ConsistencyTolerance& tol = {})
{
    v.validate();
    b.validate();
    validate_trajectory(traj, tol);
    CostBreakdown out;
    detail::for_each_arc(traj, grade, idle_power_w, v, b, prices,
                         [&](std::size_t, const ArcCost& arc) { accumulate(out, arc); });
    out.total_usd = out.electricity_usd + out.battery_usd;
    out.trip_time_s = traj.trip_time();
    return out;
}

/// Fills the per-sample power, acceleration and cumulative energy/SOH columns.
inline void annotate_trajectory(Trajectory& traj, const VehicleParams& v, const BatteryModel& b,
                                const Prices& prices, const GradeProfile& grade = {}, double idle_power_w = 0.0)
{
    auto& s = traj.samples;
    if (s.empty()) {
        return;
    }
    s.front().energy_j_cum = 0.0;
    s.front().soh_delta_cum = 0.0;
    detail::for_each_arc(traj, grade, idle_power_w, v, b, prices, [&](std::size_t i, const ArcCost& arc) {
        s[i].a_m_s2 = arc.accel_m_s2;
        s[i].p_batt_w = arc.mean_power_w;
        s[i + 1].energy_j_cum = s[i].energy_j_cum + arc.energy_j;
        s[i + 1].soh_delta_cum = s[i].soh_delta_cum + arc.soh_delta;
    });
    s.back().a_m_s2 = 0.0;
    s.back().p_batt_w = 0.0;
}

}  // namespace ecodrive
