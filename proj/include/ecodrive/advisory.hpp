#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ecodrive/baseline_driver.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/errors.hpp"
#include "ecodrive/kinematics.hpp"
#include "ecodrive/powertrain.hpp"
#include "ecodrive/trajectory.hpp"

namespace ecodrive {

/// Settings of the rule-based speed advisory.
struct AdvisoryConfig {
    double update_rate_hz = 1.0;
    double min_cruise_m_s = 4.5;
    std::size_t lookahead_lights = 2;
    double speed_limit_m_s = 88.5 / 3.6;
    // Extra distance added to the stopping distance before the safety override engages.
    double override_margin_m = 2.0;

    void validate() const
    {
        if (!(update_rate_hz > 0.0)) {
            throw ParameterError("advisory.update_rate_hz must be positive");
        }
        if (!(speed_limit_m_s > 0.0)) {
            throw ParameterError("advisory.speed_limit_m_s must be positive");
        }
        if (!(min_cruise_m_s > 0.0 && min_cruise_m_s < speed_limit_m_s)) {
            throw ParameterError("advisory.min_cruise_m_s must be in (0, speed_limit)");
        }
        if (lookahead_lights < 1 || lookahead_lights > 2) {
            throw ParameterError("advisory.lookahead_lights must be 1 or 2");
        }
        if (!(override_margin_m >= 0.0)) {
            throw ParameterError("advisory.override_margin_m must be non-negative");
        }
    }
};

/// How a human driver follows the advisory.
struct DriverFollowingModel {
    double reaction_delay_s = 1.0;
    double speed_tracking_time_constant_s = 2.0;
    double low_speed_drift_m_s = 0.5;
    double drift_below_m_s = 10.0;

    void validate() const
    {
        if (!(reaction_delay_s >= 0.0)) {
            throw ParameterError("driver_following.reaction_delay_s must be non-negative");
        }
        if (!(speed_tracking_time_constant_s >= 0.0)) {
            throw ParameterError("driver_following.speed_tracking_time_constant_s must be non-negative");
        }
        if (!std::isfinite(low_speed_drift_m_s)) {
            throw ParameterError("driver_following.low_speed_drift_m_s must be finite");
        }
    }

    /// Perfect follower: no delay, instant tracking, no drift.
    static DriverFollowingModel ideal() { return DriverFollowingModel{0.0, 0.0, 0.0, 10.0}; }
};

enum class Action { Accelerate, Cruise, Brake };

inline const char* to_string(Action a)
{
    switch (a) {
    case Action::Accelerate: return "accelerate";
    case Action::Cruise: return "cruise";
    case Action::Brake: return "brake";
    }
    return "unknown";
}

struct Advisory {
    double target_speed_m_s = 0.0;
    Action action = Action::Cruise;
};

namespace detail {

inline constexpr double kActionDeadband = 0.5;

// Time to cover d starting at v while accelerating at a up to vmax.
inline double best_case_arrival(double d, double v, double a, double vmax)
{
    if (d <= 0.0) {
        return 0.0;
    }
    if (v >= vmax) {
        return d / vmax;
    }
    const double d_acc = (vmax * vmax - v * v) / (2.0 * a);
    if (d <= d_acc) {
        return kinematics::time_to_cover(v, a, d);
    }
    return (vmax - v) / a + (d - d_acc) / vmax;
}

struct LightRule {
    double target = 0.0;
    bool free_pass = false;  // the light can be cleared at the limit
    double arrival_t = 0.0;  // projected arrival when cruising at target
};

// Single-light rule: go at the limit if the light can be cleared before red,
// otherwise cruise at the speed that arrives at the next green onset.
inline LightRule light_rule(const SignalSchedule& sig, double d, double v, double t, double limit, double min_cruise,
                            double accel)
{
    LightRule out;
    const double t_red = phase_at(sig, t) == Phase::Green ? next_red_onset(sig, t) : t;
    const double arrival_fast = t + best_case_arrival(d, v, accel, limit);
    if (phase_at(sig, t) == Phase::Green && arrival_fast < t_red) {
        out.target = limit;
        out.free_pass = true;
        out.arrival_t = arrival_fast;
        return out;
    }
    const double t_g = next_green_onset(sig, phase_at(sig, t) == Phase::Green ? t_red : t);
    out.target = std::clamp(d / std::max(t_g - t, 1e-9), min_cruise, limit);
    out.arrival_t = std::max(t + d / out.target, t_g);
    return out;
}

inline Action classify(double target, double v)
{
    if (target > v + kActionDeadband) {
        return Action::Accelerate;
    }
    if (target < v - kActionDeadband) {
        return Action::Brake;
    }
    return Action::Cruise;
}

}  // namespace detail

/// Speed recommendation for a vehicle at x (m from zone entry), speed v, time t.
///
/// If the nearest unpassed light is green and can be cleared by accelerating
/// to the limit, the advice is the limit; otherwise it is the cruise speed that
/// reaches the line at its next green onset, clamped to [min_cruise, limit].
/// With two-light lookahead the second light is handled the same way from
/// the projected state at the first, and a slower common cruise is preferred
/// when it still clears the first light on green.
inline Advisory recommend(double x, double v, double t, const Corridor& c, const AdvisoryConfig& cfg,
                          double accel_max = 2.0)
{
    cfg.validate();
    if (!(x >= 0.0 && x <= c.length() + 1e-9)) {
        throw ParameterError("recommend: position outside the corridor");
    }
    const double limit = std::min(cfg.speed_limit_m_s, c.speed_limit_m_s);
    std::size_t k = 0;
    while (k < c.signals.size() && c.signals[k].stop_line_m <= x + 1e-9) {
        ++k;
    }
    Advisory out;
    if (k >= c.signals.size()) {
        out.target_speed_m_s = limit;
        out.action = detail::classify(limit, v);
        return out;
    }

    const auto& first = c.signals[k];
    const double d1 = first.stop_line_m - x;
    const auto r1 = detail::light_rule(first, d1, v, t, limit, cfg.min_cruise_m_s, accel_max);
    double target = r1.target;

    if (cfg.lookahead_lights >= 2 && k + 1 < c.signals.size()) {
        const auto& second = c.signals[k + 1];
        const double d2 = second.stop_line_m - first.stop_line_m;
        const auto r2 = detail::light_rule(second, d2, r1.target, r1.arrival_t, limit, cfg.min_cruise_m_s, accel_max);
        if (!r2.free_pass) {
            // One steady speed for both lights, if it still meets the first on green.
            const double t_g2 = r2.arrival_t;
            const double common = std::clamp((d1 + d2) / std::max(t_g2 - t, 1e-9), cfg.min_cruise_m_s, limit);
            if (common < target && crossing_allowed(c, k, t + d1 / common)) {
                target = common;
            }
        }
    }
    out.target_speed_m_s = target;
    out.action = detail::classify(target, v);
    return out;
}

/// One issued recommendation.
struct RecommendationRecord {
    double t_s = 0.0;
    double x_m = 0.0;
    double v_m_s = 0.0;
    Action action = Action::Cruise;
    double target_m_s = 0.0;
};

struct AdvisedRun {
    Trajectory trajectory;
    std::vector<RecommendationRecord> log;
    std::size_t override_count = 0;
};

/// Closed-loop simulation of a driver following the advisory.
///
/// Recommendations are issued at the update rate and reach the driver after
/// the reaction delay. The driver tracks the target with first-order
/// dynamics (plus a bias when the target is slow), clamped to the rule
/// acceleration bounds. A safety override brakes onto the line whenever the
/// vehicle would otherwise reach a red light and is within stopping distance.
inline AdvisedRun simulate_advised_driver(const Corridor& c, const VehicleParams& vehicle,
                                          const DriverFollowingModel& d, const AdvisoryConfig& cfg,
                                          const RegularDriverRules& r = {})
{
    c.validate();
    vehicle.validate();
    d.validate();
    cfg.validate();
    r.validate();

    AdvisedRun run;
    auto& traj = run.trajectory;
    const double limit = c.speed_limit_m_s;
    const double length = c.length();
    const double period = 1.0 / cfg.update_rate_hz;
    const double decel_abs = -r.decel_min_m_s2;

    detail::LoopState s{0.0, 0.0, limit, 0};
    traj.push(s.t, s.x, s.v);

    std::deque<RecommendationRecord> pending;
    double current_target = limit;
    std::size_t issued = 0;
    std::optional<std::size_t> override_light;

    std::size_t guard = 0;
    while (s.x < length - detail::kPositionEps) {
        if (++guard > 10'000'000) {
            throw std::runtime_error("simulate_advised_driver: step limit exceeded");
        }
        if (s.t >= static_cast<double>(issued) * period - 1e-9) {
            const auto adv = recommend(s.x, s.v, s.t, c, cfg, r.accel_max_m_s2);
            RecommendationRecord rec{s.t, s.x, s.v, adv.action, adv.target_speed_m_s};
            run.log.push_back(rec);
            pending.push_back(rec);
            ++issued;
        }
        while (!pending.empty() && pending.front().t_s <= s.t - d.reaction_delay_s + 1e-9) {
            current_target = pending.front().target_m_s;
            pending.pop_front();
        }

        // Time until the next event that changes the driver's inputs.
        double h = r.timestep_s;
        h = std::min(h, std::max(static_cast<double>(issued) * period - s.t, 1e-6));
        if (!pending.empty()) {
            h = std::min(h, std::max(pending.front().t_s + d.reaction_delay_s - s.t, 1e-6));
        }

        detail::StepPlan plan;
        double goal = current_target;
        if (goal < d.drift_below_m_s) {
            goal += d.low_speed_drift_m_s;
        }
        goal = std::clamp(goal, 0.0, limit);
        const double tau = d.speed_tracking_time_constant_s;
        plan.accel = (goal - s.v) / std::max(tau, h);
        plan.accel = std::clamp(plan.accel, r.decel_min_m_s2, r.accel_max_m_s2);
        if (s.v >= limit && plan.accel > 0.0) {
            plan.accel = 0.0;
        }

        if (s.next_light < c.signals.size()) {
            const auto& sig = c.signals[s.next_light];
            const double dist = sig.stop_line_m - s.x;
            const bool at_line = dist <= detail::kPositionEps;
            if (at_line && s.v <= 0.0) {
                if (phase_at(sig, s.t) == Phase::Red) {
                    plan.accel = 0.0;
                    override_light = s.next_light;
                    h = std::min(h, std::max(next_green_onset(sig, s.t) - s.t, 1e-6));
                } else {
                    override_light.reset();
                }
            } else if (!at_line) {
                const double predicted = s.t + dist / std::max(s.v, 0.1);
                const bool red_on_arrival = !crossing_allowed(c, s.next_light, predicted);
                const double reach = kinematics::braking_trigger_distance(s.v, decel_abs, r.timestep_s)
                                     + cfg.override_margin_m;
                if (override_light == s.next_light && !kinematics::stop_required(sig, s.t, dist, s.v)) {
                    override_light.reset();
                }
                if (!override_light && red_on_arrival && dist <= reach) {
                    override_light = s.next_light;
                    ++run.override_count;
                }
                if (override_light == s.next_light) {
                    plan.accel = -s.v * s.v / (2.0 * dist);
                    plan.brake_to_line = s.v > 0.0;
                    if (plan.accel < r.decel_min_m_s2 - 1e-9) {
                        traj.emergency_stop = true;
                        traj.diagnostics.push_back("override needed more than decel_min at t=" + std::to_string(s.t));
                    }
                }
            }
        }

        if (!detail::advance(s, plan, h, c, traj)) {
            const double dist = c.signals[s.next_light].stop_line_m - s.x;
            detail::StepPlan brake{-s.v * s.v / (2.0 * std::max(dist, detail::kPositionEps)), true};
            traj.emergency_stop = true;
            traj.diagnostics.push_back("emergency stop at light " + std::to_string(s.next_light) + " at t="
                                       + std::to_string(s.t));
            override_light = s.next_light;
            if (!detail::advance(s, brake, h, c, traj)) {
                throw std::logic_error("simulate_advised_driver: cannot avoid red crossing");
            }
        }
    }
    return run;
}

inline constexpr const char* kRecommendationCsvHeader = "t_s,x_m,v_m_s,action,target_m_s";

inline void write_recommendation_csv(std::ostream& out, const std::vector<RecommendationRecord>& log)
{
    out << kRecommendationCsvHeader << '\n';
    char buf[160];
    for (const auto& r : log) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.5f,%s,%.5f\n", r.t_s, r.x_m, r.v_m_s, to_string(r.action),
                      r.target_m_s);
        out << buf;
    }
}

inline void write_recommendation_csv(const std::string& path, const std::vector<RecommendationRecord>& log)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    write_recommendation_csv(out, log);
}

}  // namespace ecodrive
