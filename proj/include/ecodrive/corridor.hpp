#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ecodrive/errors.hpp"

namespace ecodrive {

enum class Phase { Green, Red };

inline const char* to_string(Phase p) { return p == Phase::Green ? "green" : "red"; }

/// Fixed-time red/green signal. Red occupies [time_to_red + k*period,
/// time_to_red + red + k*period) for every integer k, including negative k.
struct SignalSchedule {
    double stop_line_m = 0.0;
    double time_to_red_s = 0.0;
    double red_s = 30.0;
    double green_s = 30.0;

    double period() const { return red_s + green_s; }

    void validate() const
    {
        if (!(red_s > 0.0) || !(green_s > 0.0) || !std::isfinite(time_to_red_s)) {
            throw ParameterError("signal red/green durations must be positive");
        }
    }
};

namespace detail {

// Offset of t within the current cycle, measured from the start of red.
inline double cycle_offset(const SignalSchedule& sig, double t)
{
    const double period = sig.period();
    const double u = t - sig.time_to_red_s;
    double r = u - std::floor(u / period) * period;
    if (r >= period) {
        r -= period;
    }
    return r < 0.0 ? 0.0 : r;
}

}  // namespace detail

inline Phase phase_at(const SignalSchedule& sig, double t)
{
    return detail::cycle_offset(sig, t) < sig.red_s ? Phase::Red : Phase::Green;
}

namespace detail {

// Rounding in t + (boundary - offset) can land a hair before the phase change.
inline double settle_on(const SignalSchedule& sig, double t, Phase want)
{
    for (int i = 0; i < 64 && phase_at(sig, t) != want; ++i) {
        t = std::nextafter(t, std::numeric_limits<double>::infinity());
    }
    return t;
}

}  // namespace detail

/// Smallest t' >= t at which the light shows green.
inline double next_green_onset(const SignalSchedule& sig, double t)
{
    const double r = detail::cycle_offset(sig, t);
    if (r >= sig.red_s) {
        return t;
    }
    return detail::settle_on(sig, t + (sig.red_s - r), Phase::Green);
}

/// Start of the next red interval at or after t; t itself while already red.
inline double next_red_onset(const SignalSchedule& sig, double t)
{
    const double r = detail::cycle_offset(sig, t);
    if (r < sig.red_s) {
        return t;
    }
    return detail::settle_on(sig, t + (sig.period() - r), Phase::Red);
}

/// Piecewise-constant road grade; each entry holds from `from_m` to the next entry.
struct GradeSegment {
    double from_m = 0.0;
    double grade = 0.0;
};

struct GradeProfile {
    std::vector<GradeSegment> segments;

    double at(double x_m) const
    {
        double g = 0.0;
        for (const auto& s : segments) {
            if (s.from_m <= x_m) {
                g = s.grade;
            } else {
                break;
            }
        }
        return g;
    }

    bool flat() const
    {
        for (const auto& s : segments) {
            if (s.grade != 0.0) {
                return false;
            }
        }
        return true;
    }
};

/// Control zone: entry buffer, first light, spacing, second light, exit buffer.
struct Corridor {
    double entry_buffer_m = 100.0;
    double light_spacing_m = 400.0;
    double exit_buffer_m = 100.0;
    double speed_limit_m_s = 88.5 / 3.6;
    GradeProfile grade_profile;
    std::array<SignalSchedule, 2> signals{};

    double length() const { return entry_buffer_m + light_spacing_m + exit_buffer_m; }

    /// Places both stop lines from the buffer geometry and validates.
    static Corridor make(double entry_m, double spacing_m, double exit_m, double speed_limit_m_s,
                         SignalSchedule first, SignalSchedule second)
    {
        Corridor c;
        c.entry_buffer_m = entry_m;
        c.light_spacing_m = spacing_m;
        c.exit_buffer_m = exit_m;
        c.speed_limit_m_s = speed_limit_m_s;
        first.stop_line_m = entry_m;
        second.stop_line_m = entry_m + spacing_m;
        c.signals = {first, second};
        c.validate();
        return c;
    }

    /// Two 30/30 s lights with the given time-to-red offsets.
    static Corridor with_timing(double spacing_m, double first_time_to_red, double second_time_to_red,
                                double exit_m = 100.0)
    {
        return make(100.0, spacing_m, exit_m, 88.5 / 3.6,
                    SignalSchedule{0.0, first_time_to_red, 30.0, 30.0},
                    SignalSchedule{0.0, second_time_to_red, 30.0, 30.0});
    }

    void validate() const
    {
        if (!(entry_buffer_m > 0.0) || !(light_spacing_m > 0.0) || !(exit_buffer_m > 0.0)) {
            throw ParameterError("corridor buffers and spacing must be positive");
        }
        if (!(speed_limit_m_s > 0.0) || !std::isfinite(speed_limit_m_s)) {
            throw ParameterError("corridor speed limit must be positive");
        }
        for (const auto& s : signals) {
            s.validate();
            if (!(s.stop_line_m > 0.0 && s.stop_line_m < length())) {
                throw ParameterError("stop lines must lie strictly inside the corridor");
            }
        }
        if (signals[0].stop_line_m != entry_buffer_m || signals[1].stop_line_m != entry_buffer_m + light_spacing_m) {
            throw ParameterError("stop lines must sit at entry_buffer_m and entry_buffer_m + light_spacing_m");
        }
        for (std::size_t i = 1; i < grade_profile.segments.size(); ++i) {
            if (!(grade_profile.segments[i].from_m > grade_profile.segments[i - 1].from_m)) {
                throw ParameterError("grade profile must be sorted by distance");
            }
        }
    }
};

/// True iff a vehicle may pass the stop line of `light_index` at time t.
inline bool crossing_allowed(const Corridor& c, std::size_t light_index, double t)
{
    if (light_index >= c.signals.size()) {
        throw std::out_of_range("crossing_allowed: light index " + std::to_string(light_index) + " out of range");
    }
    return phase_at(c.signals[light_index], t) == Phase::Green;
}

}  // namespace ecodrive
