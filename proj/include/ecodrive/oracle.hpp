#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ecodrive/dp_optimizer.hpp"

namespace ecodrive {

/// A small problem that exhaustive enumeration can solve: 50 m corridor,
/// 10 m stages, 5 speed bins up to 8 m/s, 0.625 s time bins, budget of at
/// most 24 bins, short random signal cycles and a random grade profile.
inline EcoProblem make_tiny_problem(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pick = [&](double lo, double hi, double step) {
        const auto n = static_cast<int>((hi - lo) / step + 0.5);
        return lo + step * std::uniform_int_distribution<int>(0, n)(rng);
    };

    EcoProblem p;
    SignalSchedule first{0.0, pick(-6.0, 6.0, 0.5), pick(1.0, 6.0, 0.5), pick(1.0, 6.0, 0.5)};
    SignalSchedule second{0.0, pick(-6.0, 6.0, 0.5), pick(1.0, 6.0, 0.5), pick(1.0, 6.0, 0.5)};
    if (unit(rng) < 0.25) {
        // Effectively always green within the budget.
        second.time_to_red_s = 100.0;
        second.green_s = 200.0;
    }
    p.corridor = Corridor::make(20.0, 20.0, 10.0, 8.0, first, second);
    for (double x : {0.0, 10.0, 20.0, 30.0, 40.0}) {
        if (unit(rng) < 0.4) {
            p.corridor.grade_profile.segments.push_back(GradeSegment{x, pick(-0.04, 0.04, 0.01)});
        }
    }
    p.rules.decel_min_m_s2 = pick(-4.0, -2.0, 0.5);
    p.grid.distance_step_m = 10.0;
    p.grid.speed_step_m_s = 2.0;
    p.grid.time_step_s = 0.625;
    p.grid.boundary_time_step_s = 0.625;
    p.grid.boundary_band_m_s = 1.0;
    p.grid.launch_speeds = false;
    p.grid.buffer_on_infeasible = false;
    p.time_budget_s = pick(6.25, 15.0, 0.625);
    return p;
}

struct OracleSummary {
    std::size_t instances = 0;
    std::size_t matches = 0;
    std::size_t feasible = 0;
    std::size_t paths_enumerated = 0;
    std::vector<std::string> mismatches;

    bool all_match() const { return instances > 0 && matches == instances; }
};

/// Checks the DP against brute force on `n` random tiny instances.
inline OracleSummary run_oracle_suite(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    OracleSummary s;
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = make_tiny_problem(rng);
        const auto rep = verify_against_enumeration(p);
        ++s.instances;
        s.paths_enumerated += rep.paths_enumerated;
        if (rep.dp_feasible) {
            ++s.feasible;
        }
        if (rep.matches()) {
            ++s.matches;
        } else {
            char buf[200];
            std::snprintf(buf, sizeof buf, "instance %zu: dp=%.17g brute=%.17g (feasible %d/%d)", i, rep.dp_total_usd,
                          rep.brute_total_usd, rep.dp_feasible ? 1 : 0, rep.brute_feasible ? 1 : 0);
            s.mismatches.emplace_back(buf);
        }
    }
    return s;
}

}  // namespace ecodrive
