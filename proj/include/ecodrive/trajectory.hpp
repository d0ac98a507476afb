#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "ecodrive/errors.hpp"

namespace ecodrive {

/// One time-stamped state. `a_m_s2` and `p_batt_w` describe the segment that
/// starts at this sample; cumulative columns include everything up to it.
struct TrajectorySample {
    double t_s = 0.0;
    double x_m = 0.0;
    double v_m_s = 0.0;
    double a_m_s2 = 0.0;
    double p_batt_w = 0.0;
    double energy_j_cum = 0.0;
    double soh_delta_cum = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    // Free-form notes from the generator (e.g. an emergency stop was needed).
    std::vector<std::string> diagnostics;
    bool emergency_stop = false;

    bool empty() const { return samples.empty(); }

    double trip_time() const { return samples.empty() ? 0.0 : samples.back().t_s - samples.front().t_s; }

    void push(double t, double x, double v) { samples.push_back(TrajectorySample{t, x, v}); }
};

inline constexpr const char* kTrajectoryCsvHeader = "t_s,x_m,v_m_s,a_m_s2,p_batt_w,energy_j_cum,soh_delta_cum";

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << kTrajectoryCsvHeader << '\n';
    char buf[256];
    for (const auto& s : traj.samples) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.5f,%.5f,%.3f,%.3f,%.6e\n", s.t_s, s.x_m, s.v_m_s, s.a_m_s2,
                      s.p_batt_w, s.energy_j_cum, s.soh_delta_cum);
        out << buf;
    }
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    write_trajectory_csv(out, traj);
}

}  // namespace ecodrive
