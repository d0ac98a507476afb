#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ecodrive/advisory.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/study.hpp"
#include "ecodrive/trajectory.hpp"

namespace ecodrive {

namespace detail {

inline std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Rounds first so that floating-point noise around zero prints as 0.00, not -0.00.
inline std::string pct_or_na(bool ok, double v)
{
    if (!ok || !std::isfinite(v)) {
        return "NA";
    }
    const double r = std::round(v * 100.0) / 100.0;
    return fmt("%.2f", r == 0.0 ? 0.0 : r);
}

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch != '\n' ? ch : ' ';
    }
    return out + '"';
}

inline void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

inline void make_dirs(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create directory " + dir.string());
    }
}

}  // namespace detail

/// Reduction table: one row per timing pair, one column per spacing, plus an
/// Average row recomputed from the cells.
inline std::string table2_csv(const SweepResult& r, const std::string& group)
{
    std::ostringstream out;
    out << "timing_x,timing_y";
    for (double s : r.spacings_m) {
        out << ',' << detail::fmt("%g", s);
    }
    out << '\n';
    if (r.timings.empty() || r.spacings_m.empty()) {
        return out.str();
    }
    for (const auto& t : r.timings) {
        out << detail::fmt("%g", t.first_s) << ',' << detail::fmt("%g", t.second_s);
        for (double s : r.spacings_m) {
            const auto* c = r.find(group, t, s);
            out << ',' << detail::pct_or_na(c && c->ok, c ? c->reduction_pct() : 0.0);
        }
        out << '\n';
    }
    out << "Average,";
    for (double s : r.spacings_m) {
        const double avg = r.column_average(group, s);
        out << ',' << detail::pct_or_na(true, avg);
    }
    out << '\n';
    return out.str();
}

/// Battery-size table: for each spacing, the regular and eco decay reductions.
inline std::string table3_csv(const SweepResult& r)
{
    std::ostringstream out;
    out << "timing_x,timing_y";
    for (double s : r.spacings_m) {
        out << ',' << detail::fmt("%g", s) << "_regular," << detail::fmt("%g", s) << "_eco";
    }
    out << '\n';
    if (r.table3.empty()) {
        return out.str();
    }
    std::vector<double> sum(2 * r.spacings_m.size(), 0.0);
    std::vector<std::size_t> n(2 * r.spacings_m.size(), 0);
    for (const auto& t : r.timings) {
        out << detail::fmt("%g", t.first_s) << ',' << detail::fmt("%g", t.second_s);
        for (std::size_t k = 0; k < r.spacings_m.size(); ++k) {
            const Table3Cell* cell = nullptr;
            for (const auto& c : r.table3) {
                if (c.timing == t && c.spacing_m == r.spacings_m[k]) {
                    cell = &c;
                }
            }
            const bool ok = cell && cell->ok;
            out << ',' << detail::pct_or_na(ok, ok ? cell->regular_pct : 0.0) << ','
                << detail::pct_or_na(ok, ok ? cell->eco_pct : 0.0);
            if (ok) {
                sum[2 * k] += cell->regular_pct;
                sum[2 * k + 1] += cell->eco_pct;
                ++n[2 * k];
                ++n[2 * k + 1];
            }
        }
        out << '\n';
    }
    out << "Average,";
    for (std::size_t k = 0; k < sum.size(); ++k) {
        out << ',' << detail::pct_or_na(n[k] > 0, n[k] ? sum[k] / static_cast<double>(n[k]) : 0.0);
    }
    out << '\n';
    return out.str();
}

inline constexpr const char* kCellsCsvHeader =
    "group,variant,decay_multiplier,timing_x,timing_y,spacing_m,status,"
    "regular_electricity_usd,regular_battery_usd,regular_total_usd,regular_trip_time_s,regular_energy_kwh,"
    "regular_soh_delta,eco_electricity_usd,eco_battery_usd,eco_total_usd,eco_trip_time_s,eco_energy_kwh,"
    "eco_soh_delta,reduction_pct,time_budget_s,budget_relaxed,error";

/// Full per-cell breakdown, in run order.
inline std::string cells_csv(const SweepResult& r)
{
    std::ostringstream out;
    out << kCellsCsvHeader << '\n';
    auto breakdown = [&](const CostBreakdown& c) {
        out << ',' << detail::fmt("%.8f", c.electricity_usd) << ',' << detail::fmt("%.8f", c.battery_usd) << ','
            << detail::fmt("%.8f", c.total_usd) << ',' << detail::fmt("%.4f", c.trip_time_s) << ','
            << detail::fmt("%.8f", c.energy_kwh) << ',' << detail::fmt("%.6e", c.soh_delta);
    };
    for (const auto& c : r.cells) {
        out << c.group << ',' << c.variant << ',' << detail::fmt("%g", c.decay_multiplier) << ','
            << detail::fmt("%g", c.timing.first_s) << ',' << detail::fmt("%g", c.timing.second_s) << ','
            << detail::fmt("%g", c.spacing_m) << ',' << (c.ok ? "ok" : "failed");
        if (c.ok) {
            breakdown(c.record.regular_cost);
            breakdown(c.record.eco_cost);
            out << ',' << detail::fmt("%.6f", c.reduction_pct()) << ',' << detail::fmt("%.4f", c.record.time_budget_s)
                << ',' << (c.record.budget_relaxed ? 1 : 0) << ',';
        } else {
            out << ",,,,,,,,,,,,,,,0," << detail::csv_escape(c.error);
        }
        out << '\n';
    }
    return out.str();
}

namespace detail {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<double> hlines;  // e.g. stop-line positions on a distance axis
};

// Step of 1, 2 or 5 times a power of ten giving about `target` intervals.
inline double nice_step(double span, int target)
{
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

// Widens [lo, hi] to whole multiples of a nice step; returns the step.
inline double nice_range(double& lo, double& hi)
{
    if (!(hi > lo)) {
        hi = lo + 1.0;
    }
    const double step = nice_step(hi - lo, 4);
    lo = std::floor(lo / step + 1e-9) * step;
    hi = std::ceil(hi / step - 1e-9) * step;
    return step;
}

inline void render_panel(std::ostringstream& out, const Panel& p, double ox, double oy, double w, double h)
{
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;
    bool first = true;
    for (const auto& s : p.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    for (double v : p.hlines) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    const double xstep = nice_range(xmin, xmax);
    const double ystep = nice_range(ymin, ymax);
    const double left = 60.0;
    const double bottom = 40.0;
    const double top = 24.0;
    const double pw = w - left - 16.0;
    const double ph = h - bottom - top;
    auto sx = [&](double v) { return ox + left + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return oy + top + ph - (v - ymin) / (ymax - ymin) * ph; };

    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"#444\"/>\n",
                  ox + left, oy + top, pw, ph);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">%s</text>\n",
                  ox + left + pw / 2, oy + 16.0, p.title.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%s</text>\n",
                  ox + left + pw / 2, oy + h - 6.0, p.x_label.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 %.2f %.2f)\">%s</text>\n",
                  ox + 14.0, oy + top + ph / 2, ox + 14.0, oy + top + ph / 2, p.y_label.c_str());
    out << buf;
    for (double xv = xmin; xv <= xmax + 0.5 * xstep; xv += xstep) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"middle\">%g</text>\n", sx(xv),
                      oy + top + ph + 14.0, std::abs(xv) < 1e-9 * xstep ? 0.0 : xv);
        out << buf;
    }
    for (double yv = ymin; yv <= ymax + 0.5 * ystep; yv += ystep) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"end\">%g</text>\n",
                      ox + left - 4.0, sy(yv) + 3.0, std::abs(yv) < 1e-9 * ystep ? 0.0 : yv);
        out << buf;
    }
    for (double v : p.hlines) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbb\" stroke-width=\"1\"/>\n",
                      ox + left, sy(v), ox + left + pw, sy(v));
        out << buf;
    }
    for (const auto& s : p.series) {
        if (s.x.empty()) {
            continue;
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", sx(s.x[i]), sy(s.y[i]));
            out << buf;
        }
        out << "\"/>\n";
    }
}

}  // namespace detail

/// Four panels against time: distance, speed, cumulative energy, cumulative
/// SOH decay. The first trajectory is drawn solid, the second dashed.
inline std::string trajectory_svg(const std::string& title, const Trajectory& solid, const std::string& solid_name,
                                  const Trajectory& dashed, const std::string& dashed_name, const Corridor& c)
{
    const double w = 900.0;
    const double h = 640.0;
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  w, h + 40.0, w, h + 40.0);
    out << buf;
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"20\" font-size=\"15\" text-anchor=\"middle\">%s</text>\n",
                  w / 2, title.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"36\" font-size=\"11\" text-anchor=\"middle\">solid: %s, dashed: %s</text>\n",
                  w / 2, solid_name.c_str(), dashed_name.c_str());
    out << buf;

    auto series = [](const Trajectory& t, int which, const char* color, bool dashed) {
        detail::Series s;
        s.color = color;
        s.dashed = dashed;
        for (const auto& p : t.samples) {
            s.x.push_back(p.t_s);
            switch (which) {
            case 0: s.y.push_back(p.x_m); break;
            case 1: s.y.push_back(p.v_m_s * 3.6); break;
            case 2: s.y.push_back(p.energy_j_cum / 1000.0); break;
            default: s.y.push_back(-p.soh_delta_cum * 1e6); break;
            }
        }
        return s;
    };
    const char* titles[4] = {"(a) distance", "(b) speed", "(c) energy", "(d) capacity decay"};
    const char* ylabels[4] = {"x [m]", "v [km/h]", "battery energy [kJ]", "SOH loss [ppm]"};
    for (int k = 0; k < 4; ++k) {
        detail::Panel p;
        p.title = titles[k];
        p.x_label = "t [s]";
        p.y_label = ylabels[k];
        p.series.push_back(series(solid, k, "#1f77b4", false));
        p.series.push_back(series(dashed, k, "#d62728", true));
        if (k == 0) {
            for (const auto& s : c.signals) {
                p.hlines.push_back(s.stop_line_m);
            }
        }
        detail::render_panel(out, p, (k % 2) * w / 2, 40.0 + (k / 2) * h / 2, w / 2, h / 2);
    }
    out << "</svg>\n";
    return out.str();
}

inline std::string trajectory_csv(const Trajectory& t)
{
    std::ostringstream out;
    write_trajectory_csv(out, t);
    return out.str();
}

/// Output directory of one sweep group: the root when only one group ran.
inline std::filesystem::path group_dir(const SweepResult& r, const std::filesystem::path& root,
                                       const std::string& group)
{
    return r.groups.size() <= 1 ? root : root / group;
}

/// Writes one scenario's trajectory CSVs (regular/ and eco/) and its SVG.
inline void write_scenario_files(const ScenarioRecord& rec, const std::filesystem::path& dir)
{
    detail::make_dirs(dir / "regular");
    detail::make_dirs(dir / "eco");
    const std::string base = rec.spec.label;
    detail::write_file(dir / "regular" / (base + ".csv"), trajectory_csv(rec.regular));
    detail::write_file(dir / "eco" / (base + ".csv"), trajectory_csv(rec.eco));
    char title[160];
    std::snprintf(title, sizeof title, "[%g %g], s = %g m: %.1f%% cost reduction", rec.spec.timing.first_s,
                  rec.spec.timing.second_s, rec.spec.spacing_m(), rec.reduction_pct);
    detail::write_file(dir / (base + ".svg"),
                       trajectory_svg(title, rec.eco, "eco-driver", rec.regular, "regular driver", rec.spec.corridor));
}

/// Writes table2.csv (per group), table3.csv, cells.csv and every scenario's
/// trajectories and plot under `out_dir`.
inline void render_reports(const SweepResult& r, const std::filesystem::path& out_dir)
{
    detail::make_dirs(out_dir);
    if (r.groups.empty()) {
        detail::write_file(out_dir / "table2.csv", table2_csv(r, ""));
    }
    for (const auto& g : r.groups) {
        const auto dir = group_dir(r, out_dir, g);
        detail::make_dirs(dir);
        detail::write_file(dir / "table2.csv", table2_csv(r, g));
    }
    detail::write_file(out_dir / "table3.csv", table3_csv(r));
    detail::write_file(out_dir / "cells.csv", cells_csv(r));
    for (const auto& c : r.cells) {
        if (c.ok) {
            write_scenario_files(c.record, group_dir(r, out_dir, c.group));
        }
    }
}

/// Files of an advisory comparison run.
inline void render_advisory(const AdvisoryComparison& a, const Corridor& c, const std::filesystem::path& out_dir)
{
    detail::make_dirs(out_dir);
    detail::write_file(out_dir / "regular.csv", trajectory_csv(a.regular));
    detail::write_file(out_dir / "advised.csv", trajectory_csv(a.advised.trajectory));
    std::ostringstream log;
    write_recommendation_csv(log, a.advised.log);
    detail::write_file(out_dir / "recommendations.csv", log.str());
    std::ostringstream s;
    s << "driver,electricity_usd,battery_usd,total_usd,trip_time_s,energy_kwh,soh_delta\n";
    auto row = [&](const char* name, const CostBreakdown& b) {
        s << name << ',' << detail::fmt("%.8f", b.electricity_usd) << ',' << detail::fmt("%.8f", b.battery_usd) << ','
          << detail::fmt("%.8f", b.total_usd) << ',' << detail::fmt("%.4f", b.trip_time_s) << ','
          << detail::fmt("%.8f", b.energy_kwh) << ',' << detail::fmt("%.6e", b.soh_delta) << '\n';
    };
    row("regular", a.regular_cost);
    row("advised", a.advised_cost);
    detail::write_file(out_dir / "advisory_summary.csv", s.str());
    char title[160];
    std::snprintf(title, sizeof title, "advisory field scenario: %.1f%% cost reduction", a.reduction_pct());
    detail::write_file(out_dir / "advisory.svg",
                       trajectory_svg(title, a.advised.trajectory, "advised driver", a.regular, "regular driver", c));
}

}  // namespace ecodrive
