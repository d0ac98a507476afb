#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ecodrive/advisory.hpp"
#include "ecodrive/baseline_driver.hpp"
#include "ecodrive/battery.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/cost.hpp"
#include "ecodrive/dp_optimizer.hpp"
#include "ecodrive/errors.hpp"
#include "ecodrive/powertrain.hpp"

namespace ecodrive {

/// Battery size / vehicle mass pairing.
struct VehicleVariant {
    std::string name = "standard";
    double capacity_kwh = 54.0;
    double mass_kg = 1611.0;
};

inline std::vector<VehicleVariant> default_variants()
{
    return {VehicleVariant{"standard", 54.0, 1611.0}, VehicleVariant{"long_range", 75.0, 1726.0}};
}

struct Timing {
    double first_s = 0.0;
    double second_s = 0.0;

    friend bool operator==(const Timing&, const Timing&) = default;
};

struct Table3Config {
    bool enabled = false;
    double decay_multiplier = 10.0;
    std::string small_variant = "standard";
    std::string large_variant = "long_range";
};

struct SweepConfig {
    std::vector<Timing> timings;
    std::vector<double> spacings_m{200.0, 400.0, 600.0, 800.0};
    std::vector<VehicleVariant> variants = default_variants();
    std::vector<std::string> sweep_variants{"standard"};
    std::vector<double> decay_multipliers{1.0};
    Table3Config table3;

    SweepConfig()
    {
        for (double x : {-30.0, -15.0, 0.0, 15.0}) {
            for (double y : {-30.0, -15.0, 0.0, 15.0}) {
                timings.push_back(Timing{x, y});
            }
        }
    }

    const VehicleVariant& variant(const std::string& name) const
    {
        for (const auto& v : variants) {
            if (v.name == name) {
                return v;
            }
        }
        throw ConfigError("unknown vehicle variant '" + name + "'");
    }
};

/// Everything a study run needs; every field has the documented default.
struct StudyConfig {
    VehicleParams vehicle;
    BatteryModel battery;
    Prices prices;
    Corridor corridor = Corridor::with_timing(400.0, 15.0, 15.0, 100.0);
    RegularDriverRules driver;
    DpGridSpec grid;
    AdvisoryConfig advisory;
    DriverFollowingModel driver_following;
    SweepConfig sweep;
    std::string variant = "standard";

    void validate() const
    {
        vehicle.validate();
        battery.validate();
        corridor.validate();
        driver.validate();
        grid.validate();
        advisory.validate();
        driver_following.validate();
        if (!(prices.electricity_usd_per_kwh >= 0.0)) {
            throw ParameterError("prices.electricity_usd_per_kwh must be non-negative");
        }
        for (double s : sweep.spacings_m) {
            if (!(s > 0.0)) {
                throw ParameterError("sweep.spacings_m must be positive");
            }
        }
        for (double m : sweep.decay_multipliers) {
            if (!(m > 0.0)) {
                throw ParameterError("sweep.decay_multipliers must be positive");
            }
        }
        for (const auto& name : sweep.sweep_variants) {
            (void)sweep.variant(name);
        }
        if (sweep.table3.enabled) {
            (void)sweep.variant(sweep.table3.small_variant);
            (void)sweep.variant(sweep.table3.large_variant);
        }
    }
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, const std::string& block, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) {
        throw ConfigError("'" + block + "' must be an object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) {
            throw ConfigError("unknown key '" + it.key() + "' in '" + block + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& block)
{
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + block + "." + key + "'");
    }
}

inline SignalSchedule parse_signal(const json& j, const std::string& block)
{
    check_keys(j, block, {"time_to_red_s", "red_s", "green_s"});
    SignalSchedule s;
    read(j, "time_to_red_s", s.time_to_red_s, block);
    read(j, "red_s", s.red_s, block);
    read(j, "green_s", s.green_s, block);
    return s;
}

inline std::vector<double> number_list(const json& j, const std::string& block)
{
    if (!j.is_array()) {
        throw ConfigError("'" + block + "' must be an array");
    }
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw ConfigError("'" + block + "' must contain numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace detail

/// Builds a StudyConfig from a JSON document. Relative file paths inside the
/// document resolve against `base_dir`.
inline StudyConfig parse_config(const nlohmann::json& root, const std::filesystem::path& base_dir = ".")
{
    using detail::check_keys;
    using detail::read;
    StudyConfig cfg;
    check_keys(root, "config", {"vehicle", "battery", "prices", "corridor", "driver", "grid", "advisory",
                                "driver_following", "sweep", "variant", "description"});

    if (root.contains("vehicle")) {
        const auto& j = root["vehicle"];
        check_keys(j, "vehicle", {"mass_kg", "rolling_c1", "rolling_c2", "frontal_area_m2", "drag_coeff",
                                  "air_density_kg_m3", "gravity_m_s2", "eff_trans", "eff_motor", "eff_inverter",
                                  "regen_enabled", "regen_power_cap_w"});
        auto& v = cfg.vehicle;
        read(j, "mass_kg", v.mass_kg, "vehicle");
        read(j, "rolling_c1", v.rolling_c1, "vehicle");
        read(j, "rolling_c2", v.rolling_c2, "vehicle");
        read(j, "frontal_area_m2", v.frontal_area_m2, "vehicle");
        read(j, "drag_coeff", v.drag_coeff, "vehicle");
        read(j, "air_density_kg_m3", v.air_density_kg_m3, "vehicle");
        read(j, "gravity_m_s2", v.gravity_m_s2, "vehicle");
        read(j, "eff_trans", v.eff_trans, "vehicle");
        read(j, "eff_motor", v.eff_motor, "vehicle");
        read(j, "eff_inverter", v.eff_inverter, "vehicle");
        read(j, "regen_enabled", v.regen_enabled, "vehicle");
        read(j, "regen_power_cap_w", v.regen_power_cap_w, "vehicle");
    }
    if (root.contains("battery")) {
        const auto& j = root["battery"];
        check_keys(j, "battery", {"capacity_kwh", "nominal_voltage_v", "eol_capacity_loss", "temperature_k",
                                  "power_z", "coeff_table_csv", "decay_multiplier", "pack_price_per_kwh",
                                  "reference_cell_ah"});
        auto& b = cfg.battery;
        read(j, "capacity_kwh", b.capacity_kwh, "battery");
        read(j, "nominal_voltage_v", b.nominal_voltage_v, "battery");
        read(j, "eol_capacity_loss", b.eol_capacity_loss, "battery");
        read(j, "temperature_k", b.temperature_k, "battery");
        read(j, "power_z", b.power_z, "battery");
        read(j, "decay_multiplier", b.decay_multiplier, "battery");
        read(j, "pack_price_per_kwh", b.pack_price_per_kwh, "battery");
        read(j, "reference_cell_ah", b.reference_cell_ah, "battery");
        if (j.contains("coeff_table_csv")) {
            std::string path;
            read(j, "coeff_table_csv", path, "battery");
            std::filesystem::path p(path);
            if (p.is_relative()) {
                p = base_dir / p;
            }
            b.coeff_table = load_coefficient_csv(p.string());
        }
    }
    if (root.contains("prices")) {
        const auto& j = root["prices"];
        check_keys(j, "prices", {"electricity_usd_per_kwh", "pack_usd_per_kwh"});
        read(j, "electricity_usd_per_kwh", cfg.prices.electricity_usd_per_kwh, "prices");
        read(j, "pack_usd_per_kwh", cfg.battery.pack_price_per_kwh, "prices");
    }
    if (root.contains("corridor")) {
        const auto& j = root["corridor"];
        check_keys(j, "corridor",
                   {"entry_buffer_m", "spacing_m", "exit_buffer_m", "speed_limit_kmh", "signals", "grade_profile"});
        double entry = 100.0;
        double spacing = 400.0;
        double exit = 100.0;
        double limit_kmh = 88.5;
        read(j, "entry_buffer_m", entry, "corridor");
        read(j, "spacing_m", spacing, "corridor");
        read(j, "exit_buffer_m", exit, "corridor");
        read(j, "speed_limit_kmh", limit_kmh, "corridor");
        SignalSchedule first{0.0, 15.0, 30.0, 30.0};
        SignalSchedule second{0.0, 15.0, 30.0, 30.0};
        if (j.contains("signals")) {
            const auto& sj = j["signals"];
            if (!sj.is_array() || sj.size() != 2) {
                throw ConfigError("'corridor.signals' must list exactly two signals");
            }
            first = detail::parse_signal(sj[0], "corridor.signals[0]");
            second = detail::parse_signal(sj[1], "corridor.signals[1]");
        }
        GradeProfile grade;
        if (j.contains("grade_profile")) {
            const auto& gj = j["grade_profile"];
            if (!gj.is_array()) {
                throw ConfigError("'corridor.grade_profile' must be an array");
            }
            for (const auto& seg : gj) {
                detail::check_keys(seg, "corridor.grade_profile[]", {"from_m", "grade"});
                GradeSegment g;
                read(seg, "from_m", g.from_m, "corridor.grade_profile");
                read(seg, "grade", g.grade, "corridor.grade_profile");
                grade.segments.push_back(g);
            }
        }
        cfg.corridor = Corridor::make(entry, spacing, exit, limit_kmh / 3.6, first, second);
        cfg.corridor.grade_profile = grade;
    }
    if (root.contains("driver")) {
        const auto& j = root["driver"];
        check_keys(j, "driver", {"sight_distance_m", "accel_max_m_s2", "decel_min_m_s2", "timestep_s"});
        read(j, "sight_distance_m", cfg.driver.sight_distance_m, "driver");
        read(j, "accel_max_m_s2", cfg.driver.accel_max_m_s2, "driver");
        read(j, "decel_min_m_s2", cfg.driver.decel_min_m_s2, "driver");
        read(j, "timestep_s", cfg.driver.timestep_s, "driver");
    }
    if (root.contains("grid")) {
        const auto& j = root["grid"];
        check_keys(j, "grid", {"distance_step_m", "speed_step_m_s", "time_step_s", "boundary_time_step_s",
                               "boundary_band_m_s", "time_budget_mode", "time_buffer_frac", "idle_power_w",
                               "buffer_on_infeasible", "launch_speeds"});
        auto& g = cfg.grid;
        read(j, "distance_step_m", g.distance_step_m, "grid");
        read(j, "speed_step_m_s", g.speed_step_m_s, "grid");
        read(j, "time_step_s", g.time_step_s, "grid");
        read(j, "boundary_time_step_s", g.boundary_time_step_s, "grid");
        read(j, "boundary_band_m_s", g.boundary_band_m_s, "grid");
        read(j, "time_buffer_frac", g.time_buffer_frac, "grid");
        read(j, "idle_power_w", g.idle_power_w, "grid");
        read(j, "buffer_on_infeasible", g.buffer_on_infeasible, "grid");
        read(j, "launch_speeds", g.launch_speeds, "grid");
        if (j.contains("time_budget_mode")) {
            std::string mode;
            read(j, "time_budget_mode", mode, "grid");
            if (mode == "exact") {
                g.time_budget_mode = BudgetMode::Exact;
            } else if (mode == "buffered") {
                g.time_budget_mode = BudgetMode::Buffered;
            } else {
                throw ConfigError("grid.time_budget_mode must be 'exact' or 'buffered'");
            }
        }
    }
    if (root.contains("advisory")) {
        const auto& j = root["advisory"];
        check_keys(j, "advisory", {"update_rate_hz", "min_cruise_m_s", "lookahead_lights", "override_margin_m"});
        read(j, "update_rate_hz", cfg.advisory.update_rate_hz, "advisory");
        read(j, "min_cruise_m_s", cfg.advisory.min_cruise_m_s, "advisory");
        read(j, "lookahead_lights", cfg.advisory.lookahead_lights, "advisory");
        read(j, "override_margin_m", cfg.advisory.override_margin_m, "advisory");
    }
    cfg.advisory.speed_limit_m_s = cfg.corridor.speed_limit_m_s;
    if (root.contains("driver_following")) {
        const auto& j = root["driver_following"];
        check_keys(j, "driver_following",
                   {"reaction_delay_s", "speed_tracking_time_constant_s", "low_speed_drift_m_s", "drift_below_m_s"});
        auto& d = cfg.driver_following;
        read(j, "reaction_delay_s", d.reaction_delay_s, "driver_following");
        read(j, "speed_tracking_time_constant_s", d.speed_tracking_time_constant_s, "driver_following");
        read(j, "low_speed_drift_m_s", d.low_speed_drift_m_s, "driver_following");
        read(j, "drift_below_m_s", d.drift_below_m_s, "driver_following");
    }
    read(root, "variant", cfg.variant, "config");
    if (root.contains("sweep")) {
        const auto& j = root["sweep"];
        check_keys(j, "sweep", {"timings", "spacings_m", "variants", "sweep_variants", "decay_multipliers", "table3"});
        auto& s = cfg.sweep;
        if (j.contains("timings")) {
            s.timings.clear();
            const auto& tj = j["timings"];
            if (!tj.is_array()) {
                throw ConfigError("'sweep.timings' must be an array of [x, y] pairs");
            }
            for (const auto& pair : tj) {
                const auto xy = detail::number_list(pair, "sweep.timings[]");
                if (xy.size() != 2) {
                    throw ConfigError("'sweep.timings' entries must be [x, y] pairs");
                }
                s.timings.push_back(Timing{xy[0], xy[1]});
            }
        }
        if (j.contains("spacings_m")) {
            s.spacings_m = detail::number_list(j["spacings_m"], "sweep.spacings_m");
        }
        if (j.contains("decay_multipliers")) {
            s.decay_multipliers = detail::number_list(j["decay_multipliers"], "sweep.decay_multipliers");
        }
        if (j.contains("variants")) {
            s.variants.clear();
            for (const auto& vj : j["variants"]) {
                detail::check_keys(vj, "sweep.variants[]", {"name", "capacity_kwh", "mass_kg"});
                VehicleVariant v;
                read(vj, "name", v.name, "sweep.variants");
                read(vj, "capacity_kwh", v.capacity_kwh, "sweep.variants");
                read(vj, "mass_kg", v.mass_kg, "sweep.variants");
                s.variants.push_back(v);
            }
        }
        read(j, "sweep_variants", s.sweep_variants, "sweep");
        if (j.contains("table3")) {
            const auto& t3 = j["table3"];
            check_keys(t3, "sweep.table3", {"enabled", "decay_multiplier", "small_variant", "large_variant"});
            read(t3, "enabled", s.table3.enabled, "sweep.table3");
            read(t3, "decay_multiplier", s.table3.decay_multiplier, "sweep.table3");
            read(t3, "small_variant", s.table3.small_variant, "sweep.table3");
            read(t3, "large_variant", s.table3.large_variant, "sweep.table3");
        }
    }
    cfg.validate();
    return cfg;
}

inline StudyConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
    return parse_config(root, std::filesystem::path(path).parent_path());
}

/// One fully specified simulation cell.
struct ScenarioSpec {
    Corridor corridor;
    Timing timing;
    VehicleVariant variant;
    double decay_multiplier = 1.0;
    VehicleParams vehicle;
    BatteryModel battery;
    Prices prices;
    RegularDriverRules rules;
    DpGridSpec grid;
    std::string label;

    double spacing_m() const { return corridor.light_spacing_m; }
};

/// Scenario for timing (x, y) and spacing s built from a study config.
inline ScenarioSpec make_scenario(const StudyConfig& cfg, Timing timing, double spacing_m,
                                  const VehicleVariant& variant, double decay_multiplier)
{
    ScenarioSpec s;
    auto first = cfg.corridor.signals[0];
    auto second = cfg.corridor.signals[1];
    first.time_to_red_s = timing.first_s;
    second.time_to_red_s = timing.second_s;
    s.corridor = Corridor::make(cfg.corridor.entry_buffer_m, spacing_m, cfg.corridor.exit_buffer_m,
                                cfg.corridor.speed_limit_m_s, first, second);
    s.corridor.grade_profile = cfg.corridor.grade_profile;
    s.timing = timing;
    s.variant = variant;
    s.decay_multiplier = decay_multiplier;
    s.vehicle = cfg.vehicle;
    s.vehicle.mass_kg = variant.mass_kg;
    s.battery = cfg.battery;
    s.battery.capacity_kwh = variant.capacity_kwh;
    s.battery.decay_multiplier = decay_multiplier;
    s.prices = cfg.prices;
    s.rules = cfg.driver;
    s.grid = cfg.grid;
    char buf[96];
    std::snprintf(buf, sizeof buf, "timing_%g_%g_s%g", timing.first_s, timing.second_s, spacing_m);
    s.label = buf;
    return s;
}

/// Both trajectories of one scenario and their costs.
struct ScenarioRecord {
    ScenarioSpec spec;
    Trajectory regular;
    Trajectory eco;
    CostBreakdown regular_cost;
    CostBreakdown eco_cost;
    double time_budget_s = 0.0;
    bool budget_relaxed = false;
    double reduction_pct = 0.0;
};

inline double reduction_pct(const CostBreakdown& regular, const CostBreakdown& eco)
{
    return regular.total_usd > 0.0 ? 100.0 * (regular.total_usd - eco.total_usd) / regular.total_usd : 0.0;
}

/// Baseline, time budget, DP, and evaluation of both trajectories.
inline ScenarioRecord run_scenario(const ScenarioSpec& s)
{
    ScenarioRecord rec;
    rec.spec = s;
    rec.regular = simulate_regular(s.corridor, s.vehicle, s.rules);
    rec.regular_cost = evaluate_trajectory(rec.regular, s.vehicle, s.battery, s.prices, s.corridor.grade_profile,
                                           s.grid.idle_power_w);
    annotate_trajectory(rec.regular, s.vehicle, s.battery, s.prices, s.corridor.grade_profile, s.grid.idle_power_w);

    EcoProblem p;
    p.corridor = s.corridor;
    p.vehicle = s.vehicle;
    p.battery = s.battery;
    p.prices = s.prices;
    p.rules = s.rules;
    p.grid = s.grid;
    const double trip = rec.regular.trip_time();
    p.time_budget_s = s.grid.time_budget_mode == BudgetMode::Buffered ? trip * (1.0 + s.grid.time_buffer_frac) : trip;
    auto sol = optimize(p);
    rec.eco = std::move(sol.trajectory);
    rec.eco_cost = sol.cost;
    rec.time_budget_s = sol.time_budget_s;
    rec.budget_relaxed = sol.budget_relaxed;
    rec.reduction_pct = reduction_pct(rec.regular_cost, rec.eco_cost);
    return rec;
}

/// One cell of a sweep. Trajectories are kept for reporting.
struct CellResult {
    std::string group;
    Timing timing;
    double spacing_m = 0.0;
    std::string variant;
    double decay_multiplier = 1.0;
    bool ok = false;
    std::string error;
    ScenarioRecord record;

    double reduction_pct() const { return ecodrive::reduction_pct(record.regular_cost, record.eco_cost); }
};

/// Decay reduction of the large pack relative to the small one, per driver.
struct Table3Cell {
    Timing timing;
    double spacing_m = 0.0;
    bool ok = false;
    double regular_pct = 0.0;
    double eco_pct = 0.0;
};

struct SweepResult {
    std::vector<Timing> timings;
    std::vector<double> spacings_m;
    std::vector<std::string> groups;  // variant/multiplier combinations, in run order
    std::vector<CellResult> cells;
    std::vector<Table3Cell> table3;

    const CellResult* find(const std::string& group, Timing t, double spacing) const
    {
        for (const auto& c : cells) {
            if (c.group == group && c.timing == t && c.spacing_m == spacing) {
                return &c;
            }
        }
        return nullptr;
    }

    /// Mean reduction over the successful cells of one spacing column.
    double column_average(const std::string& group, double spacing) const
    {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& c : cells) {
            if (c.group == group && c.spacing_m == spacing && c.ok) {
                sum += c.reduction_pct();
                ++n;
            }
        }
        return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    }

    double grand_average(const std::string& group) const
    {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& c : cells) {
            if (c.group == group && c.ok) {
                sum += c.reduction_pct();
                ++n;
            }
        }
        return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    }

    std::size_t failures() const
    {
        return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok; }));
    }
};

inline std::string group_name(const std::string& variant, double multiplier)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s_x%g", variant.c_str(), multiplier);
    return buf;
}

namespace detail {

struct CellJob {
    std::string group;
    Timing timing;
    double spacing_m;
    VehicleVariant variant;
    double multiplier;
};

// Runs f(i) for i in [0, n) on `jobs` threads; results are indexed, so the
// outcome does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                f(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace detail

/// Runs every (variant, multiplier, timing, spacing) cell, plus the pairs
/// needed for the battery-size table when enabled. A failing cell is
/// recorded with its error and does not stop the sweep.
inline SweepResult sweep(const StudyConfig& cfg, unsigned jobs = 1)
{
    cfg.validate();
    SweepResult out;
    out.timings = cfg.sweep.timings;
    out.spacings_m = cfg.sweep.spacings_m;

    std::vector<std::pair<std::string, double>> groups;
    auto add_group = [&](const std::string& variant, double m) {
        for (const auto& g : groups) {
            if (g.first == variant && g.second == m) {
                return;
            }
        }
        groups.emplace_back(variant, m);
    };
    for (const auto& v : cfg.sweep.sweep_variants) {
        for (double m : cfg.sweep.decay_multipliers) {
            add_group(v, m);
        }
    }
    if (cfg.sweep.table3.enabled) {
        add_group(cfg.sweep.table3.small_variant, cfg.sweep.table3.decay_multiplier);
        add_group(cfg.sweep.table3.large_variant, cfg.sweep.table3.decay_multiplier);
    }

    std::vector<detail::CellJob> jobs_list;
    for (const auto& [variant, m] : groups) {
        const std::string name = group_name(variant, m);
        out.groups.push_back(name);
        for (const auto& t : cfg.sweep.timings) {
            for (double s : cfg.sweep.spacings_m) {
                jobs_list.push_back(detail::CellJob{name, t, s, cfg.sweep.variant(variant), m});
            }
        }
    }

    out.cells.resize(jobs_list.size());
    detail::parallel_for(jobs_list.size(), jobs, [&](std::size_t i) {
        const auto& job = jobs_list[i];
        CellResult cell;
        cell.group = job.group;
        cell.timing = job.timing;
        cell.spacing_m = job.spacing_m;
        cell.variant = job.variant.name;
        cell.decay_multiplier = job.multiplier;
        try {
            cell.record = run_scenario(make_scenario(cfg, job.timing, job.spacing_m, job.variant, job.multiplier));
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        out.cells[i] = std::move(cell);
    });

    if (cfg.sweep.table3.enabled) {
        const auto small = group_name(cfg.sweep.table3.small_variant, cfg.sweep.table3.decay_multiplier);
        const auto large = group_name(cfg.sweep.table3.large_variant, cfg.sweep.table3.decay_multiplier);
        for (const auto& t : cfg.sweep.timings) {
            for (double s : cfg.sweep.spacings_m) {
                Table3Cell c;
                c.timing = t;
                c.spacing_m = s;
                const auto* a = out.find(small, t, s);
                const auto* b = out.find(large, t, s);
                if (a && b && a->ok && b->ok) {
                    c.ok = true;
                    c.regular_pct = 100.0 * (1.0 - std::abs(b->record.regular_cost.soh_delta)
                                                       / std::abs(a->record.regular_cost.soh_delta));
                    c.eco_pct = 100.0 * (1.0 - std::abs(b->record.eco_cost.soh_delta)
                                                   / std::abs(a->record.eco_cost.soh_delta));
                }
                out.table3.push_back(c);
            }
        }
    }
    return out;
}

/// Regular vs advised-driver comparison for the configured corridor.
struct AdvisoryComparison {
    Trajectory regular;
    AdvisedRun advised;
    CostBreakdown regular_cost;
    CostBreakdown advised_cost;

    double reduction_pct() const { return ecodrive::reduction_pct(regular_cost, advised_cost); }
    double energy_reduction_pct() const
    {
        return regular_cost.energy_kwh > 0.0 ? 100.0 * (1.0 - advised_cost.energy_kwh / regular_cost.energy_kwh) : 0.0;
    }
    double decay_reduction_pct() const
    {
        return regular_cost.soh_delta != 0.0 ? 100.0 * (1.0 - advised_cost.soh_delta / regular_cost.soh_delta) : 0.0;
    }
};

inline AdvisoryComparison run_advisory(const StudyConfig& cfg, const DriverFollowingModel& driver)
{
    cfg.validate();
    AdvisoryComparison out;
    const auto& c = cfg.corridor;
    VehicleParams vehicle = cfg.vehicle;
    BatteryModel battery = cfg.battery;
    const auto& variant = cfg.sweep.variant(cfg.variant);
    vehicle.mass_kg = variant.mass_kg;
    battery.capacity_kwh = variant.capacity_kwh;
    auto adv_cfg = cfg.advisory;
    adv_cfg.speed_limit_m_s = c.speed_limit_m_s;

    out.regular = simulate_regular(c, vehicle, cfg.driver);
    out.advised = simulate_advised_driver(c, vehicle, driver, adv_cfg, cfg.driver);
    const double idle = cfg.grid.idle_power_w;
    out.regular_cost = evaluate_trajectory(out.regular, vehicle, battery, cfg.prices, c.grade_profile, idle);
    out.advised_cost = evaluate_trajectory(out.advised.trajectory, vehicle, battery, cfg.prices, c.grade_profile, idle);
    annotate_trajectory(out.regular, vehicle, battery, cfg.prices, c.grade_profile, idle);
    annotate_trajectory(out.advised.trajectory, vehicle, battery, cfg.prices, c.grade_profile, idle);
    return out;
}

}  // namespace ecodrive
