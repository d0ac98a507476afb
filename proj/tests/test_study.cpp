#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "ecodrive/report.hpp"
#include "ecodrive/study.hpp"

using namespace ecodrive;
namespace fs = std::filesystem;

namespace {

const std::string kSource = ECODRIVE_SOURCE_DIR;

StudyConfig paper_config() { return load_config(kSource + "/configs/paper_sweep.json"); }

StudyConfig small_sweep()
{
    auto cfg = paper_config();
    cfg.sweep.timings = {Timing{15.0, 15.0}, Timing{-15.0, 0.0}};
    cfg.sweep.spacings_m = {200.0, 400.0};
    cfg.sweep.table3.enabled = false;
    return cfg;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("ecodrive_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty)
{
    const auto cfg = parse_config(nlohmann::json::object());
    EXPECT_DOUBLE_EQ(cfg.prices.electricity_usd_per_kwh, 0.12);
    EXPECT_DOUBLE_EQ(cfg.battery.pack_price_per_kwh, 125.0);
    EXPECT_EQ(cfg.sweep.timings.size(), 16u);
    EXPECT_EQ(cfg.sweep.spacings_m.size(), 4u);
    EXPECT_DOUBLE_EQ(cfg.sweep.variant("long_range").capacity_kwh, 75.0);
    EXPECT_DOUBLE_EQ(cfg.sweep.variant("long_range").mass_kg, 1726.0);
}

TEST(Config, ShippedSweepPinsStudySetup)
{
    const auto cfg = paper_config();
    EXPECT_DOUBLE_EQ(cfg.corridor.exit_buffer_m, 200.0);
    EXPECT_DOUBLE_EQ(cfg.corridor.entry_buffer_m, 100.0);
    EXPECT_TRUE(cfg.sweep.table3.enabled);
    EXPECT_DOUBLE_EQ(cfg.sweep.table3.decay_multiplier, 10.0);
    EXPECT_EQ(cfg.battery.coeff_table.size(), 4u);
    EXPECT_EQ(cfg.sweep.timings.front(), (Timing{-30.0, -30.0}));
}

TEST(Config, UnknownKeyRejected)
{
    const auto j = nlohmann::json::parse(R"({"corridor": {"spacing_m": 400, "colour": "red"}})");
    EXPECT_THROW(parse_config(j), ConfigError);
    EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"grid": {"time_budget_mode": "loose"}})")), ConfigError);
    EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"prices": {"electricity_usd_per_kwh": "cheap"}})")),
                 ConfigError);
}

TEST(Config, InvalidValuesRejected)
{
    EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"vehicle": {"mass_kg": -5}})")), ParameterError);
    EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"sweep": {"sweep_variants": ["truck"]}})")), ConfigError);
    EXPECT_THROW(load_config(kSource + "/no/such/file.json"), ConfigError);
}

TEST(Config, OverridesApply)
{
    const auto j = nlohmann::json::parse(R"({
        "corridor": {"spacing_m": 250, "speed_limit_kmh": 72,
                     "signals": [{"time_to_red_s": 5, "red_s": 20, "green_s": 40},
                                 {"time_to_red_s": -5, "red_s": 25, "green_s": 35}],
                     "grade_profile": [{"from_m": 0, "grade": 0.01}]},
        "grid": {"time_budget_mode": "buffered", "speed_step_m_s": 1.0},
        "sweep": {"timings": [[0, 15]], "spacings_m": [300], "decay_multipliers": [1, 10]}
    })");
    const auto cfg = parse_config(j);
    EXPECT_DOUBLE_EQ(cfg.corridor.light_spacing_m, 250.0);
    EXPECT_DOUBLE_EQ(cfg.corridor.speed_limit_m_s, 20.0);
    EXPECT_DOUBLE_EQ(cfg.corridor.signals[1].stop_line_m, 350.0);
    EXPECT_DOUBLE_EQ(cfg.corridor.signals[0].green_s, 40.0);
    EXPECT_DOUBLE_EQ(cfg.corridor.grade_profile.at(10.0), 0.01);
    EXPECT_EQ(cfg.grid.time_budget_mode, BudgetMode::Buffered);
    ASSERT_EQ(cfg.sweep.timings.size(), 1u);
    EXPECT_EQ(cfg.sweep.timings[0], (Timing{0.0, 15.0}));
    EXPECT_EQ(cfg.sweep.decay_multipliers.size(), 2u);
}

TEST(Scenario, LabelAndVariant)
{
    const auto cfg = paper_config();
    const auto s = make_scenario(cfg, Timing{-15.0, 15.0}, 800.0, cfg.sweep.variant("long_range"), 10.0);
    EXPECT_EQ(s.label, "timing_-15_15_s800");
    EXPECT_DOUBLE_EQ(s.vehicle.mass_kg, 1726.0);
    EXPECT_DOUBLE_EQ(s.battery.capacity_kwh, 75.0);
    EXPECT_DOUBLE_EQ(s.battery.decay_multiplier, 10.0);
    EXPECT_DOUBLE_EQ(s.corridor.signals[1].stop_line_m, 900.0);
}

TEST(Scenario, QuotedCells)
{
    const auto cfg = paper_config();
    const auto& v = cfg.sweep.variant("standard");
    const auto a = run_scenario(make_scenario(cfg, Timing{15.0, 15.0}, 200.0, v, 1.0));
    EXPECT_NEAR(a.reduction_pct, 0.0, 2.0);
    const auto b = run_scenario(make_scenario(cfg, Timing{-30.0, -30.0}, 200.0, v, 1.0));
    EXPECT_NEAR(b.reduction_pct, 0.0, 2.0);
    const auto c = run_scenario(make_scenario(cfg, Timing{-15.0, 15.0}, 800.0, v, 1.0));
    EXPECT_NEAR(c.reduction_pct, 10.8, 10.0);
}

TEST(Scenario, StopAndGoDecomposition)
{
    const auto cfg = paper_config();
    const auto r = run_scenario(make_scenario(cfg, Timing{15.0, 15.0}, 800.0, cfg.sweep.variant("standard"), 1.0));
    const double energy = 100.0 * (1.0 - r.eco_cost.energy_kwh / r.regular_cost.energy_kwh);
    const double decay = 100.0 * (1.0 - r.eco_cost.soh_delta / r.regular_cost.soh_delta);
    EXPECT_NEAR(energy, 40.0, 10.0);
    EXPECT_NEAR(decay, 54.0, 10.0);
    EXPECT_DOUBLE_EQ(r.time_budget_s, r.regular.trip_time());
    EXPECT_LE(r.eco.trip_time(), r.time_budget_s + 1e-9);
}

TEST(Scenario, ReductionRecomputesFromBreakdowns)
{
    const auto cfg = paper_config();
    const auto r = run_scenario(make_scenario(cfg, Timing{0.0, 0.0}, 400.0, cfg.sweep.variant("standard"), 1.0));
    const double again = 100.0 * (r.regular_cost.total_usd - r.eco_cost.total_usd) / r.regular_cost.total_usd;
    EXPECT_NEAR(r.reduction_pct, again, 1e-9);
}

TEST(Sweep, AveragesComeFromCells)
{
    const auto r = sweep(small_sweep(), 1);
    ASSERT_EQ(r.cells.size(), 4u);
    EXPECT_EQ(r.failures(), 0u);
    const auto g = r.groups.front();
    double sum = 0.0;
    for (const auto& c : r.cells) {
        EXPECT_LE(c.record.eco_cost.total_usd, 1.01 * c.record.regular_cost.total_usd);
        sum += c.reduction_pct();
    }
    EXPECT_NEAR(r.grand_average(g), sum / 4.0, 1e-9);
    EXPECT_NEAR(r.column_average(g, 200.0),
                0.5 * (r.find(g, Timing{15.0, 15.0}, 200.0)->reduction_pct()
                       + r.find(g, Timing{-15.0, 0.0}, 200.0)->reduction_pct()),
                1e-9);
}

TEST(Sweep, FailingCellIsRecordedNotFatal)
{
    auto cfg = small_sweep();
    cfg.grid.speed_step_m_s = 12.0;
    cfg.grid.launch_speeds = false;
    const auto r = sweep(cfg, 1);
    EXPECT_GT(r.failures(), 0u);
    EXPECT_LT(r.failures(), r.cells.size());
    const auto csv = table2_csv(r, r.groups.front());
    EXPECT_NE(csv.find("NA"), std::string::npos);
    EXPECT_NE(cells_csv(r).find("failed"), std::string::npos);
}

TEST(Reports, EmptySweepGivesHeaders)
{
    SweepResult r;
    EXPECT_EQ(table2_csv(r, ""), "timing_x,timing_y\n");
    EXPECT_EQ(table3_csv(r), "timing_x,timing_y\n");
    EXPECT_EQ(cells_csv(r), std::string(kCellsCsvHeader) + "\n");
    const auto dir = scratch_dir("empty");
    render_reports(r, dir);
    EXPECT_TRUE(fs::exists(dir / "table2.csv"));
    EXPECT_TRUE(fs::exists(dir / "table3.csv"));
    fs::remove_all(dir);
}

TEST(Reports, FilesNamedPerScenarioAndDeterministic)
{
    const auto cfg = small_sweep();
    const auto one = sweep(cfg, 1);
    const auto two = sweep(cfg, 3);
    const auto a = scratch_dir("det_a");
    const auto b = scratch_dir("det_b");
    render_reports(one, a);
    render_reports(two, b);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) {
            continue;
        }
        ++files;
        const auto rel = fs::relative(e.path(), a);
        ASSERT_TRUE(fs::exists(b / rel)) << rel;
        EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    }
    // 4 scenarios x (2 CSVs + 1 SVG) + table2 + table3 + cells.
    EXPECT_EQ(files, 15u);
    EXPECT_TRUE(fs::exists(a / "regular" / "timing_15_15_s400.csv"));
    EXPECT_TRUE(fs::exists(a / "eco" / "timing_-15_0_s200.csv"));
    EXPECT_TRUE(fs::exists(a / "timing_15_15_s400.svg"));
    const auto traj = slurp(a / "eco" / "timing_15_15_s400.csv");
    EXPECT_EQ(traj.substr(0, traj.find('\n')), kTrajectoryCsvHeader);
    const auto svg = slurp(a / "timing_15_15_s400.svg");
    EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Reports, Table3HasRegularAndEcoColumns)
{
    auto cfg = small_sweep();
    cfg.sweep.timings = {Timing{15.0, 15.0}};
    cfg.sweep.spacings_m = {400.0};
    cfg.sweep.table3.enabled = true;
    const auto r = sweep(cfg, 1);
    ASSERT_EQ(r.table3.size(), 1u);
    ASSERT_TRUE(r.table3[0].ok);
    EXPECT_GT(r.table3[0].regular_pct, 0.0);
    EXPECT_GT(r.table3[0].eco_pct, 0.0);
    const auto csv = table3_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "timing_x,timing_y,400_regular,400_eco");
}
