// Command-line front end: single scenarios, sweeps, the advisory field
// scenario and the enumeration oracle.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ecodrive/checks.hpp"
#include "ecodrive/oracle.hpp"
#include "ecodrive/report.hpp"
#include "ecodrive/study.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

std::string default_out_dir()
{
    if (const char* env = std::getenv("ECODRIVE_OUT_DIR"); env && *env) {
        return env;
    }
    return "out";
}

void print_breakdown(const char* name, const ecodrive::CostBreakdown& c)
{
    std::printf("%-8s total $%.6f (electricity $%.6f, battery $%.6f), %.4f kWh, trip %.2f s, SOH %.4e\n", name,
                c.total_usd, c.electricity_usd, c.battery_usd, c.energy_kwh, c.trip_time_s, c.soh_delta);
}

int cmd_run(const std::string& config_path, const std::vector<double>& timing, double spacing,
            const std::string& out_dir, const std::string& dump_values)
{
    using namespace ecodrive;
    auto cfg = load_config(config_path);
    Timing t{cfg.corridor.signals[0].time_to_red_s, cfg.corridor.signals[1].time_to_red_s};
    if (timing.size() == 2) {
        t = Timing{timing[0], timing[1]};
    }
    const double s = spacing > 0.0 ? spacing : cfg.corridor.light_spacing_m;
    const auto spec =
        make_scenario(cfg, t, s, cfg.sweep.variant(cfg.variant), cfg.battery.decay_multiplier);

    std::ofstream dump;
    ValueSink sink;
    if (!dump_values.empty()) {
        dump.open(dump_values, std::ios::binary);
        if (!dump) {
            throw std::runtime_error("cannot write " + dump_values);
        }
        dump << "stage,x_m,t_s,v_m_s,value_usd\n";
        sink = [&dump](std::size_t stage, double x, double ts, double v, double val) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%zu,%.4f,%.4f,%.5f,%.10e\n", stage, x, ts, v, val);
            dump << buf;
        };
    }

    ScenarioRecord rec;
    if (sink) {
        // Same pipeline as run_scenario, with the value function exported.
        rec.spec = spec;
        rec.regular = simulate_regular(spec.corridor, spec.vehicle, spec.rules);
        rec.regular_cost = evaluate_trajectory(rec.regular, spec.vehicle, spec.battery, spec.prices,
                                               spec.corridor.grade_profile, spec.grid.idle_power_w);
        annotate_trajectory(rec.regular, spec.vehicle, spec.battery, spec.prices, spec.corridor.grade_profile,
                            spec.grid.idle_power_w);
        EcoProblem p{spec.corridor, spec.vehicle, spec.battery, spec.prices, spec.rules, spec.grid,
                     time_budget(spec.corridor, spec.vehicle, spec.rules, spec.grid)};
        auto sol = optimize(p, sink);
        rec.eco = std::move(sol.trajectory);
        rec.eco_cost = sol.cost;
        rec.time_budget_s = sol.time_budget_s;
        rec.budget_relaxed = sol.budget_relaxed;
        rec.reduction_pct = reduction_pct(rec.regular_cost, rec.eco_cost);
    } else {
        rec = run_scenario(spec);
    }

    write_scenario_files(rec, out_dir);
    std::printf("scenario %s (%s, decay x%g)\n", spec.label.c_str(), spec.variant.name.c_str(), spec.decay_multiplier);
    print_breakdown("regular", rec.regular_cost);
    print_breakdown("eco", rec.eco_cost);
    std::printf("cost reduction %.2f%%, time budget %.3f s%s\n", rec.reduction_pct, rec.time_budget_s,
                rec.budget_relaxed ? " (relaxed)" : "");
    for (const auto& d : rec.regular.diagnostics) {
        std::printf("regular: %s\n", d.c_str());
    }
    for (const auto& d : rec.eco.diagnostics) {
        std::printf("eco: %s\n", d.c_str());
    }
    std::printf("wrote %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, unsigned jobs, const std::string& out_dir)
{
    using namespace ecodrive;
    const auto cfg = load_config(config_path);
    const auto result = sweep(cfg, jobs);
    render_reports(result, out_dir);
    for (const auto& g : result.groups) {
        std::printf("%s: grand average reduction %.2f%%\n", g.c_str(), result.grand_average(g));
    }
    std::printf("%zu cells, %zu failed; wrote %s\n", result.cells.size(), result.failures(), out_dir.c_str());
    for (const auto& c : result.cells) {
        if (!c.ok) {
            std::printf("failed %s [%g %g] s=%g: %s\n", c.group.c_str(), c.timing.first_s, c.timing.second_s,
                        c.spacing_m, c.error.c_str());
        }
    }
    return result.failures() ? kExitInfeasible : kExitOk;
}

int cmd_advisory(const std::string& config_path, const std::string& out_dir, bool ideal)
{
    using namespace ecodrive;
    const auto cfg = load_config(config_path);
    const auto driver = ideal ? DriverFollowingModel::ideal() : cfg.driver_following;
    const auto cmp = run_advisory(cfg, driver);
    render_advisory(cmp, cfg.corridor, out_dir);
    print_breakdown("regular", cmp.regular_cost);
    print_breakdown("advised", cmp.advised_cost);
    std::printf("cost reduction %.2f%% (energy %.2f%%, decay %.2f%%), %zu recommendations, %zu safety overrides\n",
                cmp.reduction_pct(), cmp.energy_reduction_pct(), cmp.decay_reduction_pct(), cmp.advised.log.size(),
                cmp.advised.override_count);
    const auto issues = check_constraints(cmp.advised.trajectory, cfg.corridor, cfg.driver);
    for (const auto& i : issues) {
        std::printf("constraint violation: %s\n", i.c_str());
    }
    std::printf("wrote %s\n", out_dir.c_str());
    return issues.empty() ? kExitOk : kExitFailure;
}

int cmd_verify(std::size_t instances, std::uint64_t seed)
{
    const auto s = ecodrive::run_oracle_suite(instances, seed);
    std::printf("%zu/%zu instances match exhaustive enumeration (%zu feasible, %zu complete paths enumerated)\n",
                s.matches, s.instances, s.feasible, s.paths_enumerated);
    for (const auto& m : s.mismatches) {
        std::printf("mismatch: %s\n", m.c_str());
    }
    return s.all_match() ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Eco-driving simulator and optimizer for a two-signal EV corridor"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = default_out_dir();

    auto* run = app.add_subcommand("run", "Regular driver vs DP eco-driver for one scenario");
    std::vector<double> timing;
    double spacing = 0.0;
    std::string dump_values;
    run->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--timing", timing, "Time to red of the two lights, s")->expected(2);
    run->add_option("--spacing", spacing, "Distance between the lights, m");
    run->add_option("--out", out_dir, "Output directory (default: $ECODRIVE_OUT_DIR or ./out)");
    run->add_option("--dump-values", dump_values, "Write the DP value function to this CSV");

    auto* sw = app.add_subcommand("sweep", "Timing x spacing sweep with tables and plots");
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    sw->add_option("--config", config, "Study config (JSON)")->required()->check(CLI::ExistingFile);
    sw->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sw->add_option("--out", out_dir, "Output directory (default: $ECODRIVE_OUT_DIR or ./out)");

    auto* adv = app.add_subcommand("advisory", "Rule-based advisory with a simulated driver");
    bool ideal = false;
    adv->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    adv->add_option("--out", out_dir, "Output directory (default: $ECODRIVE_OUT_DIR or ./out)");
    adv->add_flag("--ideal", ideal, "Use a perfect follower instead of the configured driver model");

    auto* ver = app.add_subcommand("verify", "Check the DP against exhaustive enumeration");
    std::size_t instances = 50;
    std::uint64_t seed = 20240601;
    ver->add_option("--instances", instances, "Number of random tiny instances")->check(CLI::PositiveNumber);
    ver->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) {
            return cmd_run(config, timing, spacing, out_dir, dump_values);
        }
        if (*sw) {
            return cmd_sweep(config, jobs, out_dir);
        }
        if (*adv) {
            return cmd_advisory(config, out_dir, ideal);
        }
        return cmd_verify(instances, seed);
    } catch (const ecodrive::InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitInfeasible;
    } catch (const ecodrive::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitValidation;
    } catch (const ecodrive::ParameterError& e) {
        std::fprintf(stderr, "invalid parameter: %s\n", e.what());
        return kExitValidation;
    } catch (const ecodrive::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
}
