#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ecodrive/checks.hpp"
#include "ecodrive/dp_optimizer.hpp"
#include "ecodrive/oracle.hpp"

using namespace ecodrive;

namespace {

constexpr double kLimit = 88.5 / 3.6;

Corridor all_green(double length)
{
    SignalSchedule g{0.0, 1e4, 30.0, 2e4};
    return Corridor::make(100.0, length - 200.0, 100.0, kLimit, g, g);
}

EcoProblem problem_for(const Corridor& c)
{
    EcoProblem p;
    p.corridor = c;
    p.time_budget_s = time_budget(c, p.vehicle, p.rules, p.grid);
    return p;
}

std::size_t nearest_speed_bin(const DpGrid& g, double v)
{
    std::size_t best = 0;
    for (std::size_t j = 1; j < g.speed_count(); ++j) {
        if (std::abs(g.speed(j) - v) < std::abs(g.speed(best) - v)) {
            best = j;
        }
    }
    return best;
}

double reduction(const Corridor& c)
{
    const auto p = problem_for(c);
    const auto regular = simulate_regular(c, p.vehicle, p.rules);
    const auto rc = evaluate_trajectory(regular, p.vehicle, p.battery, p.prices);
    const auto sol = optimize(p);
    return 100.0 * (rc.total_usd - sol.cost.total_usd) / rc.total_usd;
}

}  // namespace

TEST(Budget, ExactAndBuffered)
{
    const auto c = all_green(1000.0);
    DpGridSpec g;
    EXPECT_NEAR(time_budget(c, VehicleParams{}, RegularDriverRules{}, g), 1000.0 / kLimit, 1e-9);
    g.time_budget_mode = BudgetMode::Buffered;
    EXPECT_NEAR(time_budget(c, VehicleParams{}, RegularDriverRules{}, g), 1.03 * 1000.0 / kLimit, 1e-9);
    EXPECT_NEAR(time_budget(c, VehicleParams{}, RegularDriverRules{}, g), 41.9, 0.05);
}

TEST(Budget, StopAndGoTripTime)
{
    const auto c = Corridor::with_timing(800.0, 15.0, 15.0);
    const auto regular = simulate_regular(c, VehicleParams{});
    EXPECT_DOUBLE_EQ(time_budget(c, VehicleParams{}, RegularDriverRules{}, DpGridSpec{}), regular.trip_time());
}

TEST(Grid, SpeedGridEndsAtLimitAndLatticeAligns)
{
    const auto p = problem_for(all_green(600.0));
    const DpGrid g(p);
    EXPECT_EQ(g.speed(0), 0.0);
    EXPECT_DOUBLE_EQ(g.speed(g.top_speed()), kLimit);
    for (std::size_t j = 1; j < g.speed_count(); ++j) {
        EXPECT_GT(g.speed(j), g.speed(j - 1));
    }
    // One distance step at the limit is a whole number of fine bins.
    const double bins = p.grid.distance_step_m / kLimit / g.tau();
    EXPECT_NEAR(bins, std::round(bins), 1e-9);
    EXPECT_NEAR(g.tau(), p.grid.boundary_time_step_s, 0.05 * p.grid.boundary_time_step_s);
    EXPECT_EQ(g.node_count(), 61u);
    EXPECT_EQ(g.stop_line_at(10), 0);
    EXPECT_EQ(g.stop_line_at(50), 1);
    EXPECT_LT(g.stop_line_at(20), 0);
}

TEST(Transition, ExcessiveAccelerationInfeasible)
{
    const DpGrid g(problem_for(all_green(600.0)));
    const auto j10 = nearest_speed_bin(g, 10.0);
    const auto j20 = nearest_speed_bin(g, 20.0);
    const auto tr = transition(g, DpState{20, 100, j10}, DpState{21, 100, j20});
    EXPECT_EQ(tr.status, ArcStatus::Acceleration);
}

TEST(Transition, CruiseArcCost)
{
    const auto p = problem_for(all_green(600.0));
    const DpGrid g(p);
    const auto top = g.top_speed();
    const auto& arc = g.arc(20, top, top);
    ASSERT_TRUE(arc.accel_ok);
    const double power = 10340.43293251686;
    const double dt = 10.0 / kLimit;
    const double expected = power * dt * 0.12 / 3.6e6 + decay_cost_rate(power, p.battery) * dt;
    EXPECT_NEAR(arc.cost.total_usd, expected, 1e-9 * expected);
    const long t0 = 50;
    const auto tr = transition(g, DpState{20, t0, top}, DpState{21, g.arrival_bin(t0, arc, top), top});
    EXPECT_TRUE(tr.feasible());
    EXPECT_EQ(tr.cost.total_usd, arc.cost.total_usd);
}

TEST(Transition, DepartingOnRedInfeasible)
{
    const auto c = Corridor::with_timing(400.0, 15.0, 15.0);
    const DpGrid g(problem_for(c));
    const std::size_t line = 10;
    ASSERT_EQ(g.stop_line_at(line), 0);
    const long red = static_cast<long>(std::ceil(20.0 / g.tau()));
    const auto j = nearest_speed_bin(g, 5.0);
    const auto& arc = g.arc(line, j, j);
    const auto tr = transition(g, DpState{line, red, j}, DpState{line + 1, g.arrival_bin(red, arc, j), j});
    EXPECT_EQ(tr.status, ArcStatus::Signal);
    const long green = static_cast<long>(std::ceil(46.0 / g.tau()));
    EXPECT_TRUE(transition(g, DpState{line, green, j}, DpState{line + 1, g.arrival_bin(green, arc, j), j}).feasible());
}

TEST(Transition, WaitArcsOnlyAtStopLinesAtRest)
{
    const DpGrid g(problem_for(Corridor::with_timing(400.0, 15.0, 15.0)));
    EXPECT_TRUE(transition(g, DpState{10, 100, 0}, DpState{10, 100 + g.lattice(0), 0}).feasible());
    EXPECT_FALSE(transition(g, DpState{12, 100, 0}, DpState{12, 100 + g.lattice(0), 0}).feasible());
    EXPECT_FALSE(transition(g, DpState{10, 100, 3}, DpState{10, 100 + g.lattice(3), 3}).feasible());
}

TEST(Optimize, AllGreenIsCruise)
{
    const auto c = all_green(1000.0);
    const auto p = problem_for(c);
    const auto sol = optimize(p);
    for (const auto& s : sol.trajectory.samples) {
        EXPECT_DOUBLE_EQ(s.v_m_s, kLimit);
    }
    const auto rc = evaluate_trajectory(simulate_regular(c, p.vehicle), p.vehicle, p.battery, p.prices);
    EXPECT_NEAR(sol.cost.total_usd, rc.total_usd, 0.005 * rc.total_usd);
    EXPECT_FALSE(sol.budget_relaxed);
}

TEST(Optimize, TableCellsWithTwoHundredMetreExit)
{
    EXPECT_NEAR(reduction(Corridor::with_timing(800.0, 15.0, 15.0, 200.0)), 41.6, 10.0);
    EXPECT_NEAR(reduction(Corridor::with_timing(600.0, -15.0, -15.0, 200.0)), 47.7, 10.0);
}

TEST(Optimize, DominatesRegularAndMeetsConstraints)
{
    const auto c = Corridor::with_timing(400.0, 0.0, 0.0, 200.0);
    const auto p = problem_for(c);
    const auto sol = optimize(p);
    const auto rc = evaluate_trajectory(simulate_regular(c, p.vehicle), p.vehicle, p.battery, p.prices);
    EXPECT_LE(sol.cost.total_usd, rc.total_usd * 1.01);
    const auto issues = check_constraints(sol.trajectory, c, p.rules, p.time_budget_s);
    EXPECT_TRUE(issues.empty()) << issues.front();
    EXPECT_NEAR(sol.cost.total_usd, sol.dp_total_usd, 1e-12 + 1e-9 * sol.dp_total_usd);
}

TEST(Optimize, ValueSinkSeesEveryStage)
{
    const auto p = problem_for(Corridor::with_timing(200.0, 15.0, 15.0));
    std::vector<bool> seen(DpGrid(p).node_count(), false);
    bool negative = false;
    optimize(p, [&](std::size_t stage, double, double, double, double value) {
        seen.at(stage) = true;
        negative = negative || value < 0.0;
    });
    for (bool s : seen) {
        EXPECT_TRUE(s);
    }
    EXPECT_FALSE(negative);
}

TEST(Optimize, BufferedRetryWhenExactBudgetMissesGrid)
{
    auto p = problem_for(all_green(600.0));
    p.time_budget_s *= 0.99;
    const auto sol = optimize(p);
    EXPECT_TRUE(sol.budget_relaxed);
    EXPECT_FALSE(sol.trajectory.diagnostics.empty());
    p.grid.buffer_on_infeasible = false;
    EXPECT_THROW(optimize(p), InfeasibleError);
}

TEST(Optimize, InfeasibleNamesBindingConstraint)
{
    auto p = problem_for(all_green(600.0));
    p.time_budget_s = 5.0;
    try {
        optimize(p);
        FAIL() << "expected infeasible";
    } catch (const InfeasibleError& e) {
        EXPECT_EQ(e.binding(), "time budget");
    }
}

TEST(Oracle, DpMatchesExhaustiveEnumeration)
{
    const auto s = run_oracle_suite(60, 20240601);
    EXPECT_TRUE(s.all_match()) << (s.mismatches.empty() ? "" : s.mismatches.front());
    EXPECT_GT(s.feasible, 20u);
    EXPECT_GT(s.paths_enumerated, s.feasible);
}

TEST(Oracle, TinyInstancesStayTiny)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto p = make_tiny_problem(rng);
        const DpGrid g(p);
        EXPECT_LE(g.stage_count(), 5u);
        EXPECT_LE(g.speed_count(), 6u);
        EXPECT_LE(g.budget_bins(), 25);
    }
}

TEST(Oracle, BothInfeasibleWhenNoPathExists)
{
    std::mt19937_64 rng(5);
    auto p = make_tiny_problem(rng);
    p.time_budget_s = 1.25;
    const auto rep = verify_against_enumeration(p);
    EXPECT_FALSE(rep.dp_feasible);
    EXPECT_FALSE(rep.brute_feasible);
    EXPECT_TRUE(rep.matches());
}

TEST(Oracle, SingleFeasiblePathFound)
{
    std::mt19937_64 rng(9);
    auto p = make_tiny_problem(rng);
    SignalSchedule g{0.0, 100.0, 30.0, 200.0};
    p.corridor = Corridor::make(20.0, 20.0, 10.0, 8.0, g, g);
    p.corridor.grade_profile = {};
    p.time_budget_s = 50.0 / 8.0;
    const auto rep = verify_against_enumeration(p);
    ASSERT_TRUE(rep.matches());
    EXPECT_EQ(rep.paths_enumerated, 1u);
    EXPECT_EQ(rep.dp_path, rep.brute_path);
}

TEST(Optimize, PropertyRandomScenariosSatisfyConstraints)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> offset(-30.0, 30.0);
    std::uniform_real_distribution<double> spacing(150.0, 500.0);
    for (int i = 0; i < 12; ++i) {
        const auto c = Corridor::with_timing(spacing(rng), offset(rng), offset(rng));
        const auto p = problem_for(c);
        const auto sol = optimize(p);
        const auto issues = check_constraints(sol.trajectory, c, p.rules, sol.time_budget_s);
        EXPECT_TRUE(issues.empty()) << i << ": " << issues.front();
    }
}

TEST(Optimize, PropertyRefiningGridDoesNotRaiseCost)
{
    for (const auto& c : {Corridor::with_timing(200.0, 0.0, 0.0, 200.0), Corridor::with_timing(400.0, 15.0, 15.0)}) {
        const auto coarse = problem_for(c);
        auto fine = coarse;
        fine.grid.distance_step_m /= 2.0;
        fine.grid.speed_step_m_s /= 2.0;
        fine.grid.time_step_s /= 2.0;
        fine.grid.boundary_time_step_s /= 2.0;
        const double a = optimize(coarse).cost.total_usd;
        const double b = optimize(fine).cost.total_usd;
        EXPECT_LE(b, 1.01 * a);
    }
}
