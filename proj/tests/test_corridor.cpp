#include <random>

#include <gtest/gtest.h>

#include "ecodrive/baseline_driver.hpp"
#include "ecodrive/checks.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/kinematics.hpp"

using namespace ecodrive;

namespace {

SignalSchedule light(double time_to_red) { return SignalSchedule{100.0, time_to_red, 30.0, 30.0}; }

Corridor all_green(double length)
{
    // Lights that stay green for longer than any transit.
    SignalSchedule g{0.0, 1e4, 30.0, 2e4};
    return Corridor::make(100.0, length - 200.0, 100.0, 88.5 / 3.6, g, g);
}

}  // namespace

TEST(Signal, PhaseFollowsSchedule)
{
    const auto s = light(15.0);
    EXPECT_EQ(phase_at(s, 10.0), Phase::Green);
    EXPECT_EQ(phase_at(s, 20.0), Phase::Red);
    EXPECT_EQ(phase_at(s, 45.0), Phase::Green);
    EXPECT_EQ(phase_at(s, 15.0), Phase::Red);
    EXPECT_EQ(phase_at(light(-15.0), 0.0), Phase::Red);
}

TEST(Signal, NextGreenOnset)
{
    EXPECT_DOUBLE_EQ(next_green_onset(light(0.0), 0.0), 30.0);
    EXPECT_DOUBLE_EQ(next_green_onset(light(15.0), 10.0), 10.0);
    EXPECT_DOUBLE_EQ(next_green_onset(light(-15.0), 0.0), 15.0);
}

TEST(Signal, NextRedOnset)
{
    EXPECT_DOUBLE_EQ(next_red_onset(light(15.0), 0.0), 15.0);
    EXPECT_DOUBLE_EQ(next_red_onset(light(15.0), 20.0), 20.0);
    EXPECT_DOUBLE_EQ(next_red_onset(light(15.0), 50.0), 75.0);
}

TEST(Signal, PropertyPeriodicInBothDirections)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> offset(-60.0, 60.0);
    std::uniform_real_distribution<double> time(-200.0, 200.0);
    for (int i = 0; i < 500; ++i) {
        const auto s = light(offset(rng));
        const double t = time(rng);
        EXPECT_EQ(phase_at(s, t), phase_at(s, t + 60.0));
        EXPECT_EQ(phase_at(s, t), phase_at(s, t - 120.0));
        const double g = next_green_onset(s, t);
        EXPECT_GE(g, t);
        EXPECT_LE(g, t + 30.0 + 1e-9);
        EXPECT_EQ(phase_at(s, g), Phase::Green);
    }
}

TEST(Corridor, CrossingAllowed)
{
    const auto c = Corridor::with_timing(800.0, 15.0, 15.0);
    EXPECT_TRUE(crossing_allowed(c, 0, 14.0));
    EXPECT_FALSE(crossing_allowed(c, 0, 15.0));
    EXPECT_TRUE(crossing_allowed(c, 0, 45.0));
    EXPECT_THROW(crossing_allowed(c, 2, 0.0), std::out_of_range);
}

TEST(Corridor, GeometryValidated)
{
    EXPECT_THROW(Corridor::with_timing(-5.0, 0.0, 0.0), ParameterError);
    auto c = Corridor::with_timing(400.0, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(c.length(), 600.0);
    EXPECT_DOUBLE_EQ(c.signals[1].stop_line_m, 500.0);
    c.signals[1].stop_line_m = 450.0;
    EXPECT_THROW(c.validate(), ParameterError);
    auto d = Corridor::with_timing(400.0, 0.0, 0.0);
    d.grade_profile.segments = {{100.0, 0.01}, {50.0, 0.0}};
    EXPECT_THROW(d.validate(), ParameterError);
}

TEST(Corridor, GradeProfileIsPiecewiseConstant)
{
    GradeProfile g{{{0.0, 0.01}, {200.0, -0.02}}};
    EXPECT_DOUBLE_EQ(g.at(10.0), 0.01);
    EXPECT_DOUBLE_EQ(g.at(200.0), -0.02);
    EXPECT_FALSE(g.flat());
    EXPECT_TRUE(GradeProfile{}.flat());
}

TEST(Kinematics, TimeToCover)
{
    EXPECT_DOUBLE_EQ(kinematics::time_to_cover(10.0, 0.0, 50.0), 5.0);
    EXPECT_DOUBLE_EQ(kinematics::time_to_cover(0.0, 2.0, 4.0), 2.0);
    EXPECT_TRUE(std::isinf(kinematics::time_to_cover(2.0, -1.0, 10.0)));
}

TEST(Kinematics, StopRequired)
{
    const auto s = light(15.0);
    EXPECT_TRUE(kinematics::stop_required(s, 20.0, 50.0, 10.0));
    EXPECT_TRUE(kinematics::stop_required(s, 10.0, 100.0, 10.0));
    EXPECT_FALSE(kinematics::stop_required(s, 10.0, 40.0, 10.0));
}

TEST(Regular, AllGreenCruisesAtLimit)
{
    const auto c = all_green(1000.0);
    const auto t = simulate_regular(c, VehicleParams{});
    EXPECT_NEAR(t.trip_time(), 1000.0 / (88.5 / 3.6), 1e-9);
    EXPECT_NEAR(t.trip_time(), 40.68, 0.01);
    for (const auto& s : t.samples) {
        EXPECT_DOUBLE_EQ(s.v_m_s, 88.5 / 3.6);
    }
    EXPECT_TRUE(check_constraints(t, c, RegularDriverRules{}).empty());
}

TEST(Regular, BrakesForRedWithinSight)
{
    // Red light 75 m ahead at 15 m/s.
    const auto c = Corridor::make(75.0, 200.0, 100.0, 15.0, SignalSchedule{0.0, 0.0, 30.0, 30.0},
                                  SignalSchedule{0.0, 0.0, 30.0, 30.0});
    const auto t = simulate_regular(c, VehicleParams{});
    ASSERT_GE(t.samples.size(), 2u);
    const auto& a = t.samples[0];
    const auto& b = t.samples[1];
    EXPECT_NEAR((b.v_m_s - a.v_m_s) / (b.t_s - a.t_s), -1.5, 1e-9);
}

TEST(Regular, StopsAtSecondLight)
{
    const auto c = Corridor::with_timing(800.0, 15.0, 15.0);
    const auto t = simulate_regular(c, VehicleParams{});
    bool stopped = false;
    for (const auto& s : t.samples) {
        if (s.v_m_s == 0.0 && s.x_m == c.signals[1].stop_line_m) {
            stopped = true;
        }
    }
    EXPECT_TRUE(stopped);
    EXPECT_FALSE(t.emergency_stop);
    EXPECT_TRUE(check_constraints(t, c, RegularDriverRules{}).empty());
}

TEST(Regular, PropertyObeysRulesOnRandomCorridors)
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> offset(-30.0, 30.0);
    std::uniform_real_distribution<double> spacing(120.0, 900.0);
    std::uniform_real_distribution<double> exit(50.0, 250.0);
    RegularDriverRules r;
    for (int i = 0; i < 300; ++i) {
        const auto c = Corridor::with_timing(spacing(rng), offset(rng), offset(rng), exit(rng));
        const auto t = simulate_regular(c, VehicleParams{}, r);
        const auto issues = check_constraints(t, c, r);
        EXPECT_TRUE(issues.empty()) << i << ": " << (issues.empty() ? "" : issues.front());
        for (std::size_t k = 1; k < t.samples.size(); ++k) {
            ASSERT_GE(t.samples[k].t_s, t.samples[k - 1].t_s);
            ASSERT_GE(t.samples[k].x_m, t.samples[k - 1].x_m);
        }
    }
}

TEST(Checks, FlagsRedCrossingAndSpeeding)
{
    const auto c = Corridor::with_timing(400.0, 15.0, 15.0);
    Trajectory t;
    const double v = 88.5 / 3.6;
    for (double x = 0.0; x <= c.length() + 1e-9; x += 50.0) {
        t.samples.push_back({x / v, x, v});
    }
    const auto issues = check_constraints(t, c, RegularDriverRules{});
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].find("light 1"), std::string::npos);

    t.samples[3].v_m_s = v + 1.0;
    EXPECT_GE(check_constraints(t, c, RegularDriverRules{}).size(), 2u);
    EXPECT_FALSE(check_constraints(t, c, RegularDriverRules{}, 10.0).empty());
}
