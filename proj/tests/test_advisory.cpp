#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "ecodrive/advisory.hpp"
#include "ecodrive/checks.hpp"
#include "ecodrive/study.hpp"

using namespace ecodrive;

namespace {

constexpr double kLimit = 88.5 / 3.6;

SignalSchedule far_green() { return SignalSchedule{0.0, 1e4, 30.0, 2e4}; }

AdvisoryConfig single_light()
{
    AdvisoryConfig cfg;
    cfg.lookahead_lights = 1;
    return cfg;
}

StudyConfig field_config()
{
    return load_config(std::string(ECODRIVE_SOURCE_DIR) + "/configs/field_test.json");
}

bool full_stop_at(const Trajectory& t, double line)
{
    for (const auto& s : t.samples) {
        if (s.v_m_s == 0.0 && std::abs(s.x_m - line) < 1e-6) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST(Recommend, SlowToArriveOnGreen)
{
    // Red until t = 20, stop line 300 m ahead.
    const auto c = Corridor::make(300.0, 400.0, 100.0, kLimit, SignalSchedule{0.0, -10.0, 30.0, 30.0}, far_green());
    const auto a = recommend(0.0, kLimit, 0.0, c, single_light());
    EXPECT_NEAR(a.target_speed_m_s, 15.0, 1e-9);
    EXPECT_EQ(a.action, Action::Brake);
}

TEST(Recommend, ClearsGreenAtLimit)
{
    const auto c = Corridor::make(100.0, 400.0, 100.0, kLimit, SignalSchedule{0.0, 10.0, 30.0, 30.0}, far_green());
    const auto a = recommend(0.0, kLimit, 0.0, c, single_light());
    EXPECT_DOUBLE_EQ(a.target_speed_m_s, kLimit);
    EXPECT_EQ(a.action, Action::Cruise);
}

TEST(Recommend, ClampsToMinimumCruise)
{
    const auto c = Corridor::make(60.0, 400.0, 100.0, kLimit, SignalSchedule{0.0, 0.0, 30.0, 30.0}, far_green());
    const auto a = recommend(0.0, 5.0, 0.0, c, single_light());
    EXPECT_DOUBLE_EQ(a.target_speed_m_s, 4.5);
}

TEST(Recommend, AfterLastLightAdvisesLimit)
{
    const auto c = Corridor::with_timing(400.0, 0.0, 0.0);
    const auto a = recommend(550.0, 10.0, 5.0, c, AdvisoryConfig{});
    EXPECT_DOUBLE_EQ(a.target_speed_m_s, kLimit);
    EXPECT_EQ(a.action, Action::Accelerate);
}

TEST(Recommend, LookaheadNeverBreaksFirstLight)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> offset(-30.0, 30.0);
    std::uniform_real_distribution<double> pos(0.0, 95.0);
    std::uniform_real_distribution<double> speed(5.0, kLimit);
    for (int i = 0; i < 500; ++i) {
        const auto c = Corridor::with_timing(400.0, offset(rng), offset(rng));
        const double x = pos(rng);
        const auto a = recommend(x, speed(rng), 0.0, c, AdvisoryConfig{});
        EXPECT_GE(a.target_speed_m_s, 4.5);
        EXPECT_LE(a.target_speed_m_s, kLimit);
        const auto one = recommend(x, a.target_speed_m_s, 0.0, c, single_light());
        if (a.target_speed_m_s < one.target_speed_m_s) {
            EXPECT_TRUE(crossing_allowed(c, 0, (100.0 - x) / a.target_speed_m_s));
        }
    }
}

TEST(Recommend, RejectsPositionOutsideCorridor)
{
    EXPECT_THROW(recommend(-1.0, 10.0, 0.0, Corridor::with_timing(400.0, 0.0, 0.0), AdvisoryConfig{}),
                 ParameterError);
}

TEST(AdvisedDriver, FieldScenarioAvoidsSecondStop)
{
    const auto cfg = field_config();
    const auto cmp = run_advisory(cfg, cfg.driver_following);
    EXPECT_TRUE(full_stop_at(cmp.regular, cfg.corridor.signals[1].stop_line_m));
    EXPECT_FALSE(full_stop_at(cmp.advised.trajectory, cfg.corridor.signals[1].stop_line_m));
    EXPECT_GE(cmp.reduction_pct(), 20.0);
    EXPECT_LE(cmp.reduction_pct(), 45.0);
    EXPECT_GT(cmp.energy_reduction_pct(), 0.0);
    EXPECT_GT(cmp.decay_reduction_pct(), 0.0);
    EXPECT_TRUE(check_constraints(cmp.advised.trajectory, cfg.corridor, cfg.driver).empty());
}

TEST(AdvisedDriver, RecommendationsAtUpdateRate)
{
    const auto cfg = field_config();
    const auto cmp = run_advisory(cfg, cfg.driver_following);
    ASSERT_GE(cmp.advised.log.size(), 2u);
    for (std::size_t i = 1; i < cmp.advised.log.size(); ++i) {
        EXPECT_NEAR(cmp.advised.log[i].t_s - cmp.advised.log[i - 1].t_s, 1.0, 1e-9);
    }
    std::ostringstream out;
    write_recommendation_csv(out, cmp.advised.log);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kRecommendationCsvHeader);
}

TEST(AdvisedDriver, ConvergesToIdealFollower)
{
    const auto cfg = field_config();
    const auto ideal = run_advisory(cfg, DriverFollowingModel::ideal());
    const auto near = run_advisory(cfg, DriverFollowingModel{1e-3, 1e-3, 0.0, 10.0});
    EXPECT_NEAR(near.advised_cost.total_usd, ideal.advised_cost.total_usd, 0.005 * ideal.advised_cost.total_usd);
    EXPECT_NEAR(near.advised.trajectory.trip_time(), ideal.advised.trajectory.trip_time(), 0.2);
}

TEST(AdvisedDriver, PropertySafeOnRandomCorridors)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> offset(-30.0, 30.0);
    std::uniform_real_distribution<double> spacing(150.0, 900.0);
    std::uniform_real_distribution<double> delay(0.0, 2.0);
    std::uniform_real_distribution<double> tc(0.0, 4.0);
    std::uniform_real_distribution<double> drift(-1.0, 1.0);
    RegularDriverRules r;
    for (int i = 0; i < 200; ++i) {
        const auto c = Corridor::with_timing(spacing(rng), offset(rng), offset(rng));
        const DriverFollowingModel d{delay(rng), tc(rng), drift(rng), 10.0};
        const auto run = simulate_advised_driver(c, VehicleParams{}, d, AdvisoryConfig{}, r);
        const auto issues = check_constraints(run.trajectory, c, r);
        EXPECT_TRUE(issues.empty()) << i << ": " << issues.front();
    }
}

TEST(AdvisedDriver, InvalidModelRejected)
{
    DriverFollowingModel d;
    d.reaction_delay_s = -1.0;
    EXPECT_THROW(simulate_advised_driver(Corridor::with_timing(400.0, 0.0, 0.0), VehicleParams{}, d, AdvisoryConfig{}),
                 ParameterError);
    AdvisoryConfig cfg;
    cfg.min_cruise_m_s = 0.0;
    EXPECT_THROW(cfg.validate(), ParameterError);
}
