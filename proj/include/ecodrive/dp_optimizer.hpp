#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ecodrive/baseline_driver.hpp"
#include "ecodrive/battery.hpp"
#include "ecodrive/corridor.hpp"
#include "ecodrive/cost.hpp"
#include "ecodrive/errors.hpp"
#include "ecodrive/powertrain.hpp"
#include "ecodrive/trajectory.hpp"

namespace ecodrive {

enum class BudgetMode { Exact, Buffered };

/// Discretisation of the eco-driving dynamic program.
///
/// The time lattice is snapped so that one distance step at the speed limit
/// spans a whole number of fine bins. Speeds within `boundary_band_m_s` of the
/// limit live on the fine lattice (`boundary_time_step_s`); slower speeds live
/// on a coarser lattice that is an integer multiple of it (`time_step_s`).
struct DpGridSpec {
    double distance_step_m = 10.0;
    double speed_step_m_s = 0.5;
    double time_step_s = 0.04;
    double boundary_time_step_s = 0.02;
    double boundary_band_m_s = 1.0;
    BudgetMode time_budget_mode = BudgetMode::Exact;
    double time_buffer_frac = 0.03;
    double idle_power_w = 0.0;
    // In exact mode, retry once with the buffer when no path meets the budget.
    bool buffer_on_infeasible = true;
    // Adds sqrt(2 a_max k dx) to the speed grid so a full-throttle launch from a
    // stop line is representable; without them the grid lags the regular driver.
    bool launch_speeds = true;

    void validate() const
    {
        if (!(distance_step_m > 0.0) || !(speed_step_m_s > 0.0) || !(time_step_s > 0.0)
            || !(boundary_time_step_s > 0.0)) {
            throw ParameterError("grid steps must be positive");
        }
        if (boundary_time_step_s > time_step_s) {
            throw ParameterError("grid.boundary_time_step_s must not exceed grid.time_step_s");
        }
        if (!(boundary_band_m_s >= 0.0)) {
            throw ParameterError("grid.boundary_band_m_s must be non-negative");
        }
        if (!(time_buffer_frac >= 0.0 && time_buffer_frac <= 0.1)) {
            throw ParameterError("grid.time_buffer_frac must be in [0, 0.1]");
        }
        if (!(idle_power_w >= 0.0)) {
            throw ParameterError("grid.idle_power_w must be non-negative");
        }
    }
};

/// A node of the state graph: distance stage, fine time bin, speed bin.
struct DpState {
    std::size_t stage = 0;
    long time_bin = 0;
    std::size_t speed_bin = 0;

    friend bool operator==(const DpState&, const DpState&) = default;
};

/// Everything the optimizer needs for one scenario.
struct EcoProblem {
    Corridor corridor;
    VehicleParams vehicle;
    BatteryModel battery;
    Prices prices;
    RegularDriverRules rules;
    DpGridSpec grid;
    double time_budget_s = 0.0;
};

/// Trip-time budget: the regular driver's trip time, optionally padded.
inline double time_budget(const Corridor& c, const VehicleParams& v, const RegularDriverRules& r, const DpGridSpec& g)
{
    g.validate();
    const double trip = simulate_regular(c, v, r).trip_time();
    return g.time_budget_mode == BudgetMode::Buffered ? trip * (1.0 + g.time_buffer_frac) : trip;
}

enum class ArcStatus { Feasible, Acceleration, Duration, Signal, Budget, SpeedLimit, Topology };

inline const char* to_string(ArcStatus s)
{
    switch (s) {
    case ArcStatus::Feasible: return "feasible";
    case ArcStatus::Acceleration: return "acceleration";
    case ArcStatus::Duration: return "duration";
    case ArcStatus::Signal: return "signal";
    case ArcStatus::Budget: return "time budget";
    case ArcStatus::SpeedLimit: return "speed limit";
    case ArcStatus::Topology: return "topology";
    }
    return "unknown";
}

struct Transition {
    ArcStatus status = ArcStatus::Topology;
    ArcCost cost;
    bool wait = false;

    bool feasible() const { return status == ArcStatus::Feasible; }
};

/// Precomputed state space and arc tables for one EcoProblem.
class DpGrid {
public:
    struct Arc {
        bool accel_ok = false;
        long ceil_bins = 0;  // kinematic duration rounded up to fine bins
        ArcCost cost;
    };

    struct Options {
        bool ignore_signals = false;
        double budget_override_s = -1.0;
    };

    explicit DpGrid(const EcoProblem& p) : DpGrid(p, Options{}) {}

    DpGrid(const EcoProblem& p, Options opts) : problem_(p), opts_(opts)
    {
        const auto& c = p.corridor;
        c.validate();
        p.vehicle.validate();
        p.battery.validate();
        p.rules.validate();
        p.grid.validate();
        budget_s_ = opts.budget_override_s > 0.0 ? opts.budget_override_s : p.time_budget_s;
        if (!(budget_s_ > 0.0)) {
            throw ParameterError("time budget must be positive");
        }
        build_nodes();
        build_speeds();
        build_time_lattice();
        build_arcs();
        build_windows();
    }

    const EcoProblem& problem() const { return problem_; }
    std::size_t stage_count() const { return nodes_.size() - 1; }
    std::size_t node_count() const { return nodes_.size(); }
    double node_x(std::size_t i) const { return nodes_[i]; }
    std::size_t speed_count() const { return speeds_.size(); }
    std::size_t top_speed() const { return speeds_.size() - 1; }
    double speed(std::size_t j) const { return speeds_[j]; }
    double tau() const { return tau_; }
    long lattice(std::size_t j) const { return lattice_[j]; }
    long budget_bins() const { return budget_bins_; }
    double budget_s() const { return budget_s_; }
    long window_lo(std::size_t i) const { return lo_[i]; }
    long window_hi(std::size_t i) const { return hi_[i]; }
    int stop_line_at(std::size_t i) const { return stop_line_[i]; }
    const Arc& arc(std::size_t stage, std::size_t j, std::size_t j2) const
    {
        return tables_[table_of_stage_[stage]][j * speeds_.size() + j2];
    }
    const std::vector<std::size_t>& successors(std::size_t stage, std::size_t j) const
    {
        return succ_[table_of_stage_[stage]][j];
    }
    const ArcCost& wait_arc() const { return wait_; }

    /// Fine bin at which an arc leaving at `t` arrives at speed bin j2.
    long arrival_bin(long t, const Arc& a, std::size_t j2) const
    {
        const long m = lattice_[j2];
        const long raw = t + a.ceil_bins;
        return ((raw + m - 1) / m) * m;
    }

    /// True when a vehicle may leave the node of `stage` at fine bin t.
    bool departure_allowed(std::size_t stage, long t) const
    {
        const int light = stop_line_[stage];
        if (light < 0 || opts_.ignore_signals) {
            return true;
        }
        return crossing_allowed(problem_.corridor, static_cast<std::size_t>(light), static_cast<double>(t) * tau_);
    }

private:
    void build_nodes()
    {
        const auto& c = problem_.corridor;
        const double length = c.length();
        const double step = problem_.grid.distance_step_m;
        std::vector<double> xs;
        for (long k = 0;; ++k) {
            const double x = static_cast<double>(k) * step;
            if (x >= length - 1e-6) {
                break;
            }
            xs.push_back(x);
        }
        xs.push_back(length);
        for (const auto& s : c.signals) {
            xs.push_back(s.stop_line_m);
        }
        std::sort(xs.begin(), xs.end());
        for (double x : xs) {
            if (nodes_.empty() || x - nodes_.back() > 1e-6) {
                nodes_.push_back(x);
            } else {
                // Snap near-duplicates onto stop lines / exit so they are represented exactly.
                nodes_.back() = std::max(nodes_.back(), x);
            }
        }
        stop_line_.assign(nodes_.size(), -1);
        for (std::size_t k = 0; k < c.signals.size(); ++k) {
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                if (std::abs(nodes_[i] - c.signals[k].stop_line_m) <= 1e-6) {
                    nodes_[i] = c.signals[k].stop_line_m;
                    stop_line_[i] = static_cast<int>(k);
                }
            }
        }
    }

    void build_speeds()
    {
        const double limit = problem_.corridor.speed_limit_m_s;
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(limit / problem_.grid.speed_step_m_s - 1e-9)));
        const double dv = limit / static_cast<double>(n);
        speeds_.resize(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            speeds_[j] = static_cast<double>(j) * dv;
        }
        speeds_[n] = limit;
        if (problem_.grid.launch_speeds) {
            const double step = 2.0 * problem_.rules.accel_max_m_s2 * problem_.grid.distance_step_m;
            for (int k = 1;; ++k) {
                const double v = std::sqrt(step * k);
                if (v >= limit - 1e-6) {
                    break;
                }
                speeds_.push_back(v);
            }
            std::sort(speeds_.begin(), speeds_.end());
            speeds_.erase(std::unique(speeds_.begin(), speeds_.end(),
                                      [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                          speeds_.end());
        }
    }

    void build_time_lattice()
    {
        const auto& g = problem_.grid;
        const double cruise = g.distance_step_m / problem_.corridor.speed_limit_m_s;
        const double k = std::max(1.0, std::round(cruise / g.boundary_time_step_s));
        tau_ = cruise / k;
        const long coarse = std::max(1L, std::lround(g.time_step_s / tau_));
        const double limit = problem_.corridor.speed_limit_m_s;
        lattice_.resize(speeds_.size());
        for (std::size_t j = 0; j < speeds_.size(); ++j) {
            lattice_[j] = speeds_[j] >= limit - g.boundary_band_m_s - 1e-9 ? 1 : coarse;
        }
        budget_bins_ = static_cast<long>(std::floor(budget_s_ / tau_ + 1e-7));
    }

    void build_arcs()
    {
        const auto& p = problem_;
        const std::size_t n = speeds_.size();
        std::map<std::pair<double, double>, std::size_t> memo;
        table_of_stage_.resize(stage_count());
        for (std::size_t i = 0; i < stage_count(); ++i) {
            const double len = nodes_[i + 1] - nodes_[i];
            const double grade = p.corridor.grade_profile.at(nodes_[i] + 0.5 * len);
            auto key = std::make_pair(len, grade);
            auto it = memo.find(key);
            if (it != memo.end()) {
                table_of_stage_[i] = it->second;
                continue;
            }
            std::vector<Arc> table(n * n);
            std::vector<std::vector<std::size_t>> succ(n);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t j2 = 0; j2 < n; ++j2) {
                    Arc& a = table[j * n + j2];
                    const double v0 = speeds_[j];
                    const double v1 = speeds_[j2];
                    if (v0 + v1 <= 0.0) {
                        continue;
                    }
                    const double accel = (v1 * v1 - v0 * v0) / (2.0 * len);
                    a.accel_ok = accel <= p.rules.accel_max_m_s2 + 1e-9 && accel >= p.rules.decel_min_m_s2 - 1e-9;
                    a.cost = motion_cost(v0, v1, len, grade, p.vehicle, p.battery, p.prices);
                    a.ceil_bins = static_cast<long>(std::ceil(a.cost.duration_s / tau_ - 1e-7));
                    if (a.accel_ok) {
                        succ[j].push_back(j2);
                    }
                }
            }
            memo.emplace(key, tables_.size());
            table_of_stage_[i] = tables_.size();
            tables_.push_back(std::move(table));
            succ_.push_back(std::move(succ));
        }
        wait_ = wait_cost(static_cast<double>(lattice_[0]) * tau_, p.grid.idle_power_w, p.battery, p.prices);
    }

    void build_windows()
    {
        const double limit = problem_.corridor.speed_limit_m_s;
        const double length = problem_.corridor.length();
        lo_.resize(nodes_.size());
        hi_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            lo_[i] = static_cast<long>(std::ceil(nodes_[i] / (limit * tau_) - 1e-7));
            hi_[i] = static_cast<long>(std::floor(static_cast<double>(budget_bins_) - (length - nodes_[i]) / (limit * tau_) + 1e-7));
        }
    }

    EcoProblem problem_;
    Options opts_;
    double budget_s_ = 0.0;
    std::vector<double> nodes_;
    std::vector<int> stop_line_;
    std::vector<double> speeds_;
    double tau_ = 0.0;
    std::vector<long> lattice_;
    long budget_bins_ = 0;
    std::vector<long> lo_;
    std::vector<long> hi_;
    std::vector<std::vector<Arc>> tables_;
    std::vector<std::vector<std::vector<std::size_t>>> succ_;
    std::vector<std::size_t> table_of_stage_;
    ArcCost wait_;
};

/// Evaluates one candidate arc between grid states. Motion arcs advance one
/// stage; wait arcs stay on a stop-line stage at zero speed and advance one
/// lattice step of the zero-speed bin.
inline Transition transition(const DpGrid& g, const DpState& from, const DpState& to)
{
    Transition out;
    if (from.speed_bin >= g.speed_count() || to.speed_bin >= g.speed_count()) {
        out.status = ArcStatus::SpeedLimit;
        return out;
    }
    if (from.stage >= g.node_count() || to.stage >= g.node_count()) {
        return out;
    }
    if (to.stage == from.stage) {
        if (g.stop_line_at(from.stage) < 0 || from.speed_bin != 0 || to.speed_bin != 0
            || to.time_bin != from.time_bin + g.lattice(0)) {
            return out;
        }
        if (to.time_bin > g.budget_bins()) {
            out.status = ArcStatus::Budget;
            return out;
        }
        out.status = ArcStatus::Feasible;
        out.wait = true;
        out.cost = g.wait_arc();
        return out;
    }
    if (to.stage != from.stage + 1) {
        return out;
    }
    const auto& arc = g.arc(from.stage, from.speed_bin, to.speed_bin);
    if (g.speed(from.speed_bin) + g.speed(to.speed_bin) <= 0.0) {
        return out;
    }
    if (!arc.accel_ok) {
        out.status = ArcStatus::Acceleration;
        return out;
    }
    if (to.time_bin != g.arrival_bin(from.time_bin, arc, to.speed_bin)) {
        out.status = ArcStatus::Duration;
        return out;
    }
    if (!g.departure_allowed(from.stage, from.time_bin)) {
        out.status = ArcStatus::Signal;
        return out;
    }
    if (to.time_bin > g.budget_bins()) {
        out.status = ArcStatus::Budget;
        return out;
    }
    out.status = ArcStatus::Feasible;
    out.cost = arc.cost;
    return out;
}

/// Optimal trajectory and its cost.
struct EcoSolution {
    Trajectory trajectory;
    CostBreakdown cost;
    std::vector<DpState> path;
    double dp_total_usd = 0.0;  // value function at the start state
    double time_budget_s = 0.0;
    bool budget_relaxed = false;
};

/// Receives the value function of each stage during backward induction.
using ValueSink = std::function<void(std::size_t stage, double x_m, double t_s, double v_m_s, double value_usd)>;

namespace detail {

inline constexpr std::uint8_t kNoDecision = 255;
inline constexpr std::uint8_t kWaitDecision = 254;

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    long dest_time = std::numeric_limits<long>::max();
    std::size_t dest_speed = 0;
    std::uint8_t decision = kNoDecision;

    // Lower cost wins; ties go to the earlier arrival, then the higher speed.
    bool improves_on(const Candidate& o) const
    {
        if (value != o.value) {
            return value < o.value;
        }
        if (dest_time != o.dest_time) {
            return dest_time < o.dest_time;
        }
        return dest_speed > o.dest_speed;
    }
};

struct Induction {
    std::vector<std::vector<std::uint8_t>> decisions;
    double start_value = std::numeric_limits<double>::infinity();
};

inline Induction backward_induction(const DpGrid& g, const ValueSink& sink)
{
    const std::size_t n_speed = g.speed_count();
    if (n_speed > 250) {
        throw ParameterError("speed grid too fine: at most 250 speed bins are supported");
    }
    const std::size_t last = g.stage_count();
    const double inf = std::numeric_limits<double>::infinity();
    Induction out;
    out.decisions.resize(last);
    for (std::size_t i = 0; i <= last; ++i) {
        if (g.window_hi(i) < g.window_lo(i)) {
            return out;
        }
    }

    auto width = [&](std::size_t i) { return static_cast<std::size_t>(g.window_hi(i) - g.window_lo(i) + 1); };
    std::vector<double> next(width(last) * n_speed, inf);
    for (long t = g.window_lo(last); t <= g.window_hi(last); ++t) {
        if (t % g.lattice(g.top_speed()) == 0) {
            next[static_cast<std::size_t>(t - g.window_lo(last)) * n_speed + g.top_speed()] = 0.0;
        }
    }
    if (sink) {
        for (long t = g.window_lo(last); t <= g.window_hi(last); ++t) {
            sink(last, g.node_x(last), static_cast<double>(t) * g.tau(), g.speed(g.top_speed()), 0.0);
        }
    }

    std::vector<double> cur;
    std::vector<Candidate> motion_best;
    for (std::size_t ii = last; ii-- > 0;) {
        const long lo = g.window_lo(ii);
        const long hi = g.window_hi(ii);
        const long lo_next = g.window_lo(ii + 1);
        const long hi_next = g.window_hi(ii + 1);
        const std::size_t w = width(ii);
        cur.assign(w * n_speed, inf);
        auto& dec = out.decisions[ii];
        dec.assign(w * n_speed, kNoDecision);
        const bool stop_line = g.stop_line_at(ii) >= 0;
        if (stop_line) {
            motion_best.assign(w, Candidate{});
        }

        for (std::size_t j = 0; j < n_speed; ++j) {
            const long m = g.lattice(j);
            const auto& succ = g.successors(ii, j);
            const long first = ((lo + m - 1) / m) * m;
            for (long t = first; t <= hi; t += m) {
                if (!g.departure_allowed(ii, t)) {
                    continue;
                }
                Candidate best;
                for (std::size_t j2 : succ) {
                    const auto& a = g.arc(ii, j, j2);
                    const long d = g.arrival_bin(t, a, j2);
                    if (d > hi_next || d < lo_next) {
                        continue;
                    }
                    const double tail = next[static_cast<std::size_t>(d - lo_next) * n_speed + j2];
                    if (tail == inf) {
                        continue;
                    }
                    Candidate c{a.cost.total_usd + tail, d, j2, static_cast<std::uint8_t>(j2)};
                    if (c.improves_on(best)) {
                        best = c;
                    }
                }
                const auto idx = static_cast<std::size_t>(t - lo) * n_speed + j;
                cur[idx] = best.value;
                dec[idx] = best.decision;
                if (stop_line && j == 0) {
                    motion_best[static_cast<std::size_t>(t - lo)] = best;
                }
            }
        }

        if (stop_line) {
            const long m0 = g.lattice(0);
            const double wait_usd = g.wait_arc().total_usd;
            const long first = ((lo + m0 - 1) / m0) * m0;
            long top = first;
            while (top + m0 <= hi) {
                top += m0;
            }
            for (long t = top; t >= first; t -= m0) {
                const long t2 = t + m0;
                if (t2 > hi) {
                    continue;
                }
                const double tail = cur[static_cast<std::size_t>(t2 - lo) * n_speed];
                if (tail == inf) {
                    continue;
                }
                Candidate wait{wait_usd + tail, t2, 0, kWaitDecision};
                auto& best = motion_best[static_cast<std::size_t>(t - lo)];
                if (wait.improves_on(best)) {
                    best = wait;
                    const auto idx = static_cast<std::size_t>(t - lo) * n_speed;
                    cur[idx] = wait.value;
                    dec[idx] = kWaitDecision;
                }
            }
        }

        if (sink) {
            for (long t = lo; t <= hi; ++t) {
                for (std::size_t j = 0; j < n_speed; ++j) {
                    const double val = cur[static_cast<std::size_t>(t - lo) * n_speed + j];
                    if (val != inf) {
                        sink(ii, g.node_x(ii), static_cast<double>(t) * g.tau(), g.speed(j), val);
                    }
                }
            }
        }
        next.swap(cur);
    }
    if (g.window_lo(0) <= 0 && 0 <= g.window_hi(0)) {
        out.start_value = next[static_cast<std::size_t>(0 - g.window_lo(0)) * n_speed + g.top_speed()];
    }
    return out;
}

inline bool feasible_at_all(const EcoProblem& p, DpGrid::Options opts)
{
    return std::isfinite(backward_induction(DpGrid(p, opts), {}).start_value);
}

inline std::string diagnose_infeasibility(const EcoProblem& p)
{
    if (feasible_at_all(p, DpGrid::Options{false, p.time_budget_s * (1.0 + p.grid.time_buffer_frac)})) {
        return to_string(ArcStatus::Budget);
    }
    if (feasible_at_all(p, DpGrid::Options{true, -1.0})) {
        return to_string(ArcStatus::Signal);
    }
    if (feasible_at_all(p, DpGrid::Options{false, p.time_budget_s * 4.0 + 60.0})) {
        return to_string(ArcStatus::Budget);
    }
    return to_string(ArcStatus::Acceleration);
}

}  // namespace detail

/// Converts a state path into a time-stamped trajectory (grid times at the nodes).
inline Trajectory path_to_trajectory(const DpGrid& g, const std::vector<DpState>& path)
{
    Trajectory traj;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& s = path[k];
        const double t = static_cast<double>(s.time_bin) * g.tau();
        const double x = g.node_x(s.stage);
        const double v = g.speed(s.speed_bin);
        const bool is_wait = k > 0 && path[k - 1].stage == s.stage;
        const bool prev_was_wait = k > 1 && path[k - 2].stage == path[k - 1].stage;
        if (is_wait && prev_was_wait) {
            traj.samples.back().t_s = t;
            continue;
        }
        traj.push(t, x, v);
    }
    return traj;
}

/// Cost-optimal speed trajectory by backward induction over distance stages.
///
/// The vehicle enters at the speed limit at t = 0 and must leave the
/// corridor at the speed limit no later than the time budget. Throws
/// InfeasibleError naming the binding constraint when no grid path exists.
inline EcoSolution optimize(const EcoProblem& p, const ValueSink& sink = {})
{
    DpGrid g(p);
    auto ind = detail::backward_induction(g, sink);
    bool relaxed = false;
    if (!std::isfinite(ind.start_value) && p.grid.time_budget_mode == BudgetMode::Exact && p.grid.buffer_on_infeasible
        && p.grid.time_buffer_frac > 0.0) {
        g = DpGrid(p, DpGrid::Options{false, p.time_budget_s * (1.0 + p.grid.time_buffer_frac)});
        ind = detail::backward_induction(g, sink);
        relaxed = true;
    }
    if (!std::isfinite(ind.start_value)) {
        const std::string binding = detail::diagnose_infeasibility(p);
        throw InfeasibleError(binding, "no feasible eco-driving trajectory (binding constraint: " + binding + ")");
    }

    EcoSolution sol;
    sol.budget_relaxed = relaxed;
    sol.dp_total_usd = ind.start_value;
    sol.time_budget_s = g.budget_s();
    DpState s{0, 0, g.top_speed()};
    sol.path.push_back(s);
    const std::size_t n_speed = g.speed_count();
    while (s.stage < g.stage_count()) {
        const auto idx = static_cast<std::size_t>(s.time_bin - g.window_lo(s.stage)) * n_speed + s.speed_bin;
        const std::uint8_t d = ind.decisions[s.stage][idx];
        if (d == detail::kNoDecision) {
            throw std::logic_error("optimize: broken decision chain");
        }
        if (d == detail::kWaitDecision) {
            s.time_bin += g.lattice(0);
        } else {
            const auto& a = g.arc(s.stage, s.speed_bin, d);
            s.time_bin = g.arrival_bin(s.time_bin, a, d);
            s.speed_bin = d;
            ++s.stage;
        }
        sol.path.push_back(s);
    }

    sol.trajectory = path_to_trajectory(g, sol.path);
    if (relaxed) {
        sol.trajectory.diagnostics.push_back("exact time budget infeasible on the grid; budget relaxed by "
                                             + std::to_string(p.grid.time_buffer_frac * 100.0) + "%");
    }
    ConsistencyTolerance loose{1.0, 1.0};
    sol.cost = evaluate_trajectory(sol.trajectory, p.vehicle, p.battery, p.prices, p.corridor.grade_profile,
                                   p.grid.idle_power_w, loose);
    annotate_trajectory(sol.trajectory, p.vehicle, p.battery, p.prices, p.corridor.grade_profile,
                        p.grid.idle_power_w);
    return sol;
}

/// Outcome of checking the DP against exhaustive path enumeration.
struct EnumerationReport {
    bool dp_feasible = false;
    bool brute_feasible = false;
    double dp_total_usd = std::numeric_limits<double>::infinity();
    double brute_total_usd = std::numeric_limits<double>::infinity();
    std::vector<DpState> dp_path;
    std::vector<DpState> brute_path;
    std::size_t paths_enumerated = 0;

    /// Both infeasible, or both feasible with bit-identical cost.
    bool matches() const
    {
        if (dp_feasible != brute_feasible) {
            return false;
        }
        return !dp_feasible || dp_total_usd == brute_total_usd;
    }
};

/// Exhaustively enumerates every grid path of a tiny problem and compares
/// the cheapest against the DP optimum. Candidate arcs are generated by
/// trying every (stage, time bin, speed bin) successor through `transition`.
inline EnumerationReport verify_against_enumeration(const EcoProblem& p, std::size_t max_paths = 10'000'000)
{
    EnumerationReport rep;
    DpGrid g(p);
    try {
        auto sol = optimize(p);
        rep.dp_feasible = true;
        rep.dp_total_usd = sol.dp_total_usd;
        rep.dp_path = sol.path;
    } catch (const InfeasibleError&) {
        rep.dp_feasible = false;
    }

    std::vector<DpState> path{DpState{0, 0, g.top_speed()}};
    std::vector<double> arc_costs;
    std::size_t visited = 0;

    std::function<void()> dfs = [&]() {
        if (++visited > max_paths) {
            throw EnumerationBudgetError("enumeration budget of " + std::to_string(max_paths) + " paths exceeded");
        }
        const DpState from = path.back();
        if (from.stage == g.stage_count()) {
            if (from.speed_bin != g.top_speed()) {
                return;
            }
            ++rep.paths_enumerated;
            // Fold from the exit backwards, the order in which cost-to-go accumulates.
            double total = 0.0;
            for (std::size_t k = arc_costs.size(); k-- > 0;) {
                total = arc_costs[k] + total;
            }
            if (!rep.brute_feasible || total < rep.brute_total_usd) {
                rep.brute_feasible = true;
                rep.brute_total_usd = total;
                rep.brute_path = path;
            }
            return;
        }
        std::vector<DpState> candidates;
        candidates.push_back(DpState{from.stage, from.time_bin + g.lattice(0), 0});
        for (std::size_t j2 = 0; j2 < g.speed_count(); ++j2) {
            for (long t2 = 0; t2 <= g.budget_bins(); ++t2) {
                candidates.push_back(DpState{from.stage + 1, t2, j2});
            }
        }
        for (const auto& to : candidates) {
            const auto tr = transition(g, from, to);
            if (!tr.feasible()) {
                continue;
            }
            path.push_back(to);
            arc_costs.push_back(tr.cost.total_usd);
            dfs();
            arc_costs.pop_back();
            path.pop_back();
        }
    };
    dfs();
    if (!rep.brute_feasible) {
        rep.brute_total_usd = std::numeric_limits<double>::infinity();
    }
    return rep;
}

}  // namespace ecodrive
