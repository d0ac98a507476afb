#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ecodrive/errors.hpp"

namespace ecodrive {

/// Longitudinal vehicle model parameters. Defaults describe the standard-range
/// passenger EV (1611 kg) used throughout the studies.
struct VehicleParams {
    double mass_kg = 1611.0;
    double rolling_c1 = 0.0065;        // dimensionless
    double rolling_c2 = 4.92e-5;       // s/m
    double frontal_area_m2 = 2.22;
    double drag_coeff = 0.23;
    double air_density_kg_m3 = 1.2;
    double gravity_m_s2 = 9.81;
    double eff_trans = 0.8536;
    double eff_motor = 0.90;
    double eff_inverter = 0.95;
    bool regen_enabled = true;
    double regen_power_cap_w = 60000.0;

    void validate() const
    {
        auto positive = [](double value, const char* name) {
            if (!std::isfinite(value) || value <= 0.0) {
                throw ParameterError(std::string{"vehicle."} + name + " must be positive and finite");
            }
        };
        auto efficiency = [](double value, const char* name) {
            if (!std::isfinite(value) || value <= 0.0 || value > 1.0) {
                throw ParameterError(std::string{"vehicle."} + name + " must be in (0, 1]");
            }
        };
        positive(mass_kg, "mass_kg");
        positive(frontal_area_m2, "frontal_area_m2");
        positive(air_density_kg_m3, "air_density_kg_m3");
        positive(gravity_m_s2, "gravity_m_s2");
        if (!std::isfinite(drag_coeff) || drag_coeff < 0.0) {
            throw ParameterError("vehicle.drag_coeff must be non-negative");
        }
        if (!std::isfinite(rolling_c1) || rolling_c1 < 0.0 || !std::isfinite(rolling_c2) || rolling_c2 < 0.0) {
            throw ParameterError("vehicle rolling coefficients must be non-negative");
        }
        efficiency(eff_trans, "eff_trans");
        efficiency(eff_motor, "eff_motor");
        efficiency(eff_inverter, "eff_inverter");
        if (!std::isfinite(regen_power_cap_w) || regen_power_cap_w < 0.0) {
            throw ParameterError("vehicle.regen_power_cap_w must be non-negative");
        }
    }

    double drivetrain_efficiency() const { return eff_trans * eff_motor * eff_inverter; }
};

/// Road-load power at the wheels (W), positive when the motor must drive.
inline double wheel_power(double v_m_s, double a_m_s2, double grade, const VehicleParams& p)
{
    const double theta = std::atan(grade);
    const double weight = p.mass_kg * p.gravity_m_s2;
    const double force = p.mass_kg * a_m_s2
                         + weight * std::sin(theta)
                         + (p.rolling_c1 + p.rolling_c2 * v_m_s) * weight * std::cos(theta)
                         + 0.5 * p.air_density_kg_m3 * p.frontal_area_m2 * p.drag_coeff * v_m_s * v_m_s;
    return force * v_m_s;
}

/// Battery-side power (W) for instantaneous speed, acceleration and grade.
///
/// Traction power is divided by the efficiency chain. Negative wheel power is
/// recuperated through the same chain (multiplied) and capped at
/// `regen_power_cap_w`; the remainder goes to the friction brakes. With regen
/// disabled all negative wheel power is dissipated and the battery sees 0 W.
inline double power_demand(double v_m_s, double a_m_s2, double grade, const VehicleParams& p)
{
    p.validate();
    if (!(v_m_s >= 0.0)) {
        throw ParameterError("power_demand: speed must be non-negative");
    }
    const double wheel = wheel_power(v_m_s, a_m_s2, grade, p);
    const double eta = p.drivetrain_efficiency();
    if (wheel >= 0.0) {
        return wheel / eta;
    }
    if (!p.regen_enabled) {
        return 0.0;
    }
    return std::max(wheel * eta, -p.regen_power_cap_w);
}

/// Constant-acceleration stretch of road between two speeds.
struct KinematicSegment {
    double v_start_m_s = 0.0;
    double v_end_m_s = 0.0;
    double length_m = 0.0;
    double grade = 0.0;
};

struct SegmentEnergy {
    double duration_s = 0.0;
    double energy_j = 0.0;
    double mean_power_w = 0.0;
    double accel_m_s2 = 0.0;
};

/// Integrates battery energy over a constant-acceleration segment using the
/// midpoint speed. Exact for constant speed.
inline SegmentEnergy segment_energy(const KinematicSegment& seg, const VehicleParams& p)
{
    if (!(seg.v_start_m_s >= 0.0) || !(seg.v_end_m_s >= 0.0)) {
        throw ParameterError("segment_energy: speeds must be non-negative");
    }
    if (!(seg.length_m > 0.0) || !std::isfinite(seg.length_m)) {
        throw ParameterError("segment_energy: length must be positive");
    }
    const double speed_sum = seg.v_start_m_s + seg.v_end_m_s;
    if (speed_sum <= 0.0) {
        throw ZeroDurationError("segment_energy: both end speeds are zero, duration undefined");
    }
    SegmentEnergy out;
    out.accel_m_s2 = (seg.v_end_m_s * seg.v_end_m_s - seg.v_start_m_s * seg.v_start_m_s) / (2.0 * seg.length_m);
    out.duration_s = 2.0 * seg.length_m / speed_sum;
    out.mean_power_w = power_demand(0.5 * speed_sum, out.accel_m_s2, seg.grade, p);
    out.energy_j = out.mean_power_w * out.duration_s;
    return out;
}

}  // namespace ecodrive
