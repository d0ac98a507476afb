#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ecodrive/errors.hpp"

namespace ecodrive {

/// One row of the C-rate dependent cycle-life fit.
struct DecayCoefficient {
    double c_rate = 0.0;                   // 1/h
    double pre_exponential = 0.0;          // M(c)
    double activation_energy_j_mol = 0.0;  // E_a(c)
};

/// Cycle-life fit for graphite/LiFePO4 cells: M at C/2, 2C, 6C and 10C with
/// E_a = 31700 - 370.3 c J/mol. Same rows as data/lfp_cycle_life.csv.
inline std::vector<DecayCoefficient> lfp_coefficients()
{
    auto ea = [](double c) { return 31700.0 - 370.3 * c; };
    return {
        {0.5, 31630.0, ea(0.5)},
        {2.0, 21681.0, ea(2.0)},
        {6.0, 12934.0, ea(6.0)},
        {10.0, 15512.0, ea(10.0)},
    };
}

/// Reads a coefficient table with header `c_rate,M,Ea_J_per_mol`.
inline std::vector<DecayCoefficient> parse_coefficient_csv(std::istream& in, const std::string& source = "<stream>")
{
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(source + ": empty coefficient file");
    }
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == '\r' || c == ' '; }), line.end());
    if (line != "c_rate,M,Ea_J_per_mol") {
        throw ConfigError(source + ": expected header c_rate,M,Ea_J_per_mol");
    }
    std::vector<DecayCoefficient> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        DecayCoefficient row;
        if (!(fields >> row.c_rate >> row.pre_exponential >> row.activation_energy_j_mol)) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected three numeric fields");
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<DecayCoefficient> load_coefficient_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open coefficient table " + path);
    }
    return parse_coefficient_csv(in, path);
}

/// Ah-throughput battery ageing model plus the pack economics needed to price it.
struct BatteryModel {
    double capacity_kwh = 54.0;
    double nominal_voltage_v = 350.0;
    double eol_capacity_loss = 0.20;  // fraction of capacity lost at end of life
    double gas_constant = 8.3144;     // J/mol/K
    double temperature_k = 298.15;
    double power_z = 0.55;
    std::vector<DecayCoefficient> coeff_table = lfp_coefficients();
    double decay_multiplier = 1.0;
    double pack_price_per_kwh = 125.0;
    // Capacity of the cell the coefficient fit was made on. The fit predicts
    // Ah throughput for that cell; the pack sees it scaled by capacity ratio.
    double reference_cell_ah = 2.2;
    double soh = 1.0;

    double capacity_ah() const { return capacity_kwh * 1000.0 / nominal_voltage_v; }

    void validate() const
    {
        if (!(capacity_kwh > 0.0) || !(nominal_voltage_v > 0.0) || !(pack_price_per_kwh > 0.0)) {
            throw ParameterError("battery capacity, voltage and price must be positive");
        }
        if (!(eol_capacity_loss > 0.0 && eol_capacity_loss < 1.0)) {
            throw ParameterError("battery.eol_capacity_loss must be in (0, 1)");
        }
        if (!(power_z > 0.0) || !(temperature_k > 0.0) || !(gas_constant > 0.0)) {
            throw ParameterError("battery power_z, temperature and gas constant must be positive");
        }
        if (!(decay_multiplier >= 0.0) || !(reference_cell_ah > 0.0)) {
            throw ParameterError("battery decay multiplier must be >= 0 and reference cell capacity > 0");
        }
        if (!(soh >= 0.0 && soh <= 1.0)) {
            throw ParameterError("battery.soh must be in [0, 1]");
        }
        if (coeff_table.empty()) {
            throw ConfigError("battery coefficient table is empty");
        }
        for (std::size_t i = 0; i < coeff_table.size(); ++i) {
            if (!(coeff_table[i].pre_exponential > 0.0) || !(coeff_table[i].c_rate >= 0.0)) {
                throw ConfigError("battery coefficient table: M must be positive and c_rate non-negative");
            }
            if (i > 0 && !(coeff_table[i].c_rate > coeff_table[i - 1].c_rate)) {
                throw ConfigError("battery coefficient table must be strictly sorted by c_rate");
            }
        }
    }
};

/// Discharge/charge rate in 1/h. Sign is dropped: regen ages the pack too.
inline double c_rate(double p_batt_w, const BatteryModel& b)
{
    return std::abs(p_batt_w) / (b.capacity_kwh * 1000.0);
}

/// Signed pack current under the constant-voltage model.
inline double current(double p_batt_w, const BatteryModel& b)
{
    return p_batt_w / b.nominal_voltage_v;
}

namespace detail {

struct InterpolatedCoefficient {
    double pre_exponential;
    double activation_energy_j_mol;
};

// M is interpolated in log space, E_a linearly; both clamp at the table ends.
inline InterpolatedCoefficient interpolate_coefficient(double c, const std::vector<DecayCoefficient>& table)
{
    if (table.empty()) {
        throw ConfigError("battery coefficient table is empty");
    }
    if (c <= table.front().c_rate) {
        return {table.front().pre_exponential, table.front().activation_energy_j_mol};
    }
    if (c >= table.back().c_rate) {
        return {table.back().pre_exponential, table.back().activation_energy_j_mol};
    }
    auto upper = std::upper_bound(table.begin(), table.end(), c,
                                  [](double value, const DecayCoefficient& row) { return value < row.c_rate; });
    const auto& hi = *upper;
    const auto& lo = *(upper - 1);
    const double f = (c - lo.c_rate) / (hi.c_rate - lo.c_rate);
    const double log_m = std::log(lo.pre_exponential) + f * (std::log(hi.pre_exponential) - std::log(lo.pre_exponential));
    return {std::exp(log_m), lo.activation_energy_j_mol + f * (hi.activation_energy_j_mol - lo.activation_energy_j_mol)};
}

}  // namespace detail

/// Total discharged Ah throughput to end of life at C-rate `c` for the
/// reference cell of the coefficient fit.
inline double lifetime_ah_throughput(double c, const BatteryModel& b)
{
    if (!(c >= 0.0)) {
        throw ParameterError("lifetime_ah_throughput: c-rate must be non-negative");
    }
    const auto coeff = detail::interpolate_coefficient(c, b.coeff_table);
    const double arrhenius = std::exp(-coeff.activation_energy_j_mol / (b.gas_constant * b.temperature_k));
    return std::pow(b.eol_capacity_loss * 100.0 / (coeff.pre_exponential * arrhenius), 1.0 / b.power_z);
}

/// Lifetime Ah throughput of the whole pack: the cell figure times the number
/// of reference cells that make up the pack capacity.
inline double pack_lifetime_ah_throughput(double c, const BatteryModel& b)
{
    return lifetime_ah_throughput(c, b) * b.capacity_ah() / b.reference_cell_ah;
}

/// State-of-health decay rate in 1/s (never positive).
inline double soh_decay_rate(double p_batt_w, const BatteryModel& b)
{
    if (p_batt_w == 0.0 || b.decay_multiplier == 0.0) {
        return 0.0;
    }
    const double amps = std::abs(current(p_batt_w, b));
    return -b.decay_multiplier * amps / (2.0 * pack_lifetime_ah_throughput(c_rate(p_batt_w, b), b)) / 3600.0;
}

/// Pack replacement cost accrued per second (USD/s, never negative).
inline double decay_cost_rate(double p_batt_w, const BatteryModel& b)
{
    return b.pack_price_per_kwh * b.capacity_kwh * std::abs(soh_decay_rate(p_batt_w, b));
}

}  // namespace ecodrive
