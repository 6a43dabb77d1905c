#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hemskit::flex {

/// Electric water heater, first-order thermal model around a mixed tank.
struct EwhConfig {
    double volume_l = 100.0;
    double power_kw = 2.0;
    double efficiency = 1.0;      // electric-to-thermal, (0,1]
    double loss_w_per_k = 2.5;    // UA envelope loss
    double temp_min_c = 45.0;
    double temp_max_c = 75.0;
    double ambient_c = 20.0;
    double inlet_c = 15.0;
    double initial_c = 55.0;
    std::vector<double> draw_l_per_h;  // hot-water draws per step; empty = none
};

struct BatteryConfig {
    double charge_kw = 2.0;
    double discharge_kw = 2.0;
    double eff_charge = 0.95;
    double eff_discharge = 0.95;
    double soc_min_kwh = 0.5;
    double soc_max_kwh = 5.0;
    double soc_initial_kwh = 2.5;
    /// User-defined constraint: charge only from local PV surplus, so spilled
    /// generation is absorbed first.
    bool charge_from_surplus_only = true;
};

/// Dishwasher/washing machine/dryer style load: average power over an average
/// operating time, movable inside an allowed start window.
struct ShiftableConfig {
    std::string name = "load";
    double power_kw = 1.0;
    int duration_steps = 2;
    int window_begin = 0;   // earliest allowed start
    int window_end = 0;     // latest allowed start, inclusive
    int baseline_start = 0;
};

struct DeviceFleet {
    std::optional<EwhConfig> ewh;
    std::optional<BatteryConfig> battery;
    std::vector<ShiftableConfig> shiftables;
    double pv_capacity_kw = 0.0;

    void validate() const;

    /// Largest instantaneous deviation (kW) the fleet could add or shed.
    double max_power_swing() const;
};

struct SimResult {
    std::vector<double> trace;  // length T+1, trace[0] is the initial state
    bool within_bounds = true;
    int violation_count = 0;
    double worst_violation = 0.0;
};

/// Tank temperature under a [0,1] heating-fraction control. dt_hours <= 1.
SimResult simulate_ewh(const EwhConfig& config, std::span<const double> control,
                       double dt_hours);

/// State of charge under a signed power schedule (kW, charging positive).
SimResult simulate_battery(const BatteryConfig& config, std::span<const double> power_kw,
                           double dt_hours);

/// Heating fractions that hold the tank at the comfort midpoint: heat exactly
/// the shortfall towards the setpoint, clamped to [0,1]. Deterministic and
/// violation-free for sane configs.
std::vector<double> baseline_ewh_control(const EwhConfig& config, std::size_t steps,
                                         double dt_hours);

}  // namespace hemskit::flex
