#include "hemskit/devices.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemskit::flex {

namespace {
constexpr double kWaterHeatKjPerKgK = 4.186;

void note_violation(SimResult& result, double value, double lo, double hi) {
    const double overshoot = std::max(lo - value, value - hi);
    if (overshoot > 0.0) {
        result.within_bounds = false;
        result.violation_count += 1;
        result.worst_violation = std::max(result.worst_violation, overshoot);
    }
}

}  // namespace

void DeviceFleet::validate() const {
    if (ewh) {
        if (ewh->volume_l <= 0.0) throw std::invalid_argument("EWH volume must be positive");
        if (ewh->power_kw < 0.0) throw std::invalid_argument("EWH power must be >= 0");
        if (!(ewh->efficiency > 0.0 && ewh->efficiency <= 1.0))
            throw std::invalid_argument("EWH efficiency outside (0,1]");
        if (ewh->loss_w_per_k < 0.0) throw std::invalid_argument("EWH loss must be >= 0");
        if (!(ewh->temp_min_c < ewh->temp_max_c))
            throw std::invalid_argument("EWH temperature bounds unordered");
    }
    if (battery) {
        if (battery->charge_kw < 0.0 || battery->discharge_kw < 0.0)
            throw std::invalid_argument("battery power limits must be >= 0");
        if (!(battery->eff_charge > 0.0 && battery->eff_charge <= 1.0) ||
            !(battery->eff_discharge > 0.0 && battery->eff_discharge <= 1.0))
            throw std::invalid_argument("battery efficiency outside (0,1]");
        if (!(battery->soc_min_kwh <= battery->soc_max_kwh))
            throw std::invalid_argument("battery SOC bounds unordered");
        if (battery->soc_initial_kwh < battery->soc_min_kwh ||
            battery->soc_initial_kwh > battery->soc_max_kwh)
            throw std::invalid_argument("battery initial SOC outside bounds");
    }
    for (const auto& s : shiftables) {
        if (s.power_kw < 0.0) throw std::invalid_argument("shiftable power must be >= 0");
        if (s.duration_steps < 1) throw std::invalid_argument("shiftable duration must be >= 1");
        if (s.window_begin > s.window_end)
            throw std::invalid_argument("shiftable window empty");
        if (s.baseline_start < s.window_begin || s.baseline_start > s.window_end)
            throw std::invalid_argument("shiftable baseline start outside window");
    }
    if (pv_capacity_kw < 0.0) throw std::invalid_argument("PV capacity must be >= 0");
}

double DeviceFleet::max_power_swing() const {
    double swing = 0.0;
    if (battery) swing += std::max(battery->charge_kw, battery->discharge_kw);
    if (ewh) swing += ewh->power_kw;
    for (const auto& s : shiftables) swing += s.power_kw;
    return swing;
}

SimResult simulate_ewh(const EwhConfig& config, std::span<const double> control,
                       double dt_hours) {
    if (config.volume_l <= 0.0) throw std::invalid_argument("EWH volume must be positive");
    if (!(dt_hours > 0.0 && dt_hours <= 1.0))
        throw std::invalid_argument("EWH step must be in (0,1] hours");

    const double thermal_mass_kj = config.volume_l * kWaterHeatKjPerKgK;  // 1 L ~ 1 kg
    const double dt_s = dt_hours * 3600.0;
    SimResult result;
    result.trace.reserve(control.size() + 1);
    result.trace.push_back(config.initial_c);

    double temp = config.initial_c;
    for (std::size_t t = 0; t < control.size(); ++t) {
        const double u = std::clamp(control[t], 0.0, 1.0);
        const double heat_kw = config.efficiency * config.power_kw * u;
        const double loss_kw = config.loss_w_per_k / 1000.0 * (temp - config.ambient_c);
        const double draw_l_per_h =
            t < config.draw_l_per_h.size() ? config.draw_l_per_h[t] : 0.0;
        const double draw_kg_s = draw_l_per_h / 3600.0;
        const double draw_kw = draw_kg_s * kWaterHeatKjPerKgK * (temp - config.inlet_c);
        temp += dt_s * (heat_kw - loss_kw - draw_kw) / thermal_mass_kj;
        result.trace.push_back(temp);
        note_violation(result, temp, config.temp_min_c, config.temp_max_c);
    }
    return result;
}

SimResult simulate_battery(const BatteryConfig& config, std::span<const double> power_kw,
                           double dt_hours) {
    if (!(dt_hours > 0.0)) throw std::invalid_argument("battery step must be positive");
    SimResult result;
    result.trace.reserve(power_kw.size() + 1);
    result.trace.push_back(config.soc_initial_kwh);

    double soc = config.soc_initial_kwh;
    for (double p : power_kw) {
        if (p > config.charge_kw + 1e-12 || p < -(config.discharge_kw + 1e-12)) {
            result.within_bounds = false;
            result.violation_count += 1;
            result.worst_violation = std::max(
                result.worst_violation,
                std::max(p - config.charge_kw, -config.discharge_kw - p));
        }
        const double charge = std::max(p, 0.0);
        const double discharge = std::max(-p, 0.0);
        soc += config.eff_charge * charge * dt_hours - discharge * dt_hours / config.eff_discharge;
        result.trace.push_back(soc);
        note_violation(result, soc, config.soc_min_kwh, config.soc_max_kwh);
    }
    return result;
}

std::vector<double> baseline_ewh_control(const EwhConfig& config, std::size_t steps,
                                         double dt_hours) {
    const double setpoint = 0.5 * (config.temp_min_c + config.temp_max_c);
    const double thermal_mass_kj = config.volume_l * kWaterHeatKjPerKgK;
    const double dt_s = dt_hours * 3600.0;

    std::vector<double> control(steps, 0.0);
    double temp = config.initial_c;
    for (std::size_t t = 0; t < steps; ++t) {
        const double loss_kw = config.loss_w_per_k / 1000.0 * (temp - config.ambient_c);
        const double draw_l_per_h =
            t < config.draw_l_per_h.size() ? config.draw_l_per_h[t] : 0.0;
        const double draw_kw =
            draw_l_per_h / 3600.0 * kWaterHeatKjPerKgK * (temp - config.inlet_c);
        const double drift = dt_s * (-loss_kw - draw_kw) / thermal_mass_kj;
        // Heat the shortfall towards the setpoint, no more.
        double u = 0.0;
        if (config.power_kw > 0.0 && temp + drift < setpoint) {
            const double needed_kw =
                (setpoint - temp - drift) * thermal_mass_kj / (dt_s * config.efficiency);
            u = std::clamp(needed_kw / config.power_kw, 0.0, 1.0);
        }
        const double heat_kw = config.efficiency * config.power_kw * u;
        temp += dt_s * (heat_kw - loss_kw - draw_kw) / thermal_mass_kj;
        control[t] = u;
    }
    return control;
}

}  // namespace hemskit::flex
