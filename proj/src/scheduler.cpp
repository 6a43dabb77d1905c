#include "hemskit/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hemskit::hems {

void Tariff::validate() const {
    if (prices.empty()) throw std::invalid_argument("tariff has no periods");
    for (double p : prices)
        if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("invalid tariff price");
    if (feed_in < 0.0) throw std::invalid_argument("feed-in must be >= 0");
}

double schedule_cost(std::span<const double> net_kw, const Tariff& tariff, double dt_hours) {
    if (net_kw.size() != tariff.prices.size())
        throw std::invalid_argument("net load and tariff horizon mismatch");
    double cost = 0.0;
    for (std::size_t t = 0; t < net_kw.size(); ++t) {
        const double imported = std::max(net_kw[t], 0.0) * dt_hours;
        const double exported = std::max(-net_kw[t], 0.0) * dt_hours;
        cost += tariff.prices[t] * imported - tariff.feed_in * exported;
    }
    return cost;
}

namespace {

/// Greedy heating placement: fix each comfort-floor violation by switching on
/// an off-period at or before it, chosen by the picker among the candidates
/// that keep the whole trace under the ceiling.
std::vector<double> place_ewh_heating(const flex::EwhConfig& ewh, std::size_t horizon,
                                      double dt_hours, const Tariff& tariff, bool cheapest_first,
                                      std::string& failure) {
    std::vector<double> control(horizon, 0.0);
    for (int guard = 0; guard <= static_cast<int>(horizon); ++guard) {
        const auto sim = flex::simulate_ewh(ewh, control, dt_hours);
        int first_low = -1;
        for (std::size_t t = 1; t < sim.trace.size(); ++t) {
            if (sim.trace[t] < ewh.temp_min_c - 1e-9) {
                first_low = static_cast<int>(t - 1);  // control step whose result dips
                break;
            }
            if (sim.trace[t] > ewh.temp_max_c + 1e-9) {
                failure = "ewh comfort ceiling exceeded at period " + std::to_string(t - 1);
                return control;
            }
        }
        if (first_low < 0) return control;

        int best = -1;
        for (int tau = 0; tau <= first_low; ++tau) {
            if (control[tau] > 0.0) continue;
            std::vector<double> trial = control;
            trial[tau] = 1.0;
            const auto trial_sim = flex::simulate_ewh(ewh, trial, dt_hours);
            bool ceiling_ok = true;
            for (double temp : trial_sim.trace)
                if (temp > ewh.temp_max_c + 1e-9) {
                    ceiling_ok = false;
                    break;
                }
            if (!ceiling_ok) continue;
            if (best < 0) {
                best = tau;
            } else if (cheapest_first) {
                if (tariff.prices[tau] < tariff.prices[best] - 1e-15) best = tau;
            } else {
                if (tau > best) best = tau;  // just-in-time thermostat baseline
            }
        }
        if (best < 0) {
            failure = "ewh comfort floor unreachable at period " + std::to_string(first_low);
            return control;
        }
        control[best] = 1.0;
    }
    failure = "ewh heating placement did not converge";
    return control;
}

struct Enumeration {
    std::vector<int> best_starts;
    double best_cost = std::numeric_limits<double>::infinity();
};

/// Net load of one start combination, composed fresh in fixed load order so
/// the arithmetic is bit-reproducible combo by combo.
std::vector<double> compose_net(const std::vector<double>& net0,
                                const std::vector<flex::ShiftableConfig>& loads,
                                const std::vector<int>& starts) {
    std::vector<double> net = net0;
    for (std::size_t i = 0; i < loads.size(); ++i)
        for (int t = starts[i]; t < starts[i] + loads[i].duration_steps; ++t)
            net[t] += loads[i].power_kw;
    return net;
}

/// Lexicographic product over the start windows; strictly-lower acceptance
/// keeps the earliest-start combination among cost ties.
void enumerate_starts(const std::vector<flex::ShiftableConfig>& loads, std::size_t index,
                      std::vector<int>& starts, const std::vector<double>& net0,
                      const Tariff& tariff, double dt_hours, Enumeration& state) {
    if (index == loads.size()) {
        const double cost = schedule_cost(compose_net(net0, loads, starts), tariff, dt_hours);
        if (cost < state.best_cost) {
            state.best_cost = cost;
            state.best_starts = starts;
        }
        return;
    }
    const auto& load = loads[index];
    for (int start = load.window_begin; start <= load.window_end; ++start) {
        starts[index] = start;
        enumerate_starts(loads, index + 1, starts, net0, tariff, dt_hours, state);
    }
}

Schedule build_schedule(const flex::DeviceFleet& fleet, const Tariff& tariff,
                        std::span<const double> pv_forecast_kw,
                        std::span<const double> base_load_kw, double dt_hours,
                        bool optimize_shiftables, bool cheapest_ewh) {
    fleet.validate();
    tariff.validate();
    const std::size_t horizon = tariff.prices.size();
    if (pv_forecast_kw.size() != horizon || base_load_kw.size() != horizon)
        throw std::invalid_argument("pv/base load horizon mismatch");
    for (const auto& load : fleet.shiftables)
        if (load.window_end + load.duration_steps > static_cast<int>(horizon))
            throw std::invalid_argument("shiftable window exceeds horizon");

    Schedule schedule;
    std::vector<double> net(horizon);
    for (std::size_t t = 0; t < horizon; ++t) net[t] = base_load_kw[t] - pv_forecast_kw[t];

    if (fleet.ewh) {
        std::string failure;
        schedule.ewh_control =
            place_ewh_heating(*fleet.ewh, horizon, dt_hours, tariff, cheapest_ewh, failure);
        if (!failure.empty()) {
            schedule.feasible = false;
            schedule.binding_constraint = failure;
            return schedule;
        }
        for (std::size_t t = 0; t < horizon; ++t)
            net[t] += schedule.ewh_control[t] * fleet.ewh->power_kw;
    }

    if (optimize_shiftables && !fleet.shiftables.empty()) {
        Enumeration state;
        std::vector<int> starts(fleet.shiftables.size(), 0);
        enumerate_starts(fleet.shiftables, 0, starts, net, tariff, dt_hours, state);
        schedule.starts = state.best_starts;
    } else {
        for (const auto& load : fleet.shiftables) schedule.starts.push_back(load.baseline_start);
    }
    for (std::size_t i = 0; i < fleet.shiftables.size(); ++i) {
        const auto& load = fleet.shiftables[i];
        for (int t = schedule.starts[i]; t < schedule.starts[i] + load.duration_steps; ++t)
            net[t] += load.power_kw;
    }

    schedule.net_kw = net;
    schedule.imported_kwh.resize(horizon);
    schedule.exported_kwh.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        schedule.imported_kwh[t] = std::max(net[t], 0.0) * dt_hours;
        schedule.exported_kwh[t] = std::max(-net[t], 0.0) * dt_hours;
    }
    schedule.cost = schedule_cost(net, tariff, dt_hours);
    return schedule;
}

}  // namespace

Schedule optimize_schedule(const flex::DeviceFleet& fleet, const Tariff& tariff,
                           std::span<const double> pv_forecast_kw,
                           std::span<const double> base_load_kw, double dt_hours) {
    return build_schedule(fleet, tariff, pv_forecast_kw, base_load_kw, dt_hours, true, true);
}

Schedule baseline_schedule(const flex::DeviceFleet& fleet, const Tariff& tariff,
                           std::span<const double> pv_forecast_kw,
                           std::span<const double> base_load_kw, double dt_hours) {
    return build_schedule(fleet, tariff, pv_forecast_kw, base_load_kw, dt_hours, false, false);
}

}  // namespace hemskit::hems
