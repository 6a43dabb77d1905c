#include "hemskit/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemskit::flex {

std::vector<double> FlexProblem::pv_expected() const {
    std::vector<double> mean(horizon(), 0.0);
    if (pv_scenarios_kw.empty()) return mean;
    for (const auto& scenario : pv_scenarios_kw)
        for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += scenario[t];
    for (auto& v : mean) v /= static_cast<double>(pv_scenarios_kw.size());
    return mean;
}

void FlexProblem::validate() const {
    fleet.validate();
    if (baseline_net_kw.empty()) throw std::invalid_argument("empty flexibility horizon");
    if (pv_scenarios_kw.empty()) throw std::invalid_argument("need at least one PV scenario");
    for (const auto& s : pv_scenarios_kw)
        if (s.size() != baseline_net_kw.size())
            throw std::invalid_argument("PV scenario horizon mismatch");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha outside (0,1]");
    if (!(dt_hours > 0.0 && dt_hours <= 1.0))
        throw std::invalid_argument("dt outside (0,1] hours");
    for (const auto& s : fleet.shiftables)
        if (s.window_end + s.duration_steps > static_cast<int>(horizon()))
            throw std::invalid_argument("shiftable window exceeds horizon");
}

namespace {

constexpr double kResidualTol = 1e-9;

std::vector<double> shiftable_profile(const ShiftableConfig& s, int start, std::size_t horizon) {
    std::vector<double> profile(horizon, 0.0);
    for (int t = start; t < start + s.duration_steps && t < static_cast<int>(horizon); ++t)
        profile[t] = s.power_kw;
    return profile;
}

}  // namespace

Disaggregation disaggregate(std::span<const double> deltas, const FlexProblem& problem,
                            std::span<const double> pv_scenario) {
    const std::size_t horizon = problem.horizon();
    if (deltas.size() != horizon) throw std::invalid_argument("trajectory horizon mismatch");

    const auto pv_mean = problem.pv_expected();
    Disaggregation split;
    split.battery_kw.assign(horizon, 0.0);
    split.ewh_deviation_kw.assign(horizon, 0.0);
    split.shiftable_deviation_kw.assign(horizon, 0.0);
    split.residual_kw.assign(deltas.begin(), deltas.end());

    // Battery first: greedy per period, respecting power limits, remaining SOC
    // headroom, and the charge-from-surplus user constraint under this scenario.
    if (problem.fleet.battery) {
        const auto& bat = *problem.fleet.battery;
        double soc = bat.soc_initial_kwh;
        for (std::size_t t = 0; t < horizon; ++t) {
            double charge_cap = bat.charge_kw;
            if (bat.charge_from_surplus_only) {
                const double scenario_net =
                    problem.baseline_net_kw[t] + pv_mean[t] - pv_scenario[t];
                charge_cap = std::min(charge_cap, std::max(0.0, -scenario_net));
            }
            charge_cap = std::min(
                charge_cap, (bat.soc_max_kwh - soc) / (bat.eff_charge * problem.dt_hours));
            double discharge_cap = std::min(
                bat.discharge_kw, (soc - bat.soc_min_kwh) * bat.eff_discharge / problem.dt_hours);
            charge_cap = std::max(charge_cap, 0.0);
            discharge_cap = std::max(discharge_cap, 0.0);

            const double p = std::clamp(split.residual_kw[t], -discharge_cap, charge_cap);
            split.battery_kw[t] = p;
            split.residual_kw[t] -= p;
            soc += bat.eff_charge * std::max(p, 0.0) * problem.dt_hours -
                   std::max(-p, 0.0) * problem.dt_hours / bat.eff_discharge;
        }
    }

    // EWH next: modulate around the thermostat baseline while holding the
    // temperature band, simulated forward so no step can strand the tank.
    if (problem.fleet.ewh && problem.fleet.ewh->power_kw > 0.0) {
        const auto& ewh = *problem.fleet.ewh;
        const auto u_base = baseline_ewh_control(ewh, horizon, problem.dt_hours);
        const double thermal_mass_kj = ewh.volume_l * 4.186;
        const double dt_s = problem.dt_hours * 3600.0;
        double temp = ewh.initial_c;
        for (std::size_t t = 0; t < horizon; ++t) {
            const double loss_kw = ewh.loss_w_per_k / 1000.0 * (temp - ewh.ambient_c);
            const double draw_l_per_h = t < ewh.draw_l_per_h.size() ? ewh.draw_l_per_h[t] : 0.0;
            const double draw_kw = draw_l_per_h / 3600.0 * 4.186 * (temp - ewh.inlet_c);
            const double drift = dt_s * (-loss_kw - draw_kw) / thermal_mass_kj;
            const double per_unit = dt_s * ewh.efficiency * ewh.power_kw / thermal_mass_kj;

            double u_lo = 0.0, u_hi = 1.0;
            if (per_unit > 0.0) {
                u_lo = std::clamp((ewh.temp_min_c - temp - drift) / per_unit, 0.0, 1.0);
                u_hi = std::clamp((ewh.temp_max_c - temp - drift) / per_unit, 0.0, 1.0);
            }
            if (u_lo > u_hi) {
                split.devices_ok = false;  // band not holdable this step
                u_lo = u_hi;
            }
            const double u_wanted = u_base[t] + split.residual_kw[t] / ewh.power_kw;
            const double u = std::clamp(u_wanted, u_lo, u_hi);
            const double deviation_kw = (u - u_base[t]) * ewh.power_kw;
            split.ewh_deviation_kw[t] = deviation_kw;
            split.residual_kw[t] -= deviation_kw;
            temp += drift + per_unit * u;
        }
    }

    // Shiftables last: per load, pick the window start whose move best cancels
    // the remaining residual (ties resolved to the earliest start).
    for (const auto& load : problem.fleet.shiftables) {
        const auto base_profile = shiftable_profile(load, load.baseline_start, horizon);
        int best_start = load.baseline_start;
        double best_l1 = -1.0;
        for (int start = load.window_begin; start <= load.window_end; ++start) {
            const auto moved = shiftable_profile(load, start, horizon);
            double l1 = 0.0;
            for (std::size_t t = 0; t < horizon; ++t)
                l1 += std::fabs(split.residual_kw[t] - (moved[t] - base_profile[t]));
            if (best_l1 < 0.0 || l1 < best_l1 - 1e-12) {
                best_l1 = l1;
                best_start = start;
            }
        }
        split.shiftable_starts.push_back(best_start);
        const auto moved = shiftable_profile(load, best_start, horizon);
        for (std::size_t t = 0; t < horizon; ++t) {
            const double dev = moved[t] - base_profile[t];
            split.shiftable_deviation_kw[t] += dev;
            split.residual_kw[t] -= dev;
        }
    }
    return split;
}

FeasibilityResult check_feasible(const FlexTrajectory& traj, const FlexProblem& problem) {
    problem.validate();
    if (traj.deltas.size() != problem.horizon())
        throw std::invalid_argument("trajectory horizon mismatch");

    FeasibilityResult result;
    const int scenario_count = static_cast<int>(problem.pv_scenarios_kw.size());
    int ok_count = 0;
    for (int s = 0; s < scenario_count; ++s) {
        const auto split = disaggregate(traj.deltas, problem, problem.pv_scenarios_kw[s]);
        double unmet = 0.0;
        for (double r : split.residual_kw) unmet += std::fabs(r);
        result.mean_unmet_l1 += unmet;
        const bool ok = split.devices_ok && unmet <= kResidualTol * problem.horizon();
        if (ok)
            ++ok_count;
        else
            result.violating_scenarios.push_back(s);
    }
    result.mean_unmet_l1 /= static_cast<double>(scenario_count);
    result.fraction = static_cast<double>(ok_count) / static_cast<double>(scenario_count);
    result.feasible = result.fraction >= problem.alpha - 1e-12;
    return result;
}

}  // namespace hemskit::flex
