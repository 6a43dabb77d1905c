#include "hemskit/virtual_battery.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace hemskit::flex {

namespace {
// Absolute-plus-relative slack so regenerated running sums classify cleanly.
double slack(double bound) { return 1e-9 * (1.0 + std::fabs(bound)); }
}  // namespace

VirtualBattery vbattery_fit(const std::vector<FlexTrajectory>& trajectories,
                            double soc_initial_kwh, double dt_hours) {
    if (trajectories.empty()) throw std::invalid_argument("empty trajectory set");
    const std::size_t horizon = trajectories.front().deltas.size();
    for (const auto& t : trajectories)
        if (t.deltas.size() != horizon)
            throw std::invalid_argument("trajectory horizon mismatch");

    VirtualBattery vb;
    vb.soc_initial_kwh = soc_initial_kwh;
    vb.dt_hours = dt_hours;
    vb.p_max_kw.assign(horizon, -std::numeric_limits<double>::infinity());
    vb.p_min_kw.assign(horizon, std::numeric_limits<double>::infinity());
    vb.soc_max_kwh.assign(horizon, -std::numeric_limits<double>::infinity());
    vb.soc_min_kwh.assign(horizon, std::numeric_limits<double>::infinity());

    for (const auto& traj : trajectories) {
        double running = soc_initial_kwh;
        for (std::size_t t = 0; t < horizon; ++t) {
            const double p = traj.deltas[t];
            running += p * dt_hours;
            vb.p_max_kw[t] = std::max(vb.p_max_kw[t], p);
            vb.p_min_kw[t] = std::min(vb.p_min_kw[t], p);
            vb.soc_max_kwh[t] = std::max(vb.soc_max_kwh[t], running);
            vb.soc_min_kwh[t] = std::min(vb.soc_min_kwh[t], running);
        }
    }
    return vb;
}

bool vbattery_is_feasible(const VirtualBattery& vb, std::span<const double> traj) {
    if (traj.size() != vb.horizon())
        throw std::invalid_argument("trajectory horizon mismatch");
    double running = vb.soc_initial_kwh;
    for (std::size_t t = 0; t < traj.size(); ++t) {
        const double p = traj[t];
        if (p > vb.p_max_kw[t] + slack(vb.p_max_kw[t])) return false;
        if (p < vb.p_min_kw[t] - slack(vb.p_min_kw[t])) return false;
        running += p * vb.dt_hours;
        if (running > vb.soc_max_kwh[t] + slack(vb.soc_max_kwh[t])) return false;
        if (running < vb.soc_min_kwh[t] - slack(vb.soc_min_kwh[t])) return false;
    }
    return true;
}

namespace {

std::optional<double> accuracy(const std::vector<FlexTrajectory>& tests, bool expect_feasible,
                               const std::function<bool(std::span<const double>)>& classify) {
    if (tests.empty()) return std::nullopt;  // undefined, never 100%
    int correct = 0;
    for (const auto& t : tests)
        if (classify(t.deltas) == expect_feasible) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(tests.size());
}

}  // namespace

SurrogateAccuracy evaluate_surrogates(const SvddModel& svdd, const VirtualBattery& vb,
                                      const std::vector<FlexTrajectory>& feasible_test,
                                      const std::vector<FlexTrajectory>& unfeasible_test) {
    SurrogateAccuracy table;
    const auto svdd_classify = [&](std::span<const double> x) {
        return svdd_is_feasible(svdd, x);
    };
    const auto vb_classify = [&](std::span<const double> x) {
        return vbattery_is_feasible(vb, x);
    };
    table.svdd_feasible_pct = accuracy(feasible_test, true, svdd_classify);
    table.svdd_unfeasible_pct = accuracy(unfeasible_test, false, svdd_classify);
    table.vb_feasible_pct = accuracy(feasible_test, true, vb_classify);
    table.vb_unfeasible_pct = accuracy(unfeasible_test, false, vb_classify);
    return table;
}

}  // namespace hemskit::flex
