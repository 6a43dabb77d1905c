#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hemskit/svdd.hpp"
#include "hemskit/trajectory.hpp"

namespace hemskit::flex {

/// Equivalent-storage surrogate: dynamic power and SOC limit vectors plus the
/// initial SOC, the tightest box containing every training trajectory.
struct VirtualBattery {
    std::vector<double> p_max_kw;
    std::vector<double> p_min_kw;
    std::vector<double> soc_max_kwh;
    std::vector<double> soc_min_kwh;
    double soc_initial_kwh = 0.0;
    double dt_hours = 1.0;

    std::size_t horizon() const { return p_max_kw.size(); }
};

/// Closed-form fit: per-period extremes of the trajectories and of their
/// running energy sums. Equals the optimum of the size-minimizing linear
/// program whose constraints sandwich every training trajectory.
VirtualBattery vbattery_fit(const std::vector<FlexTrajectory>& trajectories,
                            double soc_initial_kwh, double dt_hours);

/// Feasible iff the trajectory respects the power box and its running energy
/// stays inside the SOC band at every period (bounds inclusive).
bool vbattery_is_feasible(const VirtualBattery& vb, std::span<const double> traj);

/// Percent of correctly classified trajectories per surrogate and class.
/// An empty class leaves the corresponding entry undefined.
struct SurrogateAccuracy {
    std::optional<double> svdd_feasible_pct;
    std::optional<double> svdd_unfeasible_pct;
    std::optional<double> vb_feasible_pct;
    std::optional<double> vb_unfeasible_pct;
};

SurrogateAccuracy evaluate_surrogates(const SvddModel& svdd, const VirtualBattery& vb,
                                      const std::vector<FlexTrajectory>& feasible_test,
                                      const std::vector<FlexTrajectory>& unfeasible_test);

}  // namespace hemskit::flex
