#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hemskit/devices.hpp"

namespace hemskit::flex {

/// Multi-period deviation from the expected net-load profile, kW, signed
/// (positive = extra consumption).
struct FlexTrajectory {
    std::vector<double> deltas;
};

/// Chance-constrained flexibility problem: a trajectory is feasible when the
/// device fleet can realize it (battery, EWH, shiftable moves) in at least an
/// alpha fraction of the PV scenarios.
struct FlexProblem {
    DeviceFleet fleet;
    std::vector<double> baseline_net_kw;  // expected net-load over the horizon
    std::vector<std::vector<double>> pv_scenarios_kw;
    double alpha = 0.9;
    double dt_hours = 1.0;

    std::size_t horizon() const { return baseline_net_kw.size(); }
    /// Scenario-mean PV profile, the expectation behind the baseline.
    std::vector<double> pv_expected() const;
    void validate() const;
};

struct FeasibilityResult {
    bool feasible = false;
    double fraction = 0.0;  // violation-free scenario share
    std::vector<int> violating_scenarios;
    double mean_unmet_l1 = 0.0;  // residual delta the fleet could not place
};

/// Disaggregates the delta into device actions per scenario (battery first,
/// then EWH modulation, then shiftable moves) and simulates the fleet.
FeasibilityResult check_feasible(const FlexTrajectory& traj, const FlexProblem& problem);

/// Device-level split of one trajectory under one PV scenario.
struct Disaggregation {
    std::vector<double> battery_kw;
    std::vector<double> ewh_deviation_kw;
    std::vector<double> shiftable_deviation_kw;
    std::vector<int> shiftable_starts;
    std::vector<double> residual_kw;  // unplaced remainder, zero when exact
    bool devices_ok = true;
};

Disaggregation disaggregate(std::span<const double> deltas, const FlexProblem& problem,
                            std::span<const double> pv_scenario);

struct TrajectorySet {
    std::vector<FlexTrajectory> trajectories;
    std::vector<double> baseline;
    std::vector<std::vector<double>> pv_scenarios;
    double alpha = 0.9;
    double dt_hours = 1.0;
    bool duplicates_flagged = false;
};

}  // namespace hemskit::flex
