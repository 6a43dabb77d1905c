#pragma once

#include <cstdint>
#include <stdexcept>

#include "hemskit/trajectory.hpp"

namespace hemskit::flex {

struct EpsoOptions {
    int swarm_size = 30;
    int generations = 200;  // per harvested trajectory
    double tau = 0.2;       // Gaussian mutation scale of the strategic weights
    std::uint64_t seed = 1;
    /// Share of harvests that maximize dispersion (distance to the collected
    /// set). The remainder sample the feasible domain by steering the swarm
    /// toward random box targets, yielding interior trajectories.
    double explore_share = 1.0;
    /// Cap on the random target depth of domain-sampling harvests, as a share
    /// of the fleet power box. Lower values keep samples off the rim.
    double sample_depth = 1.0;
};

/// Raised when no feasible trajectory exists within the search budget
/// (degenerate fleet or an infeasible baseline).
struct FlexSamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Samples K feasible flexibility trajectories with an evolutionary particle
/// swarm: particles carry self-adapted strategic weights (inertia, memory,
/// cooperation, best-perturbation) that are replicated, mutated and selected
/// each generation. Harvested trajectories maximize dispersion: each run
/// rewards distance to the set collected so far. Deterministic per seed.
TrajectorySet epso_sample(const FlexProblem& problem, int k, const EpsoOptions& opts);

/// Mean pairwise L2 distance of a trajectory set, the dispersion figure.
double mean_pairwise_distance(const std::vector<FlexTrajectory>& trajectories);

}  // namespace hemskit::flex
