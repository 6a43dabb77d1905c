#include "hemskit/epso.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hemskit::flex {

namespace {

struct Weights {
    double inertia = 0.5;
    double memory = 0.5;
    double cooperation = 0.5;
    double perturb = 0.5;
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    Weights weights;
    double fitness = -std::numeric_limits<double>::infinity();
    std::vector<double> best_position;
    double best_fitness = -std::numeric_limits<double>::infinity();
};

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

/// Per-period power and running-energy band of the collected trajectories.
struct Envelope {
    std::vector<double> p_max, p_min, c_max, c_min;

    static Envelope of(const std::vector<std::vector<double>>& archive, double dt_hours) {
        const std::size_t horizon = archive.front().size();
        Envelope env;
        env.p_max.assign(horizon, -std::numeric_limits<double>::infinity());
        env.p_min.assign(horizon, std::numeric_limits<double>::infinity());
        env.c_max = env.p_max;
        env.c_min = env.p_min;
        for (const auto& member : archive) {
            double running = 0.0;
            for (std::size_t t = 0; t < horizon; ++t) {
                running += member[t] * dt_hours;
                env.p_max[t] = std::max(env.p_max[t], member[t]);
                env.p_min[t] = std::min(env.p_min[t], member[t]);
                env.c_max[t] = std::max(env.c_max[t], running);
                env.c_min[t] = std::min(env.c_min[t], running);
            }
        }
        return env;
    }

    /// How far a candidate pushes the band outward, summed over periods.
    double expansion(const std::vector<double>& x, double dt_hours) const {
        double gain = 0.0, running = 0.0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            running += x[t] * dt_hours;
            gain += std::max(0.0, x[t] - p_max[t]) + std::max(0.0, p_min[t] - x[t]);
            gain += std::max(0.0, running - c_max[t]) + std::max(0.0, c_min[t] - running);
        }
        return gain;
    }
};

/// Feasible particles score the band expansion they offer plus a spread term
/// (dispersion harvests), or their closeness to a per-harvest random target
/// (domain-sampling harvests). Infeasible particles score strictly below every
/// feasible one, ordered by how much delta the fleet failed to place.
double fitness_of(const std::vector<double>& position, const FlexProblem& problem,
                  const std::vector<std::vector<double>>& archive, const Envelope& envelope,
                  const std::vector<double>* target) {
    FlexTrajectory traj{position};
    const FeasibilityResult result = check_feasible(traj, problem);
    if (!result.feasible)
        return -1.0 - result.mean_unmet_l1 - 10.0 * (problem.alpha - result.fraction);
    if (target) return 1.0 / (1.0 + distance(position, *target));
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& member : archive) nearest = std::min(nearest, distance(position, member));
    return envelope.expansion(position, problem.dt_hours) + 0.05 * nearest;
}

Weights mutate(const Weights& w, double tau, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto bump = [&](double v) {
        return std::clamp(v * (1.0 + tau * gauss(rng)), 0.0, 2.0);
    };
    return {bump(w.inertia), bump(w.memory), bump(w.cooperation), bump(w.perturb)};
}

}  // namespace

double mean_pairwise_distance(const std::vector<FlexTrajectory>& trajectories) {
    if (trajectories.size() < 2) return 0.0;
    double acc = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        for (std::size_t j = i + 1; j < trajectories.size(); ++j) {
            acc += distance(trajectories[i].deltas, trajectories[j].deltas);
            ++pairs;
        }
    return acc / static_cast<double>(pairs);
}

TrajectorySet epso_sample(const FlexProblem& problem, int k, const EpsoOptions& opts) {
    problem.validate();
    if (k < 1) throw std::invalid_argument("need K >= 1 trajectories");
    if (opts.swarm_size < 2) throw std::invalid_argument("swarm needs >= 2 particles");

    const std::size_t horizon = problem.horizon();
    const double swing = problem.fleet.max_power_swing();
    const double lo = -swing, hi = swing;

    // The zero trajectory (stay on the expected profile) anchors dispersion.
    std::vector<std::vector<double>> archive = {std::vector<double>(horizon, 0.0)};

    TrajectorySet out;
    out.baseline = problem.baseline_net_kw;
    out.pv_scenarios = problem.pv_scenarios_kw;
    out.alpha = problem.alpha;
    out.dt_hours = problem.dt_hours;

    int dispersion_harvests = 0;
    for (int harvest = 0; harvest < k; ++harvest) {
        std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(harvest + 1));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);

        // Quota rule keeps the dispersion/domain-sampling mix deterministic.
        const bool dispersion_mode =
            static_cast<double>(dispersion_harvests) <
            opts.explore_share * static_cast<double>(harvest + 1);
        if (dispersion_mode) ++dispersion_harvests;
        std::vector<double> target;
        const std::vector<double>* target_ptr = nullptr;
        if (!dispersion_mode) {
            // A random depth pulls targets off the boundary so the samples
            // spread over the interior of the feasible domain too.
            const double depth = opts.sample_depth * unit(rng);
            target.resize(horizon);
            for (auto& v : target) v = depth * (lo + (hi - lo) * unit(rng));
            target_ptr = &target;
        }
        const Envelope envelope = Envelope::of(archive, problem.dt_hours);

        std::vector<Particle> swarm(opts.swarm_size);
        for (auto& particle : swarm) {
            particle.position.resize(horizon);
            particle.velocity.assign(horizon, 0.0);
            for (auto& x : particle.position) x = lo + (hi - lo) * unit(rng);
            particle.weights = {unit(rng), unit(rng), unit(rng), unit(rng)};
            particle.fitness =
                fitness_of(particle.position, problem, archive, envelope, target_ptr);
            particle.best_position = particle.position;
            particle.best_fitness = particle.fitness;
        }
        std::vector<double> global_best = swarm.front().best_position;
        double global_best_fitness = swarm.front().best_fitness;
        for (const auto& particle : swarm)
            if (particle.best_fitness > global_best_fitness) {
                global_best_fitness = particle.best_fitness;
                global_best = particle.best_position;
            }

        const auto move = [&](Particle& particle, const Weights& w) {
            for (std::size_t d = 0; d < horizon; ++d) {
                const double best_star =
                    global_best[d] + w.perturb * 0.1 * (hi - lo) * gauss(rng);
                particle.velocity[d] = w.inertia * particle.velocity[d] +
                                       w.memory * (particle.best_position[d] - particle.position[d]) +
                                       w.cooperation * (best_star - particle.position[d]);
                particle.position[d] =
                    std::clamp(particle.position[d] + particle.velocity[d], lo, hi);
            }
        };

        for (int gen = 0; gen < opts.generations; ++gen) {
            for (auto& particle : swarm) {
                // Replication: the clone carries mutated strategic weights.
                Particle clone = particle;
                clone.weights = mutate(particle.weights, opts.tau, rng);
                move(particle, particle.weights);
                move(clone, clone.weights);
                particle.fitness =
                    fitness_of(particle.position, problem, archive, envelope, target_ptr);
                clone.fitness =
                    fitness_of(clone.position, problem, archive, envelope, target_ptr);
                if (clone.fitness > particle.fitness) particle = clone;

                if (particle.fitness > particle.best_fitness) {
                    particle.best_fitness = particle.fitness;
                    particle.best_position = particle.position;
                }
                if (particle.best_fitness > global_best_fitness) {
                    global_best_fitness = particle.best_fitness;
                    global_best = particle.best_position;
                }
            }
        }

        if (global_best_fitness < 0.0)
            throw FlexSamplingError("no feasible trajectory found within the EPSO budget");
        archive.push_back(global_best);
        out.trajectories.push_back(FlexTrajectory{global_best});
    }

    for (std::size_t i = 0; i < out.trajectories.size() && !out.duplicates_flagged; ++i)
        for (std::size_t j = i + 1; j < out.trajectories.size(); ++j)
            if (distance(out.trajectories[i].deltas, out.trajectories[j].deltas) < 1e-9) {
                out.duplicates_flagged = true;
                break;
            }
    return out;
}

}  // namespace hemskit::flex
