#pragma once

#include <span>
#include <vector>

#include "hemskit/trajectory.hpp"

namespace hemskit::flex {

struct SvddOptions {
    double nu = 0.05;
    double gamma = 0.0;   // 0 picks the 1/T default; negative gains allowed
    double coef0 = 0.0;
    int max_iter = 50000;
    double tol = 1e-13;
};

/// One-class data description of a trajectory set: a minimal kernel-space
/// sphere around the training trajectories. The sigmoid kernel
/// k(u,v) = tanh(gamma <u,v> + coef0) is used throughout.
struct SvddModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> betas;  // sum to 1, each in [0, 1/(nu K)] per training point
    double gamma = 0.125;
    double coef0 = 0.0;
    double nu = 0.05;
    double radius2_threshold = 0.0;
    double cross_term = 0.0;  // sum_ij beta_i beta_j k(x_i, x_j), query-independent

    double kernel(std::span<const double> u, std::span<const double> v) const;
};

/// Solves the SVDD dual (minimize beta^T K beta over the capped simplex) by
/// projected gradient descent. The sphere radius is the averaged radius of
/// the boundary support vectors.
SvddModel svdd_fit(const std::vector<FlexTrajectory>& trajectories, const SvddOptions& opts);

/// R^2(x) = 1 - 2 sum_i beta_i k(x_i, x) + sum_ij beta_i beta_j k(x_i, x_j).
double svdd_radius2(const SvddModel& model, std::span<const double> x);

/// Feasible iff the query radius does not exceed the sphere radius
/// (boundary inclusive).
bool svdd_is_feasible(const SvddModel& model, std::span<const double> x);

/// Euclidean projection onto { b : sum b = 1, 0 <= b_i <= cap }.
std::vector<double> project_capped_simplex(std::vector<double> v, double cap);

}  // namespace hemskit::flex
