#include "hemskit/svdd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemskit::flex {

double SvddModel::kernel(std::span<const double> u, std::span<const double> v) const {
    if (u.size() != v.size()) throw std::invalid_argument("kernel dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    return std::tanh(gamma * dot + coef0);
}

std::vector<double> project_capped_simplex(std::vector<double> v, double cap) {
    // Bisection on the shift theta with g(theta) = sum clamp(v - theta, 0, cap),
    // which is non-increasing in theta; the root gives sum = 1.
    const auto mass = [&](double theta) {
        double total = 0.0;
        for (double x : v) total += std::clamp(x - theta, 0.0, cap);
        return total;
    };
    double lo = *std::min_element(v.begin(), v.end()) - cap - 1.0;
    double hi = *std::max_element(v.begin(), v.end());
    if (mass(lo) < 1.0) throw std::invalid_argument("capped simplex infeasible: cap*n < 1");
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) >= 1.0)
            lo = mid;
        else
            hi = mid;
    }
    for (auto& x : v) x = std::clamp(x - lo, 0.0, cap);
    return v;
}

SvddModel svdd_fit(const std::vector<FlexTrajectory>& trajectories, const SvddOptions& opts) {
    const int count = static_cast<int>(trajectories.size());
    if (count < 2) throw std::invalid_argument("SVDD needs at least two trajectories");
    if (!(opts.nu > 0.0 && opts.nu <= 1.0)) throw std::invalid_argument("nu outside (0,1]");
    const std::size_t dim = trajectories.front().deltas.size();
    for (const auto& t : trajectories)
        if (t.deltas.size() != dim) throw std::invalid_argument("trajectory dimension mismatch");

    SvddModel model;
    model.nu = opts.nu;
    model.coef0 = opts.coef0;
    model.gamma = opts.gamma != 0.0 ? opts.gamma : 1.0 / static_cast<double>(dim);

    Eigen::MatrixXd kmat(count, count);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j <= i; ++j) {
            const double k = model.kernel(trajectories[i].deltas, trajectories[j].deltas);
            kmat(i, j) = k;
            kmat(j, i) = k;
        }

    const double cap = 1.0 / (opts.nu * static_cast<double>(count));
    std::vector<double> beta(count, 1.0 / static_cast<double>(count));
    // Projected gradient ascent on the SVDD dual under the unit self-similarity
    // convention of the radius formula (k(x,x) := 1, so the linear term is
    // constant on the simplex):
    //   max 1 - beta^T K beta  ==  min beta^T K beta.
    // Boundary support vectors then share one radius value at the optimum,
    // which is what the averaged sphere threshold relies on. The Gershgorin
    // bound keeps the step inside the stable range even though the sigmoid
    // kernel matrix need not be positive definite.
    const double bound = kmat.cwiseAbs().rowwise().sum().maxCoeff();
    const double step = 1.0 / (2.0 * std::max(bound, 1e-12));

    Eigen::Map<Eigen::VectorXd> beta_vec(beta.data(), count);
    Eigen::VectorXd ascent(count);
    for (int it = 0; it < opts.max_iter; ++it) {
        ascent = -2.0 * (kmat * beta_vec);
        std::vector<double> moved(count);
        for (int i = 0; i < count; ++i) moved[i] = beta[i] + step * ascent[i];
        const std::vector<double> projected = project_capped_simplex(std::move(moved), cap);
        double max_delta = 0.0;
        for (int i = 0; i < count; ++i)
            max_delta = std::max(max_delta, std::fabs(projected[i] - beta[i]));
        beta = projected;
        if (max_delta < opts.tol) break;
    }

    // Keep the support vectors, folding exact duplicates together so repeated
    // trajectories surface as a single vector with the aggregated weight.
    const double keep_tol = 1e-10;
    for (int i = 0; i < count; ++i) {
        if (beta[i] <= keep_tol) continue;
        bool merged = false;
        for (std::size_t s = 0; s < model.support_vectors.size() && !merged; ++s) {
            if (model.support_vectors[s] == trajectories[i].deltas) {
                model.betas[s] += beta[i];
                merged = true;
            }
        }
        if (!merged) {
            model.support_vectors.push_back(trajectories[i].deltas);
            model.betas.push_back(beta[i]);
        }
    }

    model.cross_term = 0.0;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        for (std::size_t j = 0; j < model.support_vectors.size(); ++j)
            model.cross_term += model.betas[i] * model.betas[j] *
                                model.kernel(model.support_vectors[i], model.support_vectors[j]);

    // Sphere radius: averaged radius of the boundary support vectors, with a
    // small slack absorbing the solver's residual spread among them.
    const double edge = 1e-8;
    double acc = 0.0;
    int boundary = 0;
    for (int i = 0; i < count; ++i) {
        if (beta[i] > edge && beta[i] < cap - edge) {
            acc += svdd_radius2(model, trajectories[i].deltas);
            ++boundary;
        }
    }
    if (boundary > 0) {
        model.radius2_threshold = acc / static_cast<double>(boundary);
    } else {
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i)
            if (beta[i] > keep_tol)
                worst = std::max(worst, svdd_radius2(model, trajectories[i].deltas));
        model.radius2_threshold = worst;
    }
    model.radius2_threshold += 1e-9 * (1.0 + std::fabs(model.radius2_threshold));
    return model;
}

double svdd_radius2(const SvddModel& model, std::span<const double> x) {
    double weighted = 0.0;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
        weighted += model.betas[i] * model.kernel(model.support_vectors[i], x);
    return 1.0 - 2.0 * weighted + model.cross_term;
}

bool svdd_is_feasible(const SvddModel& model, std::span<const double> x) {
    return svdd_radius2(model, x) <= model.radius2_threshold;
}

}  // namespace hemskit::flex
