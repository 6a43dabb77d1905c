#include "hemskit/var.hpp"

#include <cmath>
#include <stdexcept>

namespace hemskit::var {

double soft_threshold(double x, double a) {
    if (a < 0.0) throw std::invalid_argument("soft threshold shift must be >= 0");
    const double mag = std::fabs(x) - a;
    if (mag <= 0.0) return 0.0;
    return x > 0.0 ? mag : -mag;
}

Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& x, double a) {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = soft_threshold(x(i, j), a);
    return out;
}

VarDesign build_var_design(const PanelSeries& panel, int p) {
    panel.validate();
    if (p < 1) throw std::invalid_argument("lag order must be >= 1");
    const int n = static_cast<int>(panel.node_count());
    const int length = static_cast<int>(panel.length());
    if (length <= p) throw std::invalid_argument("series shorter than p+1");
    const int t_eff = length - p;

    VarDesign design;
    design.n = n;
    design.p = p;
    design.means.resize(n);
    for (int i = 0; i < n; ++i) {
        double mean = 0.0;
        for (double v : panel.series[i].values) mean += v;
        design.means[i] = mean / static_cast<double>(length);
    }

    design.Y.resize(n, t_eff);
    design.Z.resize(n * p, t_eff);
    for (int t = 0; t < t_eff; ++t) {
        for (int i = 0; i < n; ++i)
            design.Y(i, t) = panel.series[i].values[t + p] - design.means[i];
        for (int lag = 1; lag <= p; ++lag)
            for (int j = 0; j < n; ++j)
                design.Z((lag - 1) * n + j, t) =
                    panel.series[j].values[t + p - lag] - design.means[j];
    }
    return design;
}

double lasso_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Z,
                       const Eigen::MatrixXd& B, double lambda) {
    const double fit = 0.5 * (Y - B * Z).squaredNorm();
    return fit + lambda * B.cwiseAbs().sum();
}

double lambda_max(const VarDesign& design) {
    return (design.Y * design.Z.transpose()).cwiseAbs().maxCoeff();
}

PanelSeries forecast_var(const VarModel& model, const PanelSeries& recent, int steps) {
    recent.validate();
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (static_cast<int>(recent.node_count()) != model.n)
        throw std::invalid_argument("recent panel node count mismatch");
    if (static_cast<int>(recent.length()) != model.p)
        throw std::invalid_argument("recent panel must hold exactly p columns");

    const int n = model.n;
    const int p = model.p;
    // history[0] is the most recent centered column.
    std::vector<Eigen::VectorXd> history(p);
    for (int lag = 0; lag < p; ++lag) {
        history[lag].resize(n);
        for (int i = 0; i < n; ++i)
            history[lag](i) = recent.series[i].values[p - 1 - lag] - model.means[i];
    }

    PanelSeries out;
    out.ids = recent.ids;
    out.series.resize(n);
    const auto& head = recent.series.front();
    for (int i = 0; i < n; ++i) {
        out.series[i].start = head.start + static_cast<Timestamp>(p) * head.step_seconds;
        out.series[i].step_seconds = head.step_seconds;
        out.series[i].values.reserve(steps);
    }

    Eigen::VectorXd z(n * p);
    for (int s = 0; s < steps; ++s) {
        for (int lag = 0; lag < p; ++lag) z.segment(lag * n, n) = history[lag];
        const Eigen::VectorXd next = model.B * z;
        for (int lag = p - 1; lag >= 1; --lag) history[lag] = history[lag - 1];
        history[0] = next;
        for (int i = 0; i < n; ++i) out.series[i].values.push_back(next(i) + model.means[i]);
    }
    return out;
}

}  // namespace hemskit::var
