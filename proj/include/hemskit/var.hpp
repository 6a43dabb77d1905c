#pragma once

#include <Eigen/Dense>

#include "hemskit/time_series.hpp"

namespace hemskit::var {

/// Scalar soft thresholding S1(x, a) = (x/|x|) * max(0, |x| - a), with 0 -> 0.
double soft_threshold(double x, double a);

/// Elementwise soft thresholding of a matrix.
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& x, double a);

/// VAR(p) regression layout. Column t of Z stacks the p lagged response
/// vectors (Y_{t-1}, ..., Y_{t-p}); row block l (0-based) holds lag l+1.
/// Series are centered by their training means.
struct VarDesign {
    Eigen::MatrixXd Y;  // n x T_eff
    Eigen::MatrixXd Z;  // n*p x T_eff
    int n = 0;
    int p = 0;
    Eigen::VectorXd means;  // per-series training mean, re-added at forecast time
};

VarDesign build_var_design(const PanelSeries& panel, int p);

/// Fitted VAR coefficients. B holds the sparse estimate returned by the
/// solver (the H iterate at convergence for the centralized path).
struct VarModel {
    Eigen::MatrixXd B;  // n x n*p
    double lambda = 0.0;
    double rho = 1.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    int n = 0;
    int p = 0;
    Eigen::VectorXd means;
    std::vector<double> primal_history;  // one entry per iteration
    std::vector<double> dual_history;
};

/// 1/2 ||Y - BZ||_F^2 + lambda * ||B||_1 (entrywise L1).
double lasso_objective(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Z,
                       const Eigen::MatrixXd& B, double lambda);

/// Smallest penalty that shrinks every coefficient to zero: max|Y Z^T|.
double lambda_max(const VarDesign& design);

/// Iterated one-step predictions from the last p panel columns; training
/// means are re-added to the output.
PanelSeries forecast_var(const VarModel& model, const PanelSeries& recent, int steps);

}  // namespace hemskit::var
