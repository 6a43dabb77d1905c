#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hemskit/features.hpp"
#include "hemskit/forecast.hpp"

namespace hemskit::gbt {

using features::FeatureMatrix;

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

/// CART regression tree grown by greedy variance-reduction splits with
/// deterministic tie-breaking (lowest feature index, then lowest threshold).
struct RegressionTree {
    std::vector<TreeNode> nodes;

    bool empty() const { return nodes.empty(); }
    double predict_row(std::span<const double> row) const;

    /// Leaf index reached by a row; used for leaf-wise loss line search.
    int leaf_for(std::span<const double> row) const;
    std::vector<int> leaf_indices() const;
};

struct TreeParams {
    int max_depth = 4;
    int min_samples_leaf = 5;
};

RegressionTree fit_tree(const FeatureMatrix& X, std::span<const double> targets,
                        const TreeParams& params);

enum class Loss { squared, pinball };

struct GbtParams {
    int n_trees = 200;
    double learning_rate = 0.1;
    TreeParams tree;
};

/// Stagewise additive ensemble. Trees are grown on negative loss gradients and
/// their leaves re-estimated with the loss-optimal constant, so the recorded
/// training loss is non-increasing per stage for shrinkage <= 1.
struct GbtEnsemble {
    Loss loss = Loss::squared;
    double quantile = 0.5;  // pinball only
    double initial = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
    std::vector<double> training_loss;  // stage 0 = initial constant
    std::vector<std::string> feature_schema;

    double predict_row(std::span<const double> row) const;
    std::vector<double> predict(const FeatureMatrix& X) const;
};

GbtEnsemble fit_gbt(const FeatureMatrix& X, std::span<const double> y, Loss loss,
                    double quantile, const GbtParams& params);

/// Per-quantile ensembles (one separate training per quantile) plus a squared
/// loss point ensemble.
struct QuantileGbtModel {
    std::vector<double> quantile_levels;
    std::vector<GbtEnsemble> ensembles;
    GbtEnsemble point_ensemble;
    double capacity_kw = std::numeric_limits<double>::infinity();
};

/// Default quantile grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_quantile_grid();

QuantileGbtModel fit_quantile_gbt(const FeatureMatrix& X, std::span<const double> y,
                                  const std::vector<double>& quantile_levels,
                                  const GbtParams& params, double capacity_kw);

/// Per-row quantile predictions with isotonic (sort) crossing repair and
/// clipping to [0, plant capacity]. Horizons derive from row timestamps.
QuantileForecast predict_quantiles(const QuantileGbtModel& model, const FeatureMatrix& X,
                                   Timestamp issue_time);

/// Type-7 (linear interpolation) empirical quantile of a sample.
double empirical_quantile(std::vector<double> values, double q);

}  // namespace hemskit::gbt
