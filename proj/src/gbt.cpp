#include "hemskit/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

namespace hemskit::gbt {

double RegressionTree::predict_row(std::span<const double> row) const {
    int idx = 0;
    while (nodes[idx].feature >= 0) {
        const auto& n = nodes[idx];
        idx = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[idx].value;
}

int RegressionTree::leaf_for(std::span<const double> row) const {
    int idx = 0;
    while (nodes[idx].feature >= 0) {
        const auto& n = nodes[idx];
        idx = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return idx;
}

std::vector<int> RegressionTree::leaf_indices() const {
    std::vector<int> leaves;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].feature < 0) leaves.push_back(static_cast<int>(i));
    return leaves;
}

namespace {

struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Shared split-finding state: feature orders are argsorted once per tree and
/// every node scans them filtered by membership, so a node costs O(F * n).
struct TreeBuilder {
    const FeatureMatrix& X;
    std::span<const double> g;
    const TreeParams& params;
    std::vector<std::vector<int>> order;  // per feature, rows ascending by value
    std::vector<char> in_node;

    TreeBuilder(const FeatureMatrix& x, std::span<const double> targets, const TreeParams& p)
        : X(x), g(targets), params(p), in_node(x.row_count(), 0) {
        order.resize(X.column_count());
        std::vector<int> base(X.row_count());
        std::iota(base.begin(), base.end(), 0);
        for (std::size_t f = 0; f < X.column_count(); ++f) {
            order[f] = base;
            std::sort(order[f].begin(), order[f].end(), [&](int a, int b) {
                const double xa = X.at(a, f), xb = X.at(b, f);
                if (xa != xb) return xa < xb;
                return a < b;
            });
        }
    }

    Split best_split(const std::vector<int>& rows) {
        Split best;
        const int n = static_cast<int>(rows.size());
        if (n < 2 * params.min_samples_leaf) return best;
        double sum = 0.0, sum2 = 0.0;
        for (int r : rows) {
            sum += g[r];
            sum2 += g[r] * g[r];
        }
        const double sse_parent = sum2 - sum * sum / n;
        if (sse_parent <= 1e-12 * (1.0 + sum * sum / n)) return best;

        for (int r : rows) in_node[r] = 1;
        for (std::size_t f = 0; f < X.column_count(); ++f) {
            double left_sum = 0.0, left_sum2 = 0.0;
            int n_left = 0;
            double prev_value = 0.0;
            bool have_prev = false;
            for (int r : order[f]) {
                if (!in_node[r]) continue;
                const double xv = X.at(r, f);
                if (have_prev && xv != prev_value && n_left >= params.min_samples_leaf &&
                    n - n_left >= params.min_samples_leaf) {
                    const double right_sum = sum - left_sum;
                    const double right_sum2 = sum2 - left_sum2;
                    const double sse = (left_sum2 - left_sum * left_sum / n_left) +
                                       (right_sum2 - right_sum * right_sum / (n - n_left));
                    const double gain = sse_parent - sse;
                    // Strict improvement keeps the lowest-feature,
                    // lowest-threshold tie-break.
                    if (gain > best.gain && gain > 1e-12 * (sse_parent + 1e-12)) {
                        best.found = true;
                        best.feature = static_cast<int>(f);
                        best.threshold = 0.5 * (prev_value + xv);
                        best.gain = gain;
                    }
                }
                left_sum += g[r];
                left_sum2 += g[r] * g[r];
                ++n_left;
                prev_value = xv;
                have_prev = true;
            }
        }
        for (int r : rows) in_node[r] = 0;
        return best;
    }

    void grow(RegressionTree& tree, int node_idx, const std::vector<int>& rows, int depth) {
        double mean = 0.0;
        for (int r : rows) mean += g[r];
        mean /= static_cast<double>(rows.size());
        tree.nodes[node_idx].value = mean;

        if (depth >= params.max_depth) return;
        const Split split = best_split(rows);
        if (!split.found) return;

        std::vector<int> left_rows, right_rows;
        for (int r : rows) {
            if (X.at(r, split.feature) <= split.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        const int left_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const int right_idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[node_idx].feature = split.feature;
        tree.nodes[node_idx].threshold = split.threshold;
        tree.nodes[node_idx].left = left_idx;
        tree.nodes[node_idx].right = right_idx;
        grow(tree, left_idx, left_rows, depth + 1);
        grow(tree, right_idx, right_rows, depth + 1);
    }
};

std::span<const double> row_view(const FeatureMatrix& X, std::size_t r) {
    return {X.values.data() + r * X.column_count(), X.column_count()};
}

double loss_value(Loss loss, double quantile, std::span<const double> y,
                  std::span<const double> fit) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - fit[i];
        if (loss == Loss::squared)
            acc += 0.5 * d * d;
        else
            acc += d >= 0.0 ? quantile * d : (quantile - 1.0) * d;
    }
    return acc / static_cast<double>(y.size());
}

}  // namespace

RegressionTree fit_tree(const FeatureMatrix& X, std::span<const double> targets,
                        const TreeParams& params) {
    if (X.row_count() == 0) throw std::invalid_argument("empty training set");
    if (X.row_count() != targets.size())
        throw std::invalid_argument("target length mismatch");
    if (X.row_count() < static_cast<std::size_t>(params.min_samples_leaf))
        throw std::invalid_argument("fewer rows than min_samples_leaf");
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> rows(X.row_count());
    std::iota(rows.begin(), rows.end(), 0);
    TreeBuilder builder(X, targets, params);
    builder.grow(tree, 0, rows, 0);
    return tree;
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

/// Exact minimizer of sum_i pinball_q(v_i - c) over c: the smallest order
/// statistic whose rank reaches q*n. The interpolated quantile can sit off the
/// minimizing set and would break per-stage loss descent.
double pinball_minimizer(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const double target = q * static_cast<double>(values.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(target));
    if (rank < 1) rank = 1;
    if (rank > values.size()) rank = values.size();
    return values[rank - 1];
}

}  // namespace

double GbtEnsemble::predict_row(std::span<const double> row) const {
    double f = initial;
    for (const auto& tree : trees) f += learning_rate * tree.predict_row(row);
    return f;
}

std::vector<double> GbtEnsemble::predict(const FeatureMatrix& X) const {
    if (X.columns != feature_schema)
        throw std::invalid_argument("feature schema mismatch at prediction time");
    std::vector<double> out(X.row_count());
    for (std::size_t r = 0; r < X.row_count(); ++r) out[r] = predict_row(row_view(X, r));
    return out;
}

GbtEnsemble fit_gbt(const FeatureMatrix& X, std::span<const double> y, Loss loss,
                    double quantile, const GbtParams& params) {
    if (X.row_count() != y.size()) throw std::invalid_argument("X/y row mismatch");
    if (X.row_count() == 0) throw std::invalid_argument("empty training set");
    if (loss == Loss::pinball && !(quantile > 0.0 && quantile < 1.0))
        throw std::invalid_argument("pinball quantile outside (0,1)");
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
        throw std::invalid_argument("learning rate outside (0,1]");

    GbtEnsemble model;
    model.loss = loss;
    model.quantile = quantile;
    model.learning_rate = params.learning_rate;
    model.feature_schema = X.columns;

    const std::size_t n = X.row_count();
    if (loss == Loss::squared) {
        model.initial = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    } else {
        model.initial = pinball_minimizer({y.begin(), y.end()}, quantile);
    }

    std::vector<double> fit(n, model.initial);
    std::vector<double> grad(n);
    model.training_loss.push_back(loss_value(loss, quantile, y, fit));

    for (int stage = 0; stage < params.n_trees; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit[i];
            grad[i] = loss == Loss::squared ? r : (r > 0.0 ? quantile : quantile - 1.0);
        }
        RegressionTree tree = fit_tree(X, grad, params.tree);

        // Leaf line search: replace each leaf by the loss-optimal constant for
        // the samples it captures, which keeps every shrinkage step descending.
        std::vector<std::vector<double>> residuals(tree.nodes.size());
        std::vector<int> leaf_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            leaf_of[i] = tree.leaf_for(row_view(X, i));
            residuals[leaf_of[i]].push_back(y[i] - fit[i]);
        }
        for (int leaf : tree.leaf_indices()) {
            auto& res = residuals[leaf];
            if (res.empty()) continue;
            if (loss == Loss::squared) {
                tree.nodes[leaf].value =
                    std::accumulate(res.begin(), res.end(), 0.0) / static_cast<double>(res.size());
            } else {
                tree.nodes[leaf].value = pinball_minimizer(res, quantile);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            fit[i] += params.learning_rate * tree.nodes[leaf_of[i]].value;
        model.trees.push_back(std::move(tree));
        model.training_loss.push_back(loss_value(loss, quantile, y, fit));
    }
    return model;
}

std::vector<double> default_quantile_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(static_cast<double>(i) * 0.05);
    return grid;
}

QuantileGbtModel fit_quantile_gbt(const FeatureMatrix& X, std::span<const double> y,
                                  const std::vector<double>& quantile_levels,
                                  const GbtParams& params, double capacity_kw) {
    if (quantile_levels.empty()) throw std::invalid_argument("no quantile levels");
    QuantileGbtModel model;
    model.quantile_levels = quantile_levels;
    model.capacity_kw = capacity_kw;
    model.ensembles.resize(quantile_levels.size());

    // One separate training per quantile; fits are independent so they can run
    // concurrently without affecting the result.
    std::vector<std::future<GbtEnsemble>> jobs;
    jobs.reserve(quantile_levels.size());
    for (double q : quantile_levels)
        jobs.push_back(std::async(std::launch::async,
                                  [&X, y, q, &params] { return fit_gbt(X, y, Loss::pinball, q, params); }));
    for (std::size_t i = 0; i < jobs.size(); ++i) model.ensembles[i] = jobs[i].get();
    model.point_ensemble = fit_gbt(X, y, Loss::squared, 0.5, params);
    return model;
}

QuantileForecast predict_quantiles(const QuantileGbtModel& model, const FeatureMatrix& X,
                                   Timestamp issue_time) {
    QuantileForecast fc;
    fc.issue_time = issue_time;
    fc.quantile_levels = model.quantile_levels;
    fc.horizons.reserve(X.row_count());
    for (Timestamp t : X.rows)
        fc.horizons.push_back(static_cast<int>((t - issue_time) / 3600));

    std::vector<std::vector<double>> per_level;
    per_level.reserve(model.ensembles.size());
    for (const auto& ens : model.ensembles) per_level.push_back(ens.predict(X));
    std::vector<double> point = model.point_ensemble.predict(X);

    const auto clip = [&](double v) {
        return std::min(std::max(v, 0.0), model.capacity_kw);
    };
    fc.values.resize(X.row_count());
    fc.point.resize(X.row_count());
    for (std::size_t r = 0; r < X.row_count(); ++r) {
        std::vector<double> row(model.quantile_levels.size());
        for (std::size_t q = 0; q < row.size(); ++q) row[q] = per_level[q][r];
        std::sort(row.begin(), row.end());  // quantile-crossing repair
        for (auto& v : row) v = clip(v);
        fc.values[r] = std::move(row);
        fc.point[r] = clip(point[r]);
    }
    fc.validate();
    return fc;
}

}  // namespace hemskit::gbt
