#include "hemskit/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace hemskit::features {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

int FeatureMatrix::column_index(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) return static_cast<int>(c);
    throw std::invalid_argument("unknown feature column: " + name);
}

bool FeatureMatrix::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

FeatureMatrix FeatureMatrix::concat_columns(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.rows != b.rows)
        throw std::invalid_argument("cannot concat designs with different rows");
    FeatureMatrix out;
    out.rows = a.rows;
    out.columns = a.columns;
    for (const auto& name : b.columns) {
        if (a.has_column(name)) throw std::invalid_argument("feature column collision: " + name);
        out.columns.push_back(name);
    }
    out.values.resize(out.rows.size() * out.columns.size());
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
        for (std::size_t c = 0; c < a.columns.size(); ++c) out.at(r, c) = a.at(r, c);
        for (std::size_t c = 0; c < b.columns.size(); ++c)
            out.at(r, a.columns.size() + c) = b.at(r, c);
    }
    return out;
}

void FeatureMatrix::drop_incomplete_rows() {
    std::vector<Timestamp> kept_rows;
    std::vector<double> kept_values;
    kept_rows.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        bool complete = true;
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (std::isnan(at(r, c))) {
                complete = false;
                break;
            }
        if (!complete) continue;
        kept_rows.push_back(rows[r]);
        for (std::size_t c = 0; c < columns.size(); ++c) kept_values.push_back(at(r, c));
    }
    rows = std::move(kept_rows);
    values = std::move(kept_values);
}

void FeatureMatrix::validate() const {
    if (values.size() != rows.size() * columns.size())
        throw std::invalid_argument("feature matrix shape mismatch");
    std::set<std::string> seen(columns.begin(), columns.end());
    if (seen.size() != columns.size())
        throw std::invalid_argument("duplicate feature column names");
}

FeatureMatrix seasonal_features(const std::vector<Timestamp>& timestamps) {
    FeatureMatrix out;
    out.rows = timestamps;
    out.columns = {"month", "hour"};
    out.values.resize(timestamps.size() * 2);
    for (std::size_t r = 0; r < timestamps.size(); ++r) {
        out.at(r, 0) = static_cast<double>(month_of(timestamps[r]));
        out.at(r, 1) = static_cast<double>(hour_of(timestamps[r]));
    }
    return out;
}

namespace {

/// Sample variance over a centered window; the symmetric support around t is
/// required, so edges come back NaN.
std::vector<double> centered_variance(const std::vector<double>& x, int window) {
    const int half = (window - 1) / 2;
    const int n = static_cast<int>(x.size());
    std::vector<double> out(x.size(), kNaN);
    for (int t = half; t < n - half; ++t) {
        double mean = 0.0;
        for (int j = t - half; j <= t + half; ++j) mean += x[j];
        mean /= window;
        double ss = 0.0;
        for (int j = t - half; j <= t + half; ++j) ss += (x[j] - mean) * (x[j] - mean);
        out[t] = ss / (window - 1);
    }
    return out;
}

std::vector<double> shifted(const std::vector<double>& x, int offset) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(x.size(), kNaN);
    for (int t = 0; t < n; ++t) {
        const int src = t + offset;
        if (src >= 0 && src < n) out[t] = x[src];
    }
    return out;
}

}  // namespace

FeatureMatrix temporal_features(const std::vector<Timestamp>& timestamps,
                                const std::vector<NamedSeries>& vars,
                                const std::vector<NamedSeries>& prev_run_vars,
                                const std::vector<int>& lags, const std::vector<int>& leads,
                                const std::vector<int>& var_windows) {
    for (int w : var_windows) {
        if (w < 1 || w % 2 == 0) throw std::invalid_argument("variance windows must be odd");
        if (static_cast<std::size_t>(w) > timestamps.size())
            throw std::invalid_argument("variance window longer than series");
    }
    FeatureMatrix out;
    out.rows = timestamps;
    std::vector<std::vector<double>> cols;
    for (const auto& var : vars) {
        if (var.values.size() != timestamps.size())
            throw std::invalid_argument("temporal feature series misaligned");
        for (int lag : lags) {
            out.columns.push_back(var.name + "_lag" + std::to_string(lag));
            cols.push_back(shifted(var.values, -lag));
        }
        for (int lead : leads) {
            out.columns.push_back(var.name + "_lead" + std::to_string(lead));
            cols.push_back(shifted(var.values, lead));
        }
        for (int w : var_windows) {
            out.columns.push_back(var.name + "_var" + std::to_string(w));
            cols.push_back(centered_variance(var.values, w));
        }
    }
    for (const auto& var : prev_run_vars) {
        if (var.values.size() != timestamps.size())
            throw std::invalid_argument("previous-run series misaligned");
        out.columns.push_back(var.name + "_prev_run");
        cols.push_back(var.values);
    }
    out.values.resize(out.rows.size() * out.columns.size());
    for (std::size_t r = 0; r < out.rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out.at(r, c) = cols[c][r];
    return out;
}

OperationalSlice operational_slice(const NwpGrid& grid) {
    // Most recent run wins when several cover the same valid time.
    std::map<Timestamp, std::pair<std::size_t, std::size_t>> latest;
    for (std::size_t r = 0; r < grid.runs(); ++r)
        for (std::size_t l = 0; l < grid.leads(); ++l) latest[grid.valid_time(r, l)] = {r, l};
    OperationalSlice slice;
    for (const auto& [t, rl] : latest) {
        slice.times.push_back(t);
        slice.run.push_back(rl.first);
        slice.lead.push_back(rl.second);
    }
    return slice;
}

FeatureMatrix point_variables(const NwpGrid& grid, std::size_t point) {
    const auto slice = operational_slice(grid);
    FeatureMatrix out;
    out.rows = slice.times;
    out.columns = grid.variables;
    out.values.resize(out.rows.size() * out.columns.size());
    for (std::size_t r = 0; r < slice.times.size(); ++r)
        for (std::size_t v = 0; v < grid.variable_count(); ++v)
            out.at(r, v) = grid.at(slice.run[r], slice.lead[r], point, v);
    return out;
}

namespace {

std::vector<double> idw_weights(const NwpGrid& grid, GridPoint target, double power,
                                double epsilon) {
    std::vector<double> w(grid.point_count());
    double total = 0.0;
    for (std::size_t p = 0; p < grid.point_count(); ++p) {
        const double dx = grid.points[p].lat - target.lat;
        const double dy = grid.points[p].lon - target.lon;
        const double dist = std::max(std::sqrt(dx * dx + dy * dy), epsilon);
        w[p] = 1.0 / std::pow(dist, power);
        total += w[p];
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace

FeatureMatrix spatial_features(const NwpGrid& grid, GridPoint target) {
    if (grid.point_count() < 2)
        throw std::invalid_argument("spatial features need at least two grid points");
    const FeatureOptions defaults;
    const auto weights = idw_weights(grid, target, defaults.idw_power, defaults.idw_epsilon);
    const auto slice = operational_slice(grid);
    const std::size_t n_pts = grid.point_count();

    FeatureMatrix out;
    out.rows = slice.times;
    for (const auto& name : grid.variables) {
        out.columns.push_back(name + "_sstd");
        out.columns.push_back(name + "_swavg");
    }
    out.values.resize(out.rows.size() * out.columns.size());
    for (std::size_t r = 0; r < slice.times.size(); ++r) {
        for (std::size_t v = 0; v < grid.variable_count(); ++v) {
            double mean = 0.0, wavg = 0.0;
            for (std::size_t p = 0; p < n_pts; ++p) {
                const double x = grid.at(slice.run[r], slice.lead[r], p, v);
                mean += x;
                wavg += weights[p] * x;
            }
            mean /= static_cast<double>(n_pts);
            double ss = 0.0;
            for (std::size_t p = 0; p < n_pts; ++p) {
                const double d = grid.at(slice.run[r], slice.lead[r], p, v) - mean;
                ss += d * d;
            }
            out.at(r, 2 * v) = std::sqrt(ss / static_cast<double>(n_pts - 1));
            out.at(r, 2 * v + 1) = wavg;
        }
    }
    return out;
}

PcaModel fit_pca(const Eigen::MatrixXd& samples, int n_pc) {
    const auto rows = samples.rows();
    const auto cols = samples.cols();
    if (n_pc < 1 || n_pc > std::min(rows, cols))
        throw std::invalid_argument("n_pc outside [1, min(time, point)]");
    PcaModel model;
    model.mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    model.components.resize(n_pc, cols);
    model.explained_variance.resize(n_pc);
    const auto& sv = svd.singularValues();
    const double denom = rows > 1 ? static_cast<double>(rows - 1) : 1.0;
    for (int k = 0; k < n_pc; ++k) {
        Eigen::VectorXd comp = svd.matrixV().col(k);
        // Sign convention: the largest-magnitude loading is positive.
        int arg_max = 0;
        comp.cwiseAbs().maxCoeff(&arg_max);
        if (comp[arg_max] < 0.0) comp = -comp;
        model.components.row(k) = comp.transpose();
        model.explained_variance[k] = sv[k] * sv[k] / denom;
    }
    return model;
}

Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& samples) {
    if (samples.cols() != model.mean.size())
        throw std::invalid_argument("PCA dimension mismatch");
    const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
    return centered * model.components.transpose();
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "base") return ModelKind::base;
    if (name == "T" || name == "t" || name == "model_t") return ModelKind::model_t;
    if (name == "F" || name == "f" || name == "model_f") return ModelKind::model_f;
    throw std::invalid_argument("unknown model kind: " + name);
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::base: return "base";
        case ModelKind::model_t: return "T";
        case ModelKind::model_f: return "F";
    }
    return "?";
}

namespace {

/// Values of every variable at `point` taken from the run preceding the
/// operational one for each valid time; NaN where only one run covers it.
FeatureMatrix previous_run_point_variables(const NwpGrid& grid, std::size_t point) {
    std::map<Timestamp, std::vector<std::pair<std::size_t, std::size_t>>> cover;
    for (std::size_t r = 0; r < grid.runs(); ++r)
        for (std::size_t l = 0; l < grid.leads(); ++l)
            cover[grid.valid_time(r, l)].push_back({r, l});
    const auto slice = operational_slice(grid);
    FeatureMatrix out;
    out.rows = slice.times;
    out.columns = grid.variables;
    out.values.assign(out.rows.size() * out.columns.size(), kNaN);
    for (std::size_t r = 0; r < slice.times.size(); ++r) {
        const auto& runs = cover[slice.times[r]];
        if (runs.size() < 2) continue;
        const auto& prev = runs[runs.size() - 2];
        for (std::size_t v = 0; v < grid.variable_count(); ++v)
            out.at(r, v) = grid.at(prev.first, prev.second, point, v);
    }
    return out;
}

}  // namespace

FeatureMatrix assemble_design(ModelKind kind, const NwpGrid& grid, GridPoint target,
                              const FeatureOptions& opts, Timestamp pca_fit_until) {
    const std::size_t center = grid.central_point();
    FeatureMatrix design = seasonal_features(operational_slice(grid).times);
    design = FeatureMatrix::concat_columns(design, point_variables(grid, center));

    if (kind == ModelKind::model_t || kind == ModelKind::model_f) {
        const FeatureMatrix central = point_variables(grid, center);
        const FeatureMatrix prev = previous_run_point_variables(grid, center);
        std::vector<NamedSeries> vars, prev_vars;
        for (std::size_t v = 0; v < grid.variable_count(); ++v) {
            NamedSeries s{grid.variables[v], {}};
            s.values.resize(central.row_count());
            for (std::size_t r = 0; r < central.row_count(); ++r) s.values[r] = central.at(r, v);
            vars.push_back(std::move(s));
            NamedSeries ps{grid.variables[v], {}};
            ps.values.resize(prev.row_count());
            for (std::size_t r = 0; r < prev.row_count(); ++r) ps.values[r] = prev.at(r, v);
            prev_vars.push_back(std::move(ps));
        }
        design = FeatureMatrix::concat_columns(
            design, temporal_features(central.rows, vars, prev_vars, opts.lags, opts.leads,
                                      opts.var_windows));
    }

    if (kind == ModelKind::model_f) {
        design = FeatureMatrix::concat_columns(design, spatial_features(grid, target));
        const auto slice = operational_slice(grid);
        for (std::size_t v = 0; v < grid.variable_count(); ++v) {
            Eigen::MatrixXd field(slice.times.size(), grid.point_count());
            std::vector<std::size_t> train_rows;
            for (std::size_t r = 0; r < slice.times.size(); ++r) {
                for (std::size_t p = 0; p < grid.point_count(); ++p)
                    field(r, p) = grid.at(slice.run[r], slice.lead[r], p, v);
                if (slice.times[r] <= pca_fit_until) train_rows.push_back(r);
            }
            if (train_rows.size() < 2)
                throw std::invalid_argument("not enough rows before pca_fit_until");
            Eigen::MatrixXd train(train_rows.size(), grid.point_count());
            for (std::size_t i = 0; i < train_rows.size(); ++i)
                train.row(i) = field.row(train_rows[i]);
            const int n_pc = std::min<int>(opts.n_pc, static_cast<int>(grid.point_count()));
            const PcaModel pca = fit_pca(train, n_pc);
            const Eigen::MatrixXd scores = apply_pca(pca, field);
            FeatureMatrix pcs;
            pcs.rows = slice.times;
            for (int k = 0; k < n_pc; ++k)
                pcs.columns.push_back(grid.variables[v] + "_pc" + std::to_string(k + 1));
            pcs.values.resize(pcs.rows.size() * pcs.columns.size());
            for (std::size_t r = 0; r < pcs.rows.size(); ++r)
                for (int k = 0; k < n_pc; ++k) pcs.at(r, k) = scores(r, k);
            design = FeatureMatrix::concat_columns(design, pcs);
        }
    }

    design.drop_incomplete_rows();
    design.validate();
    return design;
}

std::pair<FeatureMatrix, std::vector<double>> align_to_target(const FeatureMatrix& X,
                                                              const TimeSeries& target) {
    std::map<Timestamp, double> by_time;
    for (std::size_t i = 0; i < target.size(); ++i) by_time[target.time_at(i)] = target.values[i];
    FeatureMatrix out;
    out.columns = X.columns;
    std::vector<double> y;
    for (std::size_t r = 0; r < X.row_count(); ++r) {
        const auto it = by_time.find(X.rows[r]);
        if (it == by_time.end()) continue;
        out.rows.push_back(X.rows[r]);
        for (std::size_t c = 0; c < X.column_count(); ++c) out.values.push_back(X.at(r, c));
        y.push_back(it->second);
    }
    return {std::move(out), std::move(y)};
}

}  // namespace hemskit::features
