#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hemskit/nwp.hpp"
#include "hemskit/time_series.hpp"

namespace hemskit::features {

/// Design matrix handed to the learners. Rows are sample timestamps, columns
/// are uniquely named features. NaN marks values lost to lag/lead trimming;
/// incomplete rows are dropped before fitting.
struct FeatureMatrix {
    std::vector<Timestamp> rows;
    std::vector<std::string> columns;
    std::vector<double> values;  // row-major [rows.size() x columns.size()]

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }

    double at(std::size_t r, std::size_t c) const { return values[r * columns.size() + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * columns.size() + c]; }

    int column_index(const std::string& name) const;
    bool has_column(const std::string& name) const;

    /// Column-wise join on identical row timestamps. Throws on column collision
    /// or row mismatch.
    static FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b);

    /// Removes every row containing a NaN.
    void drop_incomplete_rows();

    void validate() const;
};

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

/// Month-of-year (1-12) and hour-of-day (0-23) columns.
FeatureMatrix seasonal_features(const std::vector<Timestamp>& timestamps);

/// Lag/lead shifts, centered moving sample variances and previous-run
/// duplicates of per-location NWP series. Window sizes must be odd and no
/// longer than the series.
FeatureMatrix temporal_features(const std::vector<Timestamp>& timestamps,
                                const std::vector<NamedSeries>& vars,
                                const std::vector<NamedSeries>& prev_run_vars,
                                const std::vector<int>& lags, const std::vector<int>& leads,
                                const std::vector<int>& var_windows);

/// Per valid time and variable: spatial standard deviation across grid points
/// and the inverse-distance weighted average centered on the target location.
FeatureMatrix spatial_features(const NwpGrid& grid, GridPoint target);

/// Principal components of one NWP variable's grid field, mean-centered, with
/// a deterministic sign convention (largest-magnitude loading positive).
struct PcaModel {
    Eigen::VectorXd mean;                // [point]
    Eigen::MatrixXd components;          // [n_pc x point], row-orthonormal
    Eigen::VectorXd explained_variance;  // non-increasing
};

PcaModel fit_pca(const Eigen::MatrixXd& samples, int n_pc);
Eigen::MatrixXd apply_pca(const PcaModel& model, const Eigen::MatrixXd& samples);

enum class ModelKind { base, model_t, model_f };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct FeatureOptions {
    std::vector<int> lags = {1, 2};
    std::vector<int> leads = {1, 2};
    std::vector<int> var_windows = {3, 7, 11};
    int n_pc = 3;
    double idw_power = 2.0;
    double idw_epsilon = 1e-6;
};

/// Operational view of a grid: each distinct valid time mapped to the most
/// recent run covering it. (run, lead) pairs sorted by valid time.
struct OperationalSlice {
    std::vector<Timestamp> times;
    std::vector<std::size_t> run;
    std::vector<std::size_t> lead;
};

OperationalSlice operational_slice(const NwpGrid& grid);

/// Latest-run values of every variable at one grid point, per valid time.
FeatureMatrix point_variables(const NwpGrid& grid, std::size_t point);

/// Full design for one model family. PCA models are fit on rows at or before
/// pca_fit_until to keep test folds uncontaminated, then applied everywhere.
FeatureMatrix assemble_design(ModelKind kind, const NwpGrid& grid, GridPoint target,
                              const FeatureOptions& opts, Timestamp pca_fit_until);

/// Row-intersects a design with a target series; returns the rows of X that
/// have an aligned observation and the matching y vector.
std::pair<FeatureMatrix, std::vector<double>> align_to_target(const FeatureMatrix& X,
                                                              const TimeSeries& target);

}  // namespace hemskit::features
