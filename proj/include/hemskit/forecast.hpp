#pragma once

#include <cstddef>
#include <vector>

#include "hemskit/time_series.hpp"

namespace hemskit {

/// Probabilistic PV forecast: one row per horizon, one column per quantile level.
struct QuantileForecast {
    Timestamp issue_time = 0;
    std::vector<int> horizons;              // lead times in hours, up to 48
    std::vector<double> quantile_levels;    // sorted, in (0,1)
    std::vector<std::vector<double>> values;  // [horizon][quantile], kW
    std::vector<double> point;              // [horizon], kW

    std::size_t horizon_count() const { return horizons.size(); }
    std::size_t level_count() const { return quantile_levels.size(); }

    /// Checks shape consistency, sorted levels in (0,1), non-negative and
    /// per-row non-decreasing values. Throws std::invalid_argument.
    void validate() const;
};

struct MetricReport {
    double mae = 0.0;
    double rmse = 0.0;
    double crps = 0.0;
    std::size_t n_samples = 0;
};

}  // namespace hemskit
