#pragma once

#include <span>
#include <vector>

#include "hemskit/forecast.hpp"

namespace hemskit {

/// Mean absolute error. Inputs must be equal-length, non-empty and finite.
double mae(std::span<const double> pred, std::span<const double> obs);

/// Root mean squared error, same preconditions as mae().
double rmse(std::span<const double> pred, std::span<const double> obs);

/// Pinball (quantile) loss of a single prediction at level q.
double pinball(double obs, double pred, double q);

/// CRPS approximated by the pinball average (2/Q) * sum_q pinball_q, averaged
/// over samples. Requires a uniformly spaced quantile grid and obs aligned to
/// the forecast horizons.
double crps_from_quantiles(const QuantileForecast& fc, std::span<const double> obs);

/// Relative skill in percent: (1 - eps_model/eps_base) * 100. eps_base must be > 0.
double improvement(double eps_model, double eps_base);

/// Keeps only positions where mask[i] is true (night removal before PV metrics).
std::vector<double> apply_mask(std::span<const double> values, const std::vector<bool>& mask);

/// Night mask from a clear-sky irradiance proxy: daytime iff proxy > 0.
std::vector<bool> daylight_mask(std::span<const double> clearsky_proxy);

/// MAE/RMSE/CRPS of a forecast against observations in one pass.
MetricReport evaluate_forecast(const QuantileForecast& fc, std::span<const double> obs);

}  // namespace hemskit
