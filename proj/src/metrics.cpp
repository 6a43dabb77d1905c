#include "hemskit/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace hemskit {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> obs) {
    if (pred.size() != obs.size()) throw std::invalid_argument("pred/obs length mismatch");
    if (pred.empty()) throw std::invalid_argument("empty input");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i]) || !std::isfinite(obs[i]))
            throw std::invalid_argument("non-finite value in metric input");
    }
}

}  // namespace

void QuantileForecast::validate() const {
    if (horizons.size() != values.size() || horizons.size() != point.size())
        throw std::invalid_argument("quantile forecast shape mismatch");
    for (std::size_t q = 0; q < quantile_levels.size(); ++q) {
        if (!(quantile_levels[q] > 0.0 && quantile_levels[q] < 1.0))
            throw std::invalid_argument("quantile level outside (0,1)");
        if (q > 0 && quantile_levels[q] <= quantile_levels[q - 1])
            throw std::invalid_argument("quantile levels not strictly increasing");
    }
    for (const auto& row : values) {
        if (row.size() != quantile_levels.size())
            throw std::invalid_argument("quantile row width mismatch");
        for (std::size_t q = 0; q < row.size(); ++q) {
            if (row[q] < 0.0) throw std::invalid_argument("negative PV quantile");
            if (q > 0 && row[q] < row[q - 1])
                throw std::invalid_argument("quantile crossing in forecast");
        }
    }
}

double mae(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::fabs(pred[i] - obs[i]);
    return acc / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - obs[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double pinball(double obs, double pred, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
    return obs >= pred ? q * (obs - pred) : (1.0 - q) * (pred - obs);
}

double crps_from_quantiles(const QuantileForecast& fc, std::span<const double> obs) {
    fc.validate();
    if (obs.size() != fc.horizon_count())
        throw std::invalid_argument("observations misaligned with forecast horizons");
    if (obs.empty()) throw std::invalid_argument("empty input");
    const auto& levels = fc.quantile_levels;
    if (levels.size() < 2) throw std::invalid_argument("need at least two quantile levels");
    const double spacing = levels[1] - levels[0];
    for (std::size_t q = 1; q < levels.size(); ++q) {
        if (std::fabs((levels[q] - levels[q - 1]) - spacing) > 1e-9)
            throw std::invalid_argument("quantile grid not uniform");
    }
    const double q_count = static_cast<double>(levels.size());
    double acc = 0.0;
    for (std::size_t h = 0; h < obs.size(); ++h) {
        if (!std::isfinite(obs[h])) throw std::invalid_argument("non-finite observation");
        double sample = 0.0;
        for (std::size_t q = 0; q < levels.size(); ++q)
            sample += pinball(obs[h], fc.values[h][q], levels[q]);
        acc += 2.0 / q_count * sample;
    }
    return acc / static_cast<double>(obs.size());
}

double improvement(double eps_model, double eps_base) {
    if (!(eps_base > 0.0)) throw std::invalid_argument("base score must be positive");
    // (1 - m/b) * 100, written over the common denominator so clean ratios
    // come out exact in floating point.
    return (eps_base - eps_model) / eps_base * 100.0;
}

std::vector<double> apply_mask(std::span<const double> values, const std::vector<bool>& mask) {
    if (values.size() != mask.size()) throw std::invalid_argument("mask length mismatch");
    std::vector<double> kept;
    kept.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (mask[i]) kept.push_back(values[i]);
    return kept;
}

std::vector<bool> daylight_mask(std::span<const double> clearsky_proxy) {
    std::vector<bool> mask(clearsky_proxy.size());
    for (std::size_t i = 0; i < clearsky_proxy.size(); ++i)
        mask[i] = clearsky_proxy[i] > 0.0;
    return mask;
}

MetricReport evaluate_forecast(const QuantileForecast& fc, std::span<const double> obs) {
    MetricReport report;
    report.mae = mae(fc.point, obs);
    report.rmse = rmse(fc.point, obs);
    report.crps = crps_from_quantiles(fc, obs);
    report.n_samples = obs.size();
    return report;
}

}  // namespace hemskit
