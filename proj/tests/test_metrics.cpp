#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hemskit/metrics.hpp"
#include "oracles.hpp"

using namespace hemskit;

namespace {

QuantileForecast degenerate_forecast(const std::vector<double>& point) {
    QuantileForecast fc;
    fc.quantile_levels = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
                          0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    for (std::size_t h = 0; h < point.size(); ++h) {
        fc.horizons.push_back(static_cast<int>(h) + 1);
        fc.values.push_back(std::vector<double>(fc.quantile_levels.size(), point[h]));
        fc.point.push_back(point[h]);
    }
    return fc;
}

}  // namespace

TEST_CASE("mae hand cases") {
    CHECK(mae(std::vector<double>{1, 2}, std::vector<double>{2, 4}) == doctest::Approx(1.5));
    const std::vector<double> same{3.0, 4.0, 5.0};
    CHECK(mae(same, same) == 0.0);
}

TEST_CASE("mae matches a naive two-pass oracle on random input") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> gauss(0.0, 2.0);
    std::vector<double> pred(100), obs(100), abs_err(100);
    for (int i = 0; i < 100; ++i) {
        pred[i] = gauss(rng);
        obs[i] = gauss(rng);
        abs_err[i] = std::fabs(pred[i] - obs[i]);
    }
    CHECK(mae(pred, obs) == doctest::Approx(oracles::two_pass_mean(abs_err)).epsilon(1e-12));
}

TEST_CASE("mae rejects bad input") {
    CHECK_THROWS_AS(mae(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(mae(std::vector<double>{std::nan("")}, std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("rmse hand cases and the Jensen bound") {
    CHECK(rmse(std::vector<double>{1, 2}, std::vector<double>{2, 4}) ==
          doctest::Approx(std::sqrt(2.5)));
    const std::vector<double> same{1.0, 1.0};
    CHECK(rmse(same, same) == 0.0);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> pred(40), obs(40);
        for (int i = 0; i < 40; ++i) {
            pred[i] = gauss(rng);
            obs[i] = gauss(rng);
        }
        CHECK(rmse(pred, obs) >= mae(pred, obs) - 1e-12);
    }
}

TEST_CASE("degenerate-forecast CRPS equals the point MAE") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 5.0);
    std::vector<double> point(24), obs(24);
    for (int i = 0; i < 24; ++i) {
        point[i] = unit(rng);
        obs[i] = unit(rng);
    }
    const auto fc = degenerate_forecast(point);
    CHECK(crps_from_quantiles(fc, obs) == doctest::Approx(mae(point, obs)).epsilon(1e-12));
}

TEST_CASE("CRPS equals the direct pinball summation oracle") {
    QuantileForecast fc;
    fc.quantile_levels = {0.25, 0.5, 0.75};
    fc.horizons = {1};
    fc.values = {{1.0, 2.0, 3.0}};
    fc.point = {2.0};
    const std::vector<double> obs{2.0};  // observation at the median
    double hand = 0.0;
    hand += 0.25 * (2.0 - 1.0);          // q=0.25, obs above
    hand += 0.0;                          // q=0.50, exact
    hand += (1.0 - 0.75) * (3.0 - 2.0);  // q=0.75, obs below
    hand *= 2.0 / 3.0;
    CHECK(crps_from_quantiles(fc, obs) == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("widening the quantile spread increases CRPS") {
    const std::vector<double> obs{10.0};
    double previous = -1.0;
    for (double widen : {0.5, 1.0, 2.0, 4.0}) {
        QuantileForecast fc;
        fc.quantile_levels = {0.25, 0.5, 0.75};
        fc.horizons = {1};
        fc.values = {{10.0 - widen, 10.0, 10.0 + widen}};
        fc.point = {10.0};
        const double score = crps_from_quantiles(fc, obs);
        CHECK(score > previous);
        previous = score;
    }
}

TEST_CASE("CRPS rejects non-uniform grids and misalignment") {
    QuantileForecast fc;
    fc.quantile_levels = {0.1, 0.5, 0.6};
    fc.horizons = {1};
    fc.values = {{1.0, 2.0, 3.0}};
    fc.point = {2.0};
    CHECK_THROWS_AS(crps_from_quantiles(fc, std::vector<double>{1.0}), std::invalid_argument);

    const auto good = degenerate_forecast({1.0, 2.0});
    CHECK_THROWS_AS(crps_from_quantiles(good, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("improvement formula") {
    CHECK(improvement(8.0, 10.0) == doctest::Approx(20.0));
    CHECK(improvement(10.0, 10.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(improvement(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(improvement(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("night masking keeps daylight samples only") {
    const std::vector<double> proxy{0.0, 0.3, 0.8, 0.0};
    const auto mask = daylight_mask(proxy);
    const std::vector<double> values{10.0, 20.0, 30.0, 40.0};
    const auto kept = apply_mask(values, mask);
    CHECK(kept == std::vector<double>{20.0, 30.0});
}

TEST_CASE("panel alignment is enforced") {
    PanelSeries panel;
    panel.ids = {"a", "b"};
    panel.series.resize(2);
    panel.series[0] = {0, 3600, {1.0, 2.0}};
    panel.series[1] = {0, 3600, {1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(panel.validate(), std::invalid_argument);
    panel.series[1].values.pop_back();
    CHECK_NOTHROW(panel.validate());
}
