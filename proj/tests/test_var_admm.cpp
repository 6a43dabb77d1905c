#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hemskit/admm.hpp"
#include "hemskit/synth.hpp"
#include "oracles.hpp"

using namespace hemskit;
using namespace hemskit::var;

namespace {

PanelSeries toy_panel(const std::vector<std::vector<double>>& values) {
    PanelSeries panel;
    for (std::size_t i = 0; i < values.size(); ++i) {
        panel.ids.push_back("n" + std::to_string(i));
        panel.series.push_back({0, 3600, values[i]});
    }
    return panel;
}

VarDesign seeded_design(int n, int p, int length, std::uint64_t seed) {
    synth::VarPanelConfig config;
    config.seed = seed;
    config.n = n;
    config.p = p;
    config.length = length;
    return build_var_design(synth::make_var_panel(config), p);
}

}  // namespace

TEST_CASE("soft thresholding") {
    CHECK(soft_threshold(3.0, 1.0) == doctest::Approx(2.0));
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(0.0, 0.5) == 0.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss(0.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double x = gauss(rng);
        CHECK(soft_threshold(x, 0.0) == doctest::Approx(x));
    }
    CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("design layout: Z stacks the shifted responses") {
    const auto panel = toy_panel({{1, 2, 3, 4}, {5, 6, 7, 8}});
    const auto design = build_var_design(panel, 1);
    CHECK(design.Y.cols() == 3);
    // With centering removed, Z equals Y shifted by one column.
    for (int t = 0; t < 3; ++t)
        for (int i = 0; i < 2; ++i)
            CHECK(design.Z(i, t) + design.means[i] ==
                  doctest::Approx(panel.series[i].values[t]));
}

TEST_CASE("p equal to length-1 leaves one usable column") {
    const auto panel = toy_panel({{1, 2, 3, 4}});
    const auto design = build_var_design(panel, 3);
    CHECK(design.Y.cols() == 1);
    CHECK_THROWS_AS(build_var_design(panel, 4), std::invalid_argument);
}

TEST_CASE("p=2 design verified entry by entry") {
    const auto panel = toy_panel({{1, 3, 2, 5, 4}, {2, 1, 4, 3, 6}});
    const auto design = build_var_design(panel, 2);
    REQUIRE(design.Y.cols() == 3);
    for (int t = 0; t < 3; ++t) {
        for (int i = 0; i < 2; ++i) {
            // lag-1 block rows, then lag-2 block rows
            CHECK(design.Z(i, t) ==
                  doctest::Approx(panel.series[i].values[t + 1] - design.means[i]));
            CHECK(design.Z(2 + i, t) ==
                  doctest::Approx(panel.series[i].values[t] - design.means[i]));
        }
    }
}

TEST_CASE("full shrinkage beyond lambda_max") {
    const auto design = seeded_design(3, 2, 120, 5);
    const double lam = lambda_max(design);
    const auto model = fit_centralized(design, lam * 1.01, 1.0, {});
    CHECK(model.B.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("lambda=0 recovers least squares") {
    const auto design = seeded_design(3, 1, 150, 6);
    AdmmOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 20000;
    const auto model = fit_centralized(design, 0.0, 1.0, opts);
    // Normal equations oracle.
    const Eigen::MatrixXd gram = design.Z * design.Z.transpose();
    const Eigen::MatrixXd ls =
        gram.ldlt().solve((design.Y * design.Z.transpose()).transpose()).transpose();
    CHECK((model.B - ls).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("centralized objective matches the ISTA oracle") {
    const auto design = seeded_design(3, 2, 200, 7);
    const double lambda = 0.1 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 20000;
    const auto model = fit_centralized(design, lambda, 1.0, opts);
    const Eigen::MatrixXd oracle = oracles::ista_lasso(design.Y, design.Z, lambda);
    const double f_admm = lasso_objective(design.Y, design.Z, model.B, lambda);
    const double f_oracle = lasso_objective(design.Y, design.Z, oracle, lambda);
    CHECK(f_admm <= f_oracle * (1.0 + 1e-6) + 1e-9);
    CHECK(std::fabs(f_admm - f_oracle) <= 1e-6 * std::max(1.0, std::fabs(f_oracle)));
}

TEST_CASE("lambda monotonicity of the support size") {
    const auto design = seeded_design(4, 2, 250, 8);
    const double lambda_ref = 0.1 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 20000;
    std::vector<int> nnz;
    for (double factor : {0.1, 1.0, 10.0}) {
        const auto model = fit_centralized(design, factor * lambda_ref, 1.0, opts);
        int count = 0;
        for (Eigen::Index i = 0; i < model.B.size(); ++i)
            if (model.B.data()[i] != 0.0) ++count;
        nnz.push_back(count);
    }
    CHECK(nnz[0] >= nnz[1]);
    CHECK(nnz[1] >= nnz[2]);
}

TEST_CASE("N=1 consensus split reproduces the centralized trajectory") {
    const auto design = seeded_design(3, 2, 150, 9);
    const double lambda = 0.1 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 20000;
    const auto central = fit_centralized(design, lambda, 1.0, opts);
    const auto consensus = fit_consensus_predictors(design, 1, lambda, 1.0, opts);
    CHECK((consensus.B - central.B).norm() / std::max(1.0, central.B.norm()) < 1e-5);
}

TEST_CASE("consensus split over N=3 matches the centralized fit") {
    const auto design = seeded_design(3, 2, 200, 10);
    const double lambda = 0.1 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 50000;
    const auto central = fit_centralized(design, lambda, 1.0, opts);
    const auto consensus = fit_consensus_predictors(design, 3, lambda, 1.0, opts);
    CHECK(consensus.converged);
    CHECK((consensus.B - central.B).norm() / std::max(1.0, central.B.norm()) < 1e-4);
}

TEST_CASE("consensus round log counts one upload per worker and one broadcast") {
    const auto design = seeded_design(3, 1, 100, 11);
    RoundLog log;
    AdmmOptions opts;
    opts.tol = 1e-8;
    const auto model =
        fit_consensus_predictors(design, 3, 0.1 * lambda_max(design), 1.0, opts, &log);
    CHECK(static_cast<int>(log.rounds.size()) == model.iterations);
    for (const auto& rec : log.rounds) {
        CHECK(rec.upload_digests.size() == 3);  // N worker uploads
        CHECK(rec.consensus.size() > 0);        // hub broadcast
    }
}

TEST_CASE("sharing split equals centralized for N=1 and N=4") {
    const auto design = seeded_design(3, 2, 200, 12);
    const double lambda = 0.1 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 50000;
    const auto central = fit_centralized(design, lambda, 1.0, opts);
    for (int workers : {1, 4}) {
        const auto sharing = fit_sharing_examples(design, workers, lambda, 1.0, opts);
        CHECK(sharing.converged);
        CHECK((sharing.B - central.B).norm() / std::max(1.0, central.B.norm()) < 1e-4);
    }
}

TEST_CASE("sharing split reproduces the centralized sparsity pattern") {
    const auto design = seeded_design(3, 2, 200, 13);
    const double lambda = 0.5 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 50000;
    const auto central = fit_centralized(design, lambda, 1.0, opts);
    const auto sharing = fit_sharing_examples(design, 4, lambda, 1.0, opts);
    for (Eigen::Index i = 0; i < central.B.size(); ++i) {
        const bool a = std::fabs(central.B.data()[i]) > 1e-9;
        const bool b = std::fabs(sharing.B.data()[i]) > 1e-9;
        CHECK(a == b);
    }
}

TEST_CASE("forecasting: zero coefficients return the training mean") {
    const auto panel = toy_panel({{2, 4, 6, 4}, {1, 3, 5, 3}});
    const auto design = build_var_design(panel, 1);
    VarModel model;
    model.B = Eigen::MatrixXd::Zero(2, 2);
    model.n = 2;
    model.p = 1;
    model.means = design.means;

    PanelSeries recent = toy_panel({{6.0}, {5.0}});
    const auto forecast = forecast_var(model, recent, 3);
    for (int s = 0; s < 3; ++s) {
        CHECK(forecast.series[0].values[s] == doctest::Approx(design.means[0]));
        CHECK(forecast.series[1].values[s] == doctest::Approx(design.means[1]));
    }
}

TEST_CASE("scalar recursion: B=0.5 halves the centered state") {
    VarModel model;
    model.B = Eigen::MatrixXd::Constant(1, 1, 0.5);
    model.n = 1;
    model.p = 1;
    model.means = Eigen::VectorXd::Zero(1);
    const PanelSeries recent = toy_panel({{2.0}});
    const auto forecast = forecast_var(model, recent, 2);
    CHECK(forecast.series[0].values[0] == doctest::Approx(1.0));
    CHECK(forecast.series[0].values[1] == doctest::Approx(0.5));
}

TEST_CASE("three-step forecast equals manual triple application") {
    const auto design = seeded_design(2, 2, 100, 14);
    AdmmOptions opts;
    opts.tol = 1e-9;
    auto model = fit_centralized(design, 0.05 * lambda_max(design), 1.0, opts);

    synth::VarPanelConfig config;
    config.seed = 14;
    config.n = 2;
    config.p = 2;
    config.length = 100;
    const auto panel = synth::make_var_panel(config);
    PanelSeries recent;
    recent.ids = panel.ids;
    recent.series.resize(2);
    for (int i = 0; i < 2; ++i) {
        recent.series[i].start = 0;
        recent.series[i].step_seconds = 3600;
        recent.series[i].values = {panel.series[i].values[98], panel.series[i].values[99]};
    }
    const auto forecast = forecast_var(model, recent, 3);

    // Manual iteration in centered space.
    Eigen::VectorXd lag1(2), lag2(2);
    for (int i = 0; i < 2; ++i) {
        lag1(i) = panel.series[i].values[99] - model.means[i];
        lag2(i) = panel.series[i].values[98] - model.means[i];
    }
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd z(4);
        z << lag1, lag2;
        const Eigen::VectorXd next = model.B * z;
        for (int i = 0; i < 2; ++i)
            CHECK(forecast.series[i].values[s] == doctest::Approx(next(i) + model.means[i]));
        lag2 = lag1;
        lag1 = next;
    }
}

TEST_CASE("curious node reconstructs Y from any logged round") {
    const auto design = seeded_design(3, 2, 150, 15);
    RoundLog log;
    AdmmOptions opts;
    opts.tol = 1e-8;
    fit_consensus_predictors(design, 3, 0.1 * lambda_max(design), 1.0, opts, &log);
    REQUIRE(log.rounds.size() >= 2);
    for (std::size_t k : {std::size_t{0}, log.rounds.size() / 2, log.rounds.size() - 1}) {
        const Eigen::MatrixXd estimate = curious_node_reconstruct(log, k);
        CHECK((estimate - design.Y).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("reconstruction works for the degenerate N=1 split") {
    const auto design = seeded_design(2, 1, 80, 16);
    RoundLog log;
    AdmmOptions opts;
    opts.tol = 1e-8;
    fit_consensus_predictors(design, 1, 0.1 * lambda_max(design), 1.0, opts, &log);
    const Eigen::MatrixXd estimate = curious_node_reconstruct(log, log.rounds.size() - 1);
    CHECK((estimate - design.Y).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("sharing split exposes foreign raw lags") {
    const auto design = seeded_design(3, 2, 90, 17);
    const auto audit = audit_sharing_examples(design, 3);
    CHECK(audit.raw_data_crossed);
    // every worker sees the two foreign series
    CHECK(audit.exposures.size() == 3 * 2);
}

TEST_CASE("objective at the returned estimate never beats the oracle by magic") {
    const auto design = seeded_design(5, 3, 300, 18);
    const double lambda = 0.2 * lambda_max(design);
    AdmmOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 30000;
    const auto model = fit_centralized(design, lambda, 1.0, opts);
    const Eigen::MatrixXd oracle = oracles::ista_lasso(design.Y, design.Z, lambda);
    const double f_admm = lasso_objective(design.Y, design.Z, model.B, lambda);
    const double f_oracle = lasso_objective(design.Y, design.Z, oracle, lambda);
    CHECK(f_admm <= f_oracle + 1e-6 * std::max(1.0, std::fabs(f_oracle)));
}
