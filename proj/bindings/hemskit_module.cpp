#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hemskit/admm.hpp"
#include "hemskit/epso.hpp"
#include "hemskit/gbt.hpp"
#include "hemskit/metrics.hpp"
#include "hemskit/scheduler.hpp"
#include "hemskit/synth.hpp"
#include "hemskit/virtual_battery.hpp"

namespace py = pybind11;
using namespace hemskit;

namespace {

PanelSeries panel_from_matrix(const Eigen::MatrixXd& values) {
    PanelSeries panel;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        panel.ids.push_back("s" + std::to_string(i));
        TimeSeries series;
        series.start = 0;
        series.step_seconds = 3600;
        series.values.assign(values.row(i).begin(), values.row(i).end());
        panel.series.push_back(std::move(series));
    }
    return panel;
}

Eigen::MatrixXd panel_to_matrix(const PanelSeries& panel) {
    Eigen::MatrixXd values(panel.node_count(), panel.length());
    for (std::size_t i = 0; i < panel.node_count(); ++i)
        for (std::size_t t = 0; t < panel.length(); ++t)
            values(i, t) = panel.series[i].values[t];
    return values;
}

features::FeatureMatrix design_from_matrix(const Eigen::MatrixXd& x) {
    features::FeatureMatrix fm;
    for (Eigen::Index c = 0; c < x.cols(); ++c) fm.columns.push_back("f" + std::to_string(c));
    fm.rows.resize(x.rows());
    fm.values.resize(x.size());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        fm.rows[r] = r;
        for (Eigen::Index c = 0; c < x.cols(); ++c) fm.at(r, c) = x(r, c);
    }
    return fm;
}

Eigen::MatrixXd trajectories_to_matrix(const std::vector<flex::FlexTrajectory>& list) {
    if (list.empty()) return {};
    Eigen::MatrixXd m(list.size(), list.front().deltas.size());
    for (std::size_t k = 0; k < list.size(); ++k)
        for (std::size_t t = 0; t < list[k].deltas.size(); ++t) m(k, t) = list[k].deltas[t];
    return m;
}

std::vector<flex::FlexTrajectory> trajectories_from_matrix(const Eigen::MatrixXd& m) {
    std::vector<flex::FlexTrajectory> list(m.rows());
    for (Eigen::Index k = 0; k < m.rows(); ++k)
        list[k].deltas.assign(m.row(k).begin(), m.row(k).end());
    return list;
}

var::AdmmOptions admm_options(double tol, int max_iter) {
    var::AdmmOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "HEMS toolkit core: collaborative VAR-LASSO forecasting, quantile "
              "gradient boosting, flexibility surrogates and appliance scheduling";

    // ---- metrics -----------------------------------------------------------
    m.def("mae",
          [](const std::vector<double>& p, const std::vector<double>& o) { return mae(p, o); });
    m.def("rmse",
          [](const std::vector<double>& p, const std::vector<double>& o) { return rmse(p, o); });
    m.def("pinball", &pinball, py::arg("obs"), py::arg("pred"), py::arg("q"));
    m.def("improvement", &improvement, py::arg("eps_model"), py::arg("eps_base"));
    m.def(
        "crps_from_quantiles",
        [](const std::vector<double>& levels, const Eigen::MatrixXd& values,
           const std::vector<double>& obs) {
            QuantileForecast fc;
            fc.quantile_levels = levels;
            for (Eigen::Index h = 0; h < values.rows(); ++h) {
                fc.horizons.push_back(static_cast<int>(h) + 1);
                fc.values.push_back({values.row(h).begin(), values.row(h).end()});
                fc.point.push_back(values(h, values.cols() / 2));
            }
            return crps_from_quantiles(fc, obs);
        },
        py::arg("levels"), py::arg("values"), py::arg("obs"),
        "Pinball-average CRPS of a [horizon x quantile] forecast");

    // ---- VAR-LASSO / ADMM --------------------------------------------------
    m.def("soft_threshold", py::overload_cast<double, double>(&var::soft_threshold), py::arg("x"),
          py::arg("a"));

    py::class_<var::VarModel>(m, "VarModel")
        .def_readonly("B", &var::VarModel::B)
        .def_readonly("lambda_", &var::VarModel::lambda)
        .def_readonly("rho", &var::VarModel::rho)
        .def_readonly("iterations", &var::VarModel::iterations)
        .def_readonly("converged", &var::VarModel::converged)
        .def_readonly("primal_residual", &var::VarModel::primal_residual)
        .def_readonly("dual_residual", &var::VarModel::dual_residual);

    m.def(
        "fit_var_centralized",
        [](const Eigen::MatrixXd& panel, int p, double lam, double rho, double tol,
           int max_iter) {
            const auto design = var::build_var_design(panel_from_matrix(panel), p);
            return var::fit_centralized(design, lam, rho, admm_options(tol, max_iter));
        },
        py::arg("panel"), py::arg("p"), py::arg("lam"), py::arg("rho") = 1.0,
        py::arg("tol") = 1e-8, py::arg("max_iter") = 5000,
        "Centralized ADMM VAR-LASSO on an [n x length] panel");
    m.def(
        "fit_var_consensus",
        [](const Eigen::MatrixXd& panel, int p, int workers, double lam, double rho, double tol,
           int max_iter) {
            const auto design = var::build_var_design(panel_from_matrix(panel), p);
            var::RoundLog log;
            const auto model = var::fit_consensus_predictors(design, workers, lam, rho,
                                                             admm_options(tol, max_iter), &log);
            const Eigen::MatrixXd estimate =
                var::curious_node_reconstruct(log, log.rounds.size() - 1);
            const double leak = (estimate - design.Y).cwiseAbs().maxCoeff();
            return py::make_tuple(model, leak);
        },
        py::arg("panel"), py::arg("p"), py::arg("workers"), py::arg("lam"), py::arg("rho") = 1.0,
        py::arg("tol") = 1e-8, py::arg("max_iter") = 5000,
        "Split across predictors; returns (model, curious-node reconstruction error)");
    m.def(
        "fit_var_sharing",
        [](const Eigen::MatrixXd& panel, int p, int workers, double lam, double rho, double tol,
           int max_iter) {
            const auto design = var::build_var_design(panel_from_matrix(panel), p);
            const auto model =
                var::fit_sharing_examples(design, workers, lam, rho, admm_options(tol, max_iter));
            const auto audit = var::audit_sharing_examples(design, workers);
            return py::make_tuple(model, audit.raw_data_crossed);
        },
        py::arg("panel"), py::arg("p"), py::arg("workers"), py::arg("lam"), py::arg("rho") = 1.0,
        py::arg("tol") = 1e-8, py::arg("max_iter") = 5000,
        "Split across examples; returns (model, raw-lag exposure flag)");
    m.def(
        "lambda_max",
        [](const Eigen::MatrixXd& panel, int p) {
            return var::lambda_max(var::build_var_design(panel_from_matrix(panel), p));
        },
        py::arg("panel"), py::arg("p"));
    m.def(
        "forecast_var",
        [](const var::VarModel& model, const Eigen::MatrixXd& recent, int steps) {
            return panel_to_matrix(forecast_var(model, panel_from_matrix(recent), steps));
        },
        py::arg("model"), py::arg("recent"), py::arg("steps"),
        "Iterated forecasts from the last p panel columns");

    // ---- gradient boosting -------------------------------------------------
    py::class_<gbt::QuantileGbtModel>(m, "QuantileGbtModel")
        .def_readonly("quantile_levels", &gbt::QuantileGbtModel::quantile_levels)
        .def_readonly("capacity_kw", &gbt::QuantileGbtModel::capacity_kw);
    m.def(
        "fit_quantile_gbt",
        [](const Eigen::MatrixXd& x, const std::vector<double>& y,
           const std::vector<double>& levels, int n_trees, int max_depth, double learning_rate,
           int min_samples_leaf, double capacity) {
            gbt::GbtParams params;
            params.n_trees = n_trees;
            params.tree.max_depth = max_depth;
            params.learning_rate = learning_rate;
            params.tree.min_samples_leaf = min_samples_leaf;
            return gbt::fit_quantile_gbt(design_from_matrix(x), y, levels, params, capacity);
        },
        py::arg("x"), py::arg("y"), py::arg("levels"), py::arg("n_trees") = 200,
        py::arg("max_depth") = 4, py::arg("learning_rate") = 0.1,
        py::arg("min_samples_leaf") = 5, py::arg("capacity") = 1e18,
        "One pinball ensemble per quantile plus a squared-loss point ensemble");
    m.def(
        "predict_quantiles",
        [](const gbt::QuantileGbtModel& model, const Eigen::MatrixXd& x) {
            const auto fc = gbt::predict_quantiles(model, design_from_matrix(x), 0);
            Eigen::MatrixXd values(fc.horizon_count(), fc.level_count());
            Eigen::VectorXd point(fc.horizon_count());
            for (std::size_t h = 0; h < fc.horizon_count(); ++h) {
                point(h) = fc.point[h];
                for (std::size_t q = 0; q < fc.level_count(); ++q) values(h, q) = fc.values[h][q];
            }
            return py::make_tuple(values, point);
        },
        py::arg("model"), py::arg("x"),
        "Returns (quantiles [rows x levels] after crossing repair, point forecast)");
    m.def("default_quantile_grid", &gbt::default_quantile_grid);

    // ---- flexibility -------------------------------------------------------
    py::class_<flex::EwhConfig>(m, "EwhConfig")
        .def(py::init<>())
        .def_readwrite("volume_l", &flex::EwhConfig::volume_l)
        .def_readwrite("power_kw", &flex::EwhConfig::power_kw)
        .def_readwrite("efficiency", &flex::EwhConfig::efficiency)
        .def_readwrite("loss_w_per_k", &flex::EwhConfig::loss_w_per_k)
        .def_readwrite("temp_min_c", &flex::EwhConfig::temp_min_c)
        .def_readwrite("temp_max_c", &flex::EwhConfig::temp_max_c)
        .def_readwrite("ambient_c", &flex::EwhConfig::ambient_c)
        .def_readwrite("inlet_c", &flex::EwhConfig::inlet_c)
        .def_readwrite("initial_c", &flex::EwhConfig::initial_c)
        .def_readwrite("draw_l_per_h", &flex::EwhConfig::draw_l_per_h);
    py::class_<flex::BatteryConfig>(m, "BatteryConfig")
        .def(py::init<>())
        .def_readwrite("charge_kw", &flex::BatteryConfig::charge_kw)
        .def_readwrite("discharge_kw", &flex::BatteryConfig::discharge_kw)
        .def_readwrite("eff_charge", &flex::BatteryConfig::eff_charge)
        .def_readwrite("eff_discharge", &flex::BatteryConfig::eff_discharge)
        .def_readwrite("soc_min_kwh", &flex::BatteryConfig::soc_min_kwh)
        .def_readwrite("soc_max_kwh", &flex::BatteryConfig::soc_max_kwh)
        .def_readwrite("soc_initial_kwh", &flex::BatteryConfig::soc_initial_kwh)
        .def_readwrite("charge_from_surplus_only",
                       &flex::BatteryConfig::charge_from_surplus_only);
    py::class_<flex::ShiftableConfig>(m, "ShiftableConfig")
        .def(py::init<>())
        .def_readwrite("name", &flex::ShiftableConfig::name)
        .def_readwrite("power_kw", &flex::ShiftableConfig::power_kw)
        .def_readwrite("duration_steps", &flex::ShiftableConfig::duration_steps)
        .def_readwrite("window_begin", &flex::ShiftableConfig::window_begin)
        .def_readwrite("window_end", &flex::ShiftableConfig::window_end)
        .def_readwrite("baseline_start", &flex::ShiftableConfig::baseline_start);
    py::class_<flex::DeviceFleet>(m, "DeviceFleet")
        .def(py::init<>())
        .def_readwrite("ewh", &flex::DeviceFleet::ewh)
        .def_readwrite("battery", &flex::DeviceFleet::battery)
        .def_readwrite("shiftables", &flex::DeviceFleet::shiftables)
        .def_readwrite("pv_capacity_kw", &flex::DeviceFleet::pv_capacity_kw);

    py::class_<flex::FlexProblem>(m, "FlexProblem")
        .def(py::init<>())
        .def_readwrite("fleet", &flex::FlexProblem::fleet)
        .def_readwrite("baseline_net_kw", &flex::FlexProblem::baseline_net_kw)
        .def_readwrite("pv_scenarios_kw", &flex::FlexProblem::pv_scenarios_kw)
        .def_readwrite("alpha", &flex::FlexProblem::alpha)
        .def_readwrite("dt_hours", &flex::FlexProblem::dt_hours);

    m.def(
        "make_flex_problem",
        [](std::uint64_t seed, int horizon, int scenarios, double alpha, double pv_sigma) {
            synth::FlexScenarioConfig config;
            config.seed = seed;
            config.horizon = horizon;
            config.scenario_count = scenarios;
            config.alpha = alpha;
            config.pv_sigma = pv_sigma;
            return synth::make_flex_problem(config);
        },
        py::arg("seed") = 1, py::arg("horizon") = 8, py::arg("scenarios") = 10,
        py::arg("alpha") = 0.9, py::arg("pv_sigma") = 0.35,
        "Seeded synthetic behind-the-meter flexibility problem");
    m.def(
        "check_feasible",
        [](const flex::FlexProblem& problem, const std::vector<double>& deltas) {
            const auto result = flex::check_feasible(flex::FlexTrajectory{deltas}, problem);
            return py::make_tuple(result.feasible, result.fraction);
        },
        py::arg("problem"), py::arg("deltas"),
        "Chance-constrained feasibility: (feasible, violation-free scenario share)");
    m.def(
        "epso_sample",
        [](const flex::FlexProblem& problem, int k, int swarm, int generations, double tau,
           std::uint64_t seed, double explore_share, double sample_depth) {
            flex::EpsoOptions opts;
            opts.swarm_size = swarm;
            opts.generations = generations;
            opts.tau = tau;
            opts.seed = seed;
            opts.explore_share = explore_share;
            opts.sample_depth = sample_depth;
            return trajectories_to_matrix(flex::epso_sample(problem, k, opts).trajectories);
        },
        py::arg("problem"), py::arg("k") = 20, py::arg("swarm") = 30,
        py::arg("generations") = 200, py::arg("tau") = 0.2, py::arg("seed") = 1,
        py::arg("explore_share") = 1.0, py::arg("sample_depth") = 1.0,
        "Feasible flexibility trajectories as a [k x horizon] array");

    py::class_<flex::SvddModel>(m, "SvddModel")
        .def_readonly("betas", &flex::SvddModel::betas)
        .def_readonly("support_vectors", &flex::SvddModel::support_vectors)
        .def_readonly("gamma", &flex::SvddModel::gamma)
        .def_readonly("coef0", &flex::SvddModel::coef0)
        .def_readonly("radius2_threshold", &flex::SvddModel::radius2_threshold);
    m.def(
        "svdd_fit",
        [](const Eigen::MatrixXd& trajectories, double nu, double gamma, double coef0) {
            flex::SvddOptions opts;
            opts.nu = nu;
            opts.gamma = gamma;
            opts.coef0 = coef0;
            return flex::svdd_fit(trajectories_from_matrix(trajectories), opts);
        },
        py::arg("trajectories"), py::arg("nu") = 0.05, py::arg("gamma") = 0.0,
        py::arg("coef0") = 0.0, "One-class data description of a [k x horizon] trajectory set");
    m.def(
        "svdd_radius2",
        [](const flex::SvddModel& model, const std::vector<double>& x) {
            return flex::svdd_radius2(model, x);
        },
        py::arg("model"), py::arg("x"));
    m.def(
        "svdd_is_feasible",
        [](const flex::SvddModel& model, const std::vector<double>& x) {
            return flex::svdd_is_feasible(model, x);
        },
        py::arg("model"), py::arg("x"));

    py::class_<flex::VirtualBattery>(m, "VirtualBattery")
        .def_readonly("p_max_kw", &flex::VirtualBattery::p_max_kw)
        .def_readonly("p_min_kw", &flex::VirtualBattery::p_min_kw)
        .def_readonly("soc_max_kwh", &flex::VirtualBattery::soc_max_kwh)
        .def_readonly("soc_min_kwh", &flex::VirtualBattery::soc_min_kwh)
        .def_readonly("soc_initial_kwh", &flex::VirtualBattery::soc_initial_kwh)
        .def_readonly("dt_hours", &flex::VirtualBattery::dt_hours);
    m.def(
        "vbattery_fit",
        [](const Eigen::MatrixXd& trajectories, double soc_initial, double dt_hours) {
            return flex::vbattery_fit(trajectories_from_matrix(trajectories), soc_initial,
                                      dt_hours);
        },
        py::arg("trajectories"), py::arg("soc_initial_kwh") = 0.0, py::arg("dt_hours") = 1.0,
        "Tightest dynamic power/SOC box around a trajectory set");
    m.def(
        "vbattery_is_feasible",
        [](const flex::VirtualBattery& vb, const std::vector<double>& x) {
            return flex::vbattery_is_feasible(vb, x);
        },
        py::arg("vb"), py::arg("x"));

    // ---- scheduling --------------------------------------------------------
    py::class_<hems::Tariff>(m, "Tariff")
        .def(py::init<>())
        .def_readwrite("prices", &hems::Tariff::prices)
        .def_readwrite("feed_in", &hems::Tariff::feed_in);
    py::class_<hems::Schedule>(m, "Schedule")
        .def_readonly("feasible", &hems::Schedule::feasible)
        .def_readonly("binding_constraint", &hems::Schedule::binding_constraint)
        .def_readonly("starts", &hems::Schedule::starts)
        .def_readonly("ewh_control", &hems::Schedule::ewh_control)
        .def_readonly("cost", &hems::Schedule::cost)
        .def_readonly("imported_kwh", &hems::Schedule::imported_kwh)
        .def_readonly("exported_kwh", &hems::Schedule::exported_kwh)
        .def_readonly("net_kw", &hems::Schedule::net_kw);
    m.def(
        "optimize_schedule",
        [](const flex::DeviceFleet& fleet, const hems::Tariff& tariff,
           const std::vector<double>& pv, const std::vector<double>& base, double dt_hours) {
            return hems::optimize_schedule(fleet, tariff, pv, base, dt_hours);
        },
        py::arg("fleet"), py::arg("tariff"), py::arg("pv_forecast_kw"), py::arg("base_load_kw"),
        py::arg("dt_hours") = 1.0,
        "Day-ahead load allocation: exact shiftable enumeration plus greedy EWH heating");
    m.def(
        "schedule_cost",
        [](const std::vector<double>& net, const hems::Tariff& tariff, double dt_hours) {
            return hems::schedule_cost(net, tariff, dt_hours);
        },
        py::arg("net_kw"), py::arg("tariff"), py::arg("dt_hours") = 1.0);

    // ---- synthetic data ----------------------------------------------------
    m.def(
        "make_var_panel",
        [](std::uint64_t seed, int n, int p, int length) {
            synth::VarPanelConfig config;
            config.seed = seed;
            config.n = n;
            config.p = p;
            config.length = length;
            return panel_to_matrix(synth::make_var_panel(config));
        },
        py::arg("seed") = 1, py::arg("n") = 3, py::arg("p") = 2, py::arg("length") = 200,
        "Stationary sparse VAR(p) panel as an [n x length] array");
    m.def(
        "make_heteroscedastic",
        [](std::uint64_t seed, int n_samples) {
            const auto data = synth::make_heteroscedastic(seed, n_samples);
            Eigen::MatrixXd x(data.X.row_count(), data.X.column_count());
            for (std::size_t r = 0; r < data.X.row_count(); ++r)
                for (std::size_t c = 0; c < data.X.column_count(); ++c) x(r, c) = data.X.at(r, c);
            return py::make_tuple(x, data.y);
        },
        py::arg("seed") = 1, py::arg("n_samples") = 5000);
}
