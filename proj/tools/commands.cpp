#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <fstream>
#include <iostream>

#include "hemskit/admm.hpp"
#include "hemskit/epso.hpp"
#include "hemskit/gbt.hpp"
#include "hemskit/json_io.hpp"
#include "hemskit/metrics.hpp"
#include "hemskit/scheduler.hpp"
#include "hemskit/synth.hpp"

namespace hemskit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& config, const char* key, T fallback) {
    if (!config.contains(key) || config.at(key).is_null()) return fallback;
    return config.at(key).get<T>();
}

/// Collects staged files and moves them into the output directory only after
/// the command finished, so failures cannot leave partial outputs behind.
class StagedOutput {
   public:
    explicit StagedOutput(const fs::path& out_dir)
        : out_dir_(out_dir), staging_(out_dir / ".staging") {
        fs::create_directories(staging_);
    }
    ~StagedOutput() {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
    fs::path path(const std::string& name) {
        names_.push_back(name);
        return staging_ / name;
    }
    void commit() {
        for (const auto& name : names_) fs::rename(staging_ / name, out_dir_ / name);
        names_.clear();
    }

   private:
    fs::path out_dir_;
    fs::path staging_;
    std::vector<std::string> names_;
};

std::uint64_t seed_of(const json& config) { return get_or<std::uint64_t>(config, "seed", 1); }

features::FeatureOptions feature_options(const json& config) {
    features::FeatureOptions opts;
    if (!config.contains("features")) return opts;
    const auto& f = config.at("features");
    opts.lags = get_or<std::vector<int>>(f, "lags", opts.lags);
    opts.leads = get_or<std::vector<int>>(f, "leads", opts.leads);
    opts.var_windows = get_or<std::vector<int>>(f, "var_windows", opts.var_windows);
    opts.n_pc = get_or<int>(f, "n_pc", opts.n_pc);
    return opts;
}

gbt::GbtParams gbt_params(const json& config) {
    gbt::GbtParams params;
    if (!config.contains("gbt")) return params;
    const auto& g = config.at("gbt");
    params.n_trees = get_or<int>(g, "n_trees", params.n_trees);
    params.learning_rate = get_or<double>(g, "learning_rate", params.learning_rate);
    params.tree.max_depth = get_or<int>(g, "max_depth", params.tree.max_depth);
    params.tree.min_samples_leaf = get_or<int>(g, "min_samples_leaf", params.tree.min_samples_leaf);
    return params;
}

std::vector<double> quantile_grid(double step) {
    std::vector<double> grid;
    for (double q = step; q < 1.0 - step / 2; q += step) grid.push_back(q);
    return grid;
}

}  // namespace

int run_forecast(json config, const fs::path& out_dir) {
    const std::uint64_t seed = seed_of(config);

    features::NwpGrid grid;
    TimeSeries pv;
    if (config.contains("nwp_csv") && !config.at("nwp_csv").is_null()) {
        const fs::path nwp_path = config.at("nwp_csv").get<std::string>();
        if (!fs::exists(nwp_path)) throw io::CsvError("NWP file missing: " + nwp_path.string());
        grid = io::read_nwp_csv(nwp_path);
        const fs::path pv_path = config.at("pv_csv").get<std::string>();
        if (!fs::exists(pv_path)) throw io::CsvError("PV file missing: " + pv_path.string());
        const PanelSeries pv_panel = io::read_panel_csv(pv_path);
        pv = pv_panel.series.front();
    } else {
        synth::NwpConfig nwp_config;
        nwp_config.seed = seed;
        nwp_config.days = get_or<int>(config, "days", 30);
        if (config.contains("grid")) {
            const auto& g = config.at("grid");
            nwp_config.grid_nx = get_or<int>(g, "nx", nwp_config.grid_nx);
            nwp_config.grid_ny = get_or<int>(g, "ny", nwp_config.grid_ny);
            nwp_config.spacing_deg = get_or<double>(g, "spacing_deg", nwp_config.spacing_deg);
            nwp_config.lead_hours = get_or<int>(g, "lead_hours", nwp_config.lead_hours);
        }
        grid = synth::make_nwp_grid(nwp_config);
        synth::PvPlantConfig plant;
        plant.capacity_kw = get_or<double>(config, "capacity_kw", plant.capacity_kw);
        plant.noise_seed = seed + 17;
        pv = synth::make_pv_observations(grid, plant);
    }

    const double capacity = get_or<double>(config, "capacity_kw", 6.0);
    const auto opts = feature_options(config);
    const auto params = gbt_params(config);
    const auto levels = quantile_grid(get_or<double>(config, "quantile_step", 0.05));
    const double train_fraction = get_or<double>(config, "train_fraction", 0.7);
    const int horizon_hours = get_or<int>(config, "horizon_hours", 48);
    const auto model_names =
        get_or<std::vector<std::string>>(config, "models", {"base", "F"});

    // Time split: everything at or before the threshold trains the model (and
    // the PCA), the rest is the out-of-sample fold.
    const Timestamp obs_end = pv.time_at(pv.size() - 1);
    const Timestamp split_time =
        pv.start + static_cast<Timestamp>(train_fraction *
                                          static_cast<double>(obs_end - pv.start));

    StagedOutput staged(out_dir);
    json metrics_json;
    std::map<std::string, MetricReport> reports;
    const features::GridPoint target = grid.points[grid.central_point()];

    // Assemble every requested design first: metrics must compare the models
    // on one common row set, so lag/lead trimming in the richer designs also
    // bounds the rows used by the base model.
    std::map<std::string, features::FeatureMatrix> designs;
    std::set<Timestamp> common_rows;
    for (const auto& name : model_names) {
        const auto kind = features::model_kind_from_string(name);
        designs[name] = features::assemble_design(kind, grid, target, opts, split_time);
        std::set<Timestamp> rows(designs[name].rows.begin(), designs[name].rows.end());
        if (common_rows.empty()) {
            common_rows = std::move(rows);
        } else {
            std::set<Timestamp> kept;
            std::set_intersection(common_rows.begin(), common_rows.end(), rows.begin(),
                                  rows.end(), std::inserter(kept, kept.begin()));
            common_rows = std::move(kept);
        }
    }

    for (const auto& name : model_names) {
        auto [X, y] = features::align_to_target(designs[name], pv);

        features::FeatureMatrix x_train, x_test;
        std::vector<double> y_train, y_test;
        x_train.columns = x_test.columns = X.columns;
        for (std::size_t r = 0; r < X.row_count(); ++r) {
            if (!common_rows.count(X.rows[r])) continue;
            const bool is_train = X.rows[r] <= split_time;
            // Night samples train the model; the test fold keeps daylight only.
            if (!is_train && !(synth::clearsky_fraction(X.rows[r]) > 0.0)) continue;
            auto& xm = is_train ? x_train : x_test;
            auto& ym = is_train ? y_train : y_test;
            xm.rows.push_back(X.rows[r]);
            for (std::size_t c = 0; c < X.column_count(); ++c) xm.values.push_back(X.at(r, c));
            ym.push_back(y[r]);
        }
        if (x_train.row_count() < 20 || x_test.row_count() < 10)
            throw std::invalid_argument("forecast split leaves too few samples");

        const auto model = gbt::fit_quantile_gbt(x_train, y_train, levels, params, capacity);

        const auto fc_test = gbt::predict_quantiles(model, x_test, split_time);
        const MetricReport report = evaluate_forecast(fc_test, y_test);
        reports[name] = report;
        metrics_json["models"][name] = io::to_json(report);

        // Operational forecast: up to horizon_hours past the last observation.
        const auto& design = designs[name];
        features::FeatureMatrix x_ahead;
        x_ahead.columns = design.columns;
        for (std::size_t r = 0; r < design.row_count(); ++r) {
            if (design.rows[r] <= obs_end) continue;
            if (design.rows[r] > obs_end + static_cast<Timestamp>(horizon_hours) * 3600) continue;
            x_ahead.rows.push_back(design.rows[r]);
            for (std::size_t c = 0; c < design.column_count(); ++c)
                x_ahead.values.push_back(design.at(r, c));
        }
        const auto fc_ahead = gbt::predict_quantiles(model, x_ahead, obs_end);
        io::write_forecast_csv(staged.path("forecast_" + name + ".csv"), fc_ahead, nullptr);
    }

    if (reports.count("base")) {
        for (const auto& [name, report] : reports) {
            if (name == "base") continue;
            metrics_json["improvement_vs_base"][name] = {
                {"mae", improvement(report.mae, reports["base"].mae)},
                {"rmse", improvement(report.rmse, reports["base"].rmse)},
                {"crps", improvement(report.crps, reports["base"].crps)}};
        }
    }
    io::write_json_file(staged.path("metrics.json"), metrics_json);
    staged.commit();
    return kExitOk;
}

int run_collab(json config, const fs::path& out_dir) {
    const std::uint64_t seed = seed_of(config);

    PanelSeries panel;
    if (config.contains("panel_csv") && !config.at("panel_csv").is_null()) {
        panel = io::read_panel_csv(config.at("panel_csv").get<std::string>());
    } else {
        synth::VarPanelConfig panel_config;
        panel_config.seed = seed;
        if (config.contains("panel")) {
            const auto& p = config.at("panel");
            panel_config.n = get_or<int>(p, "n", panel_config.n);
            panel_config.p = get_or<int>(p, "p", panel_config.p);
            panel_config.length = get_or<int>(p, "length", panel_config.length);
        }
        panel = synth::make_var_panel(panel_config);
    }
    if (panel.node_count() < 2)
        throw std::invalid_argument("collaborative fit needs a panel with n >= 2");

    const int p = get_or<int>(config, "p", 2);
    const auto design = var::build_var_design(panel, p);
    const double lambda = config.contains("lambda") && !config.at("lambda").is_null()
                              ? config.at("lambda").get<double>()
                              : get_or<double>(config, "lambda_factor", 0.1) *
                                    var::lambda_max(design);
    const double rho = get_or<double>(config, "rho", 1.0);
    var::AdmmOptions opts;
    opts.tol = get_or<double>(config, "tol", 1e-8);
    opts.max_iter = get_or<int>(config, "max_iter", 5000);
    const int n_consensus = get_or<int>(config, "consensus_workers", design.n);
    const int n_sharing = get_or<int>(config, "sharing_workers",
                                      std::min<int>(4, static_cast<int>(design.Y.cols())));

    const auto central = var::fit_centralized(design, lambda, rho, opts);
    var::RoundLog log;
    const auto consensus = var::fit_consensus_predictors(design, n_consensus, lambda, rho, opts, &log);
    const auto sharing = var::fit_sharing_examples(design, n_sharing, lambda, rho, opts);
    if (!central.converged || !consensus.converged || !sharing.converged) {
        std::cerr << "ADMM did not converge within max_iter\n";
        return kExitNumerical;
    }

    StagedOutput staged(out_dir);

    json model_json;
    model_json["lambda"] = lambda;
    model_json["rho"] = rho;
    model_json["centralized"] = io::var_model_to_json(central);
    model_json["consensus_predictors"] = io::var_model_to_json(consensus);
    model_json["sharing_examples"] = io::var_model_to_json(sharing);
    const double scale = std::max(1.0, central.B.norm());
    model_json["equivalence"] = {
        {"consensus_rel_frobenius", (consensus.B - central.B).norm() / scale},
        {"sharing_rel_frobenius", (sharing.B - central.B).norm() / scale}};
    io::write_json_file(staged.path("model.json"), model_json);

    io::write_round_log(staged.path("rounds.jsonl"), log);

    io::CsvTable trace;
    trace.header = {"method", "iteration", "primal_residual", "dual_residual"};
    const auto add_trace = [&](const std::string& method, const var::VarModel& model) {
        for (std::size_t i = 0; i < model.primal_history.size(); ++i)
            trace.rows.push_back({method, std::to_string(i + 1),
                                  io::format_double(model.primal_history[i]),
                                  io::format_double(model.dual_history[i])});
    };
    add_trace("centralized", central);
    add_trace("consensus_predictors", consensus);
    add_trace("sharing_examples", sharing);
    io::write_csv(staged.path("convergence.csv"), trace);

    const Eigen::MatrixXd reconstructed =
        var::curious_node_reconstruct(log, log.rounds.size() - 1);
    const double recon_error = (reconstructed - design.Y).cwiseAbs().maxCoeff();
    const auto audit = var::audit_sharing_examples(design, n_sharing);
    json privacy;
    privacy["consensus_predictors"] = {
        {"reconstruction_max_abs_error", recon_error},
        {"verdict", recon_error <= 1e-8 ? "leaks" : "inconclusive"},
        {"note", "a node holding one broadcast round inverts the hub update"}};
    json exposures = json::array();
    for (const auto& [worker, series] : audit.exposures)
        exposures.push_back({{"worker", worker}, {"foreign_series", panel.ids[series]}});
    privacy["sharing_examples"] = {{"raw_data_crossed", audit.raw_data_crossed},
                                   {"exposures", exposures},
                                   {"verdict", audit.raw_data_crossed ? "leaks" : "clean"}};
    privacy["hub"] = {{"holds_responses", true},
                      {"note", "the neutral element needs Y for the consensus update"}};
    io::write_json_file(staged.path("privacy_report.json"), privacy);

    staged.commit();
    return kExitOk;
}

int run_flex(json config, const fs::path& out_dir) {
    const std::uint64_t seed = seed_of(config);

    synth::FlexScenarioConfig scenario;
    scenario.seed = seed;
    scenario.horizon = get_or<int>(config, "horizon", 8);
    scenario.scenario_count = get_or<int>(config, "scenarios", 10);
    scenario.alpha = get_or<double>(config, "alpha", 0.9);
    scenario.pv_sigma = get_or<double>(config, "pv_sigma", 0.35);
    flex::FlexProblem problem = synth::make_flex_problem(scenario);
    if (config.contains("fleet")) problem.fleet = io::fleet_from_json(config.at("fleet"));
    if (config.contains("baseline_net_kw"))
        problem.baseline_net_kw = config.at("baseline_net_kw").get<std::vector<double>>();

    const int k = get_or<int>(config, "k", 20);
    const int k_test = config.contains("test")
                           ? get_or<int>(config.at("test"), "k_feasible", 10)
                           : 10;
    const double scale_unfeasible =
        config.contains("test") ? get_or<double>(config.at("test"), "scale_unfeasible", 1.5)
                                : 1.5;

    flex::EpsoOptions epso;
    epso.seed = seed;
    if (config.contains("epso")) {
        const auto& e = config.at("epso");
        epso.swarm_size = get_or<int>(e, "swarm", epso.swarm_size);
        epso.generations = get_or<int>(e, "generations", epso.generations);
        epso.tau = get_or<double>(e, "tau", epso.tau);
    }
    const auto training = flex::epso_sample(problem, k, epso);

    // Held-out membership queries: interior samples of the feasible domain,
    // drawn by the sampler's target-projection mode under a separate seed.
    flex::EpsoOptions test_opts = epso;
    test_opts.seed = seed + 9001;
    test_opts.explore_share = 0.0;
    test_opts.sample_depth = config.contains("test")
                                 ? get_or<double>(config.at("test"), "depth", 0.25)
                                 : 0.25;
    const auto sampled_test = flex::epso_sample(problem, k_test, test_opts);
    const std::vector<flex::FlexTrajectory>& feasible_test = sampled_test.trajectories;

    std::vector<flex::FlexTrajectory> unfeasible_test;
    for (const auto& traj : feasible_test) {
        flex::FlexTrajectory scaled = traj;
        for (auto& v : scaled.deltas) v *= scale_unfeasible;
        if (!flex::check_feasible(scaled, problem).feasible) unfeasible_test.push_back(scaled);
    }

    flex::SvddOptions svdd_opts;
    if (config.contains("svdd")) {
        const auto& s = config.at("svdd");
        svdd_opts.nu = get_or<double>(s, "nu", svdd_opts.nu);
        svdd_opts.gamma = get_or<double>(s, "gamma", svdd_opts.gamma);
        svdd_opts.coef0 = get_or<double>(s, "coef0", svdd_opts.coef0);
    }
    const auto svdd = flex::svdd_fit(training.trajectories, svdd_opts);
    const double soc_initial = get_or<double>(config, "soc_initial_kwh", 0.0);
    const auto vb = flex::vbattery_fit(training.trajectories, soc_initial, problem.dt_hours);
    const auto table = flex::evaluate_surrogates(svdd, vb, feasible_test, unfeasible_test);

    StagedOutput staged(out_dir);

    io::CsvTable traj_csv;
    traj_csv.header = {"trajectory", "role", "period", "delta_kw"};
    const auto add_rows = [&](const std::vector<flex::FlexTrajectory>& list,
                              const std::string& role, int offset) {
        for (std::size_t i = 0; i < list.size(); ++i)
            for (std::size_t t = 0; t < list[i].deltas.size(); ++t)
                traj_csv.rows.push_back({std::to_string(offset + static_cast<int>(i)), role,
                                         std::to_string(t),
                                         io::format_double(list[i].deltas[t])});
    };
    add_rows(training.trajectories, "train", 0);
    add_rows(feasible_test, "test_feasible", k);
    io::write_csv(staged.path("trajectories.csv"), traj_csv);

    const json svdd_json = io::svdd_to_json(svdd);
    const json vb_json = io::vbattery_to_json(vb);
    io::write_json_file(staged.path("svdd.json"), svdd_json);
    io::write_json_file(staged.path("vbattery.json"), vb_json);

    const bool svdd_leaks = io::text_embeds_values(svdd_json.dump(), problem.baseline_net_kw);
    const bool vb_leaks = io::text_embeds_values(vb_json.dump(), problem.baseline_net_kw);

    json report;
    const auto pct = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    report["accuracy"] = {{"svdd",
                           {{"feasible_pct", pct(table.svdd_feasible_pct)},
                            {"unfeasible_pct", pct(table.svdd_unfeasible_pct)}}},
                          {"virtual_battery",
                           {{"feasible_pct", pct(table.vb_feasible_pct)},
                            {"unfeasible_pct", pct(table.vb_unfeasible_pct)}}}};
    report["test_sets"] = {{"feasible", feasible_test.size()},
                           {"unfeasible", unfeasible_test.size()}};
    report["privacy_scan"] = {
        {"svdd_embeds_baseline", svdd_leaks},
        {"vbattery_embeds_baseline", vb_leaks},
        {"verdict", (!svdd_leaks && !vb_leaks) ? "no baseline data embedded: pass" : "fail"}};
    report["duplicates_flagged"] = training.duplicates_flagged;
    io::write_json_file(staged.path("report.json"), report);

    staged.commit();
    return kExitOk;
}

int run_schedule(json config, const fs::path& out_dir) {
    hems::Tariff tariff;
    if (config.contains("tariff")) {
        const auto& t = config.at("tariff");
        tariff.prices = t.at("prices").get<std::vector<double>>();
        tariff.feed_in = get_or<double>(t, "feed_in", 0.0);
    } else {
        tariff.prices.assign(24, 0.2);
        for (int t = 0; t < 7; ++t) tariff.prices[t] = 0.1;
    }
    const double dt_hours = get_or<double>(config, "dt_hours", 1.0);
    std::vector<double> base_load =
        get_or<std::vector<double>>(config, "base_load_kw", {});
    if (base_load.empty()) base_load.assign(tariff.prices.size(), 0.3);
    std::vector<double> pv =
        get_or<std::vector<double>>(config, "pv_forecast_kw", {});
    if (pv.empty()) pv.assign(tariff.prices.size(), 0.0);

    flex::DeviceFleet fleet;
    if (config.contains("fleet")) {
        fleet = io::fleet_from_json(config.at("fleet"));
    } else {
        flex::ShiftableConfig load;
        load.name = "washer";
        load.power_kw = 1.0;
        load.duration_steps = 2;
        load.window_begin = 0;
        load.window_end = static_cast<int>(tariff.prices.size()) - load.duration_steps;
        load.baseline_start = std::min(12, load.window_end);
        fleet.shiftables.push_back(load);
    }
    fleet.battery.reset();  // day-ahead scheduling covers loads, not arbitrage

    const auto optimized = hems::optimize_schedule(fleet, tariff, pv, base_load, dt_hours);
    const auto baseline = hems::baseline_schedule(fleet, tariff, pv, base_load, dt_hours);

    StagedOutput staged(out_dir);
    json schedule_json = io::schedule_to_json(optimized);
    schedule_json["baseline_cost"] = baseline.cost;
    io::write_json_file(staged.path("schedule.json"), schedule_json);

    io::CsvTable comparison;
    comparison.header = {"case", "cost", "savings_pct"};
    const double savings = baseline.cost > 0.0
                               ? (1.0 - optimized.cost / baseline.cost) * 100.0
                               : 0.0;
    comparison.rows.push_back({"baseline", io::format_double(baseline.cost), "0"});
    comparison.rows.push_back(
        {"optimized", io::format_double(optimized.cost), io::format_double(savings)});
    io::write_csv(staged.path("cost_comparison.csv"), comparison);
    staged.commit();
    return optimized.feasible ? kExitOk : kExitNumerical;
}

int run_evaluate(json config, const fs::path& out_dir) {
    const fs::path forecast_path = config.at("forecast_csv").get<std::string>();
    std::vector<double> observed;
    const auto fc = io::read_forecast_csv(forecast_path, &observed);
    const MetricReport report = evaluate_forecast(fc, observed);

    json metrics;
    metrics["forecast"] = io::to_json(report);
    if (config.contains("baseline_csv") && !config.at("baseline_csv").is_null()) {
        std::vector<double> base_observed;
        const auto base_fc =
            io::read_forecast_csv(config.at("baseline_csv").get<std::string>(), &base_observed);
        const MetricReport base_report = evaluate_forecast(base_fc, base_observed);
        metrics["baseline"] = io::to_json(base_report);
        metrics["improvement"] = {{"mae", improvement(report.mae, base_report.mae)},
                                  {"rmse", improvement(report.rmse, base_report.rmse)},
                                  {"crps", improvement(report.crps, base_report.crps)}};
    }
    StagedOutput staged(out_dir);
    io::write_json_file(staged.path("metrics.json"), metrics);
    staged.commit();
    return kExitOk;
}

}  // namespace hemskit::cli
