#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <Eigen/Dense>

#include "hemskit/epso.hpp"
#include "hemskit/json_io.hpp"
#include "hemskit/synth.hpp"
#include "hemskit/virtual_battery.hpp"
#include "oracles.hpp"

using namespace hemskit;
using namespace hemskit::flex;

TEST_CASE("EWH equilibrium: no heat, no draw, ambient start") {
    EwhConfig ewh;
    ewh.initial_c = ewh.ambient_c;
    ewh.temp_min_c = 5.0;  // wide band, equilibrium sits below the comfort range
    const std::vector<double> off(6, 0.0);
    const auto sim = simulate_ewh(ewh, off, 1.0);
    for (double temp : sim.trace) CHECK(temp == doctest::Approx(ewh.ambient_c));
}

TEST_CASE("EWH energy balance without losses") {
    EwhConfig ewh;
    ewh.volume_l = 100.0;
    ewh.power_kw = 2.0;
    ewh.efficiency = 1.0;
    ewh.loss_w_per_k = 0.0;
    ewh.initial_c = 20.0;
    ewh.temp_max_c = 80.0;
    const std::vector<double> on(1, 1.0);
    const auto sim = simulate_ewh(ewh, on, 1.0);
    // 2 kWh = 7200 kJ into 418.6 kJ/K of water
    CHECK(sim.trace[1] - sim.trace[0] == doctest::Approx(7200.0 / 418.6).epsilon(1e-9));
}

TEST_CASE("EWH cools strictly when off above ambient") {
    EwhConfig ewh;
    ewh.initial_c = 60.0;
    ewh.loss_w_per_k = 3.0;
    const std::vector<double> off(8, 0.0);
    const auto sim = simulate_ewh(ewh, off, 1.0);
    for (std::size_t t = 1; t < sim.trace.size(); ++t) CHECK(sim.trace[t] < sim.trace[t - 1]);
}

TEST_CASE("battery SOC bookkeeping") {
    BatteryConfig battery;
    battery.eff_charge = 1.0;
    battery.eff_discharge = 1.0;
    battery.soc_initial_kwh = 1.0;
    battery.soc_max_kwh = 10.0;
    battery.soc_min_kwh = 0.0;
    battery.charge_kw = 5.0;
    battery.discharge_kw = 5.0;

    SUBCASE("zero schedule keeps SOC constant") {
        const std::vector<double> idle(5, 0.0);
        const auto sim = simulate_battery(battery, idle, 1.0);
        for (double soc : sim.trace) CHECK(soc == doctest::Approx(1.0));
    }
    SUBCASE("+1 kW for 2 h adds 2 kWh") {
        const std::vector<double> charge(2, 1.0);
        const auto sim = simulate_battery(battery, charge, 1.0);
        CHECK(sim.trace.back() == doctest::Approx(3.0));
    }
    SUBCASE("round trip at 0.9/0.9 loses 19% of the cycled energy") {
        battery.eff_charge = 0.9;
        battery.eff_discharge = 0.9;
        // Charge 1 kWh from the grid, then pull the stored 0.9 kWh back out:
        // the grid sees 0.81 kWh, a 0.19 kWh loss per cycled kWh.
        const std::vector<double> cycle{1.0, -0.81};
        const auto sim = simulate_battery(battery, cycle, 1.0);
        CHECK(sim.trace[1] == doctest::Approx(1.9));
        CHECK(sim.trace[2] == doctest::Approx(1.0));  // net SOC restored
    }
}

namespace {

FlexProblem small_problem(std::uint64_t seed = 3) {
    synth::FlexScenarioConfig config;
    config.seed = seed;
    config.horizon = 8;
    config.scenario_count = 10;
    return synth::make_flex_problem(config);
}

}  // namespace

TEST_CASE("the zero trajectory is feasible in every scenario") {
    const auto problem = small_problem();
    const FlexTrajectory zero{std::vector<double>(problem.horizon(), 0.0)};
    const auto result = check_feasible(zero, problem);
    CHECK(result.feasible);
    CHECK(result.fraction == doctest::Approx(1.0));
}

TEST_CASE("alpha counting: exactly one violating scenario out of ten") {
    auto problem = small_problem();
    problem.alpha = 0.9;
    // Find a trajectory violating a single scenario by probing the battery's
    // surplus-charging limit around the midday window.
    FlexTrajectory probe{std::vector<double>(problem.horizon(), 0.0)};
    bool found = false;
    for (double level = 0.2; level < 4.0 && !found; level += 0.05) {
        probe.deltas[3] = level;
        const auto result = check_feasible(probe, problem);
        if (result.violating_scenarios.size() == 1) {
            CHECK(result.fraction == doctest::Approx(0.9));
            CHECK(result.feasible);  // 0.9 >= alpha
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("delta beyond the fleet swing is unfeasible everywhere") {
    const auto problem = small_problem();
    FlexTrajectory big{std::vector<double>(problem.horizon(), 0.0)};
    big.deltas[2] = problem.fleet.max_power_swing() + 5.0;
    const auto result = check_feasible(big, problem);
    CHECK(!result.feasible);
    CHECK(result.fraction == doctest::Approx(0.0));
}

TEST_CASE("check_feasible rejects a horizon mismatch") {
    const auto problem = small_problem();
    const FlexTrajectory bad{std::vector<double>(3, 0.0)};
    CHECK_THROWS_AS(check_feasible(bad, problem), std::invalid_argument);
}

TEST_CASE("EPSO returns K feasible trajectories, replayed") {
    const auto problem = small_problem(11);
    EpsoOptions opts;
    opts.swarm_size = 16;
    opts.generations = 30;
    opts.seed = 11;
    const auto set = epso_sample(problem, 6, opts);
    REQUIRE(set.trajectories.size() == 6);
    for (const auto& traj : set.trajectories) CHECK(check_feasible(traj, problem).feasible);
}

TEST_CASE("EPSO is deterministic per seed") {
    const auto problem = small_problem(13);
    EpsoOptions opts;
    opts.swarm_size = 12;
    opts.generations = 15;
    opts.seed = 99;
    const auto a = epso_sample(problem, 3, opts);
    const auto b = epso_sample(problem, 3, opts);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t k = 0; k < a.trajectories.size(); ++k)
        CHECK(a.trajectories[k].deltas == b.trajectories[k].deltas);
}

TEST_CASE("a zero-rated fleet collapses to duplicate zero trajectories") {
    FlexProblem problem;
    problem.baseline_net_kw.assign(4, 1.0);
    problem.pv_scenarios_kw.assign(3, std::vector<double>(4, 0.0));
    problem.alpha = 0.9;
    // no devices at all
    EpsoOptions opts;
    opts.swarm_size = 8;
    opts.generations = 5;
    const auto set = epso_sample(problem, 3, opts);
    CHECK(set.duplicates_flagged);
    for (const auto& traj : set.trajectories)
        for (double v : traj.deltas) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("an unholdable comfort band makes sampling fail explicitly") {
    FlexProblem problem;
    problem.baseline_net_kw.assign(4, 1.0);
    problem.pv_scenarios_kw.assign(3, std::vector<double>(4, 0.0));
    flex::EwhConfig ewh;
    ewh.volume_l = 200.0;
    ewh.power_kw = 0.05;        // cannot hold the band against the losses
    ewh.loss_w_per_k = 500.0;
    ewh.temp_min_c = 55.0;
    ewh.temp_max_c = 60.0;
    ewh.initial_c = 56.0;
    problem.fleet.ewh = ewh;
    EpsoOptions opts;
    opts.swarm_size = 6;
    opts.generations = 4;
    CHECK_THROWS_AS(epso_sample(problem, 2, opts), FlexSamplingError);
}

TEST_CASE("EPSO spread beats seeded rejection sampling") {
    const auto problem = small_problem(21);
    EpsoOptions opts;
    opts.swarm_size = 20;
    opts.generations = 40;
    opts.seed = 21;
    const auto set = epso_sample(problem, 20, opts);

    // Rejection-sampling baseline: uniform draws in the fleet power box.
    std::mt19937_64 rng(21);
    const double swing = problem.fleet.max_power_swing();
    std::uniform_real_distribution<double> unit(-swing, swing);
    std::vector<FlexTrajectory> rejected;
    for (int attempt = 0; attempt < 20000 && rejected.size() < 20; ++attempt) {
        FlexTrajectory candidate{std::vector<double>(problem.horizon(), 0.0)};
        for (auto& v : candidate.deltas) v = unit(rng);
        if (check_feasible(candidate, problem).feasible) rejected.push_back(candidate);
    }
    REQUIRE(rejected.size() >= 2);
    CHECK(mean_pairwise_distance(set.trajectories) > mean_pairwise_distance(rejected));
}

TEST_CASE("SVDD: projection onto the capped simplex") {
    const auto p = project_capped_simplex({0.9, 0.5, -0.2}, 0.6);
    double total = 0.0;
    for (double v : p) {
        CHECK(v >= -1e-12);
        CHECK(v <= 0.6 + 1e-12);
        total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

namespace {

std::vector<FlexTrajectory> blob(std::uint64_t seed, int count, int dim, double spread) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, spread);
    std::vector<FlexTrajectory> out(count);
    for (auto& traj : out) {
        traj.deltas.resize(dim);
        for (auto& v : traj.deltas) v = gauss(rng);
    }
    return out;
}

}  // namespace

TEST_CASE("SVDD keeps nearly all training points inside for small nu") {
    const auto points = blob(31, 50, 2, 1.0);
    SvddOptions opts;
    opts.nu = 0.02;
    const auto model = svdd_fit(points, opts);
    int inside = 0;
    for (const auto& p : points)
        if (svdd_is_feasible(model, p.deltas)) ++inside;
    CHECK(inside >= 49);  // >= (1-nu) of 50
}

TEST_CASE("duplicated single point becomes the only support vector") {
    std::vector<FlexTrajectory> points(6, FlexTrajectory{{1.0, -2.0, 0.5}});
    SvddOptions opts;
    opts.nu = 0.5;
    const auto model = svdd_fit(points, opts);
    REQUIRE(model.support_vectors.size() == 1);
    CHECK(model.betas[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(svdd_is_feasible(model, points[0].deltas));
}

TEST_CASE("projected gradient matches a tiny-step oracle objective") {
    const auto points = blob(37, 50, 2, 1.0);
    SvddOptions opts;
    opts.nu = 0.1;
    const auto model = svdd_fit(points, opts);

    // Oracle: same dual, much smaller steps, many more iterations.
    const int count = static_cast<int>(points.size());
    const double cap = 1.0 / (opts.nu * count);
    Eigen::MatrixXd kmat(count, count);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < count; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < points[i].deltas.size(); ++d)
                dot += points[i].deltas[d] * points[j].deltas[d];
            kmat(i, j) = std::tanh(dot / static_cast<double>(points[i].deltas.size()));
        }
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(count, 1.0 / count);
    const double bound = kmat.cwiseAbs().rowwise().sum().maxCoeff();
    const double step = 1.0 / (100.0 * bound);
    for (int it = 0; it < 200000; ++it) {
        const Eigen::VectorXd gradient = 2.0 * (kmat * beta);
        std::vector<double> moved(count);
        for (int i = 0; i < count; ++i) moved[i] = beta[i] - step * gradient[i];
        const auto projected = project_capped_simplex(std::move(moved), cap);
        for (int i = 0; i < count; ++i) beta[i] = projected[i];
    }
    const double oracle_obj = beta.transpose() * kmat * beta;

    // The fitted cross term is exactly beta^T K beta over the kept support
    // vectors, so objectives stay comparable after duplicate folding.
    CHECK(model.cross_term == doctest::Approx(oracle_obj).epsilon(1e-4));
}

TEST_CASE("radius matches the naive double-loop oracle") {
    const auto points = blob(41, 30, 4, 2.0);
    SvddOptions opts;
    opts.nu = 0.1;
    const auto model = svdd_fit(points, opts);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int probe = 0; probe < 20; ++probe) {
        std::vector<double> query(4);
        for (auto& v : query) v = gauss(rng);
        const double naive = oracles::naive_svdd_radius2(model.support_vectors, model.betas,
                                                         model.gamma, model.coef0, query);
        CHECK(svdd_radius2(model, query) == doctest::Approx(naive).epsilon(1e-10));
    }
}

TEST_CASE("single support vector algebra") {
    SvddModel model;
    model.support_vectors = {{1.0, 2.0}};
    model.betas = {1.0};
    model.gamma = 0.5;
    model.coef0 = 0.0;
    model.cross_term = model.kernel(model.support_vectors[0], model.support_vectors[0]);
    const double self_k = model.cross_term;
    CHECK(svdd_radius2(model, model.support_vectors[0]) == doctest::Approx(1.0 - self_k));
}

TEST_CASE("classification flips exactly at the sphere radius") {
    SvddModel model;
    model.support_vectors = {{1.0, 0.0}};
    model.betas = {1.0};
    model.gamma = 1.0;
    model.coef0 = 0.0;
    model.cross_term = model.kernel(model.support_vectors[0], model.support_vectors[0]);
    const std::vector<double> query{0.5, 0.5};
    model.radius2_threshold = svdd_radius2(model, query);
    CHECK(svdd_is_feasible(model, query));  // boundary inclusive
    model.radius2_threshold -= 1e-12;
    CHECK(!svdd_is_feasible(model, query));
}

TEST_CASE("virtual battery hand example") {
    const std::vector<FlexTrajectory> set = {{{1.0, -1.0}}, {{2.0, 0.0}}};
    const auto vb = vbattery_fit(set, 0.0, 1.0);
    CHECK(vb.p_max_kw == std::vector<double>{2.0, 0.0});
    CHECK(vb.p_min_kw == std::vector<double>{1.0, -1.0});
    CHECK(vb.soc_max_kwh == std::vector<double>{2.0, 2.0});
    CHECK(vb.soc_min_kwh == std::vector<double>{1.0, 0.0});
}

TEST_CASE("single all-zero trajectory pins every limit to zero") {
    const std::vector<FlexTrajectory> set = {{{0.0, 0.0, 0.0}}};
    const auto vb = vbattery_fit(set, 1.5, 1.0);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(vb.p_max_kw[t] == 0.0);
        CHECK(vb.p_min_kw[t] == 0.0);
        CHECK(vb.soc_max_kwh[t] == doctest::Approx(1.5));
        CHECK(vb.soc_min_kwh[t] == doctest::Approx(1.5));
    }
}

TEST_CASE("virtual battery classification") {
    const std::vector<FlexTrajectory> set = {{{1.0, -1.0}}, {{2.0, 0.0}}};
    const auto vb = vbattery_fit(set, 0.0, 1.0);
    SUBCASE("generators are feasible") {
        CHECK(vbattery_is_feasible(vb, set[0].deltas));
        CHECK(vbattery_is_feasible(vb, set[1].deltas));
    }
    SUBCASE("power-box violation") {
        CHECK(!vbattery_is_feasible(vb, std::vector<double>{2.5, 0.0}));
    }
    SUBCASE("inside the power box but above the SOC ceiling") {
        // [2, 2] stays within the per-period power limits but its running sum
        // reaches 4 kWh against a ceiling of 2 kWh.
        CHECK(!vbattery_is_feasible(vb, std::vector<double>{2.0, 2.0}));
    }
}

TEST_CASE("closed-form fit equals the LP oracle on random sets") {
    std::mt19937_64 rng(47);
    std::uniform_int_distribution<int> k_dist(1, 10);
    std::normal_distribution<double> gauss(0.0, 1.5);
    for (int round = 0; round < 20; ++round) {
        const int k = k_dist(rng);
        const int horizon = 8;
        std::vector<FlexTrajectory> set(k);
        for (auto& traj : set) {
            traj.deltas.resize(horizon);
            for (auto& v : traj.deltas) v = gauss(rng);
        }
        const double soc_ini = gauss(rng);
        const auto vb = vbattery_fit(set, soc_ini, 1.0);

        // LP: variables [p_max p_min soc_max soc_min], objective
        // sum soc_max - sum soc_min + sum p_max - sum p_min, constraints
        // sandwiching every trajectory and its running sum.
        const int n_vars = 4 * horizon;
        std::vector<double> c(n_vars, 0.0);
        for (int t = 0; t < horizon; ++t) {
            c[t] = 1.0;                  // p_max
            c[horizon + t] = -1.0;       // p_min
            c[2 * horizon + t] = 1.0;    // soc_max
            c[3 * horizon + t] = -1.0;   // soc_min
        }
        std::vector<std::vector<double>> a;
        std::vector<double> b;
        for (const auto& traj : set) {
            double running = soc_ini;
            for (int t = 0; t < horizon; ++t) {
                running += traj.deltas[t];
                std::vector<double> row(n_vars, 0.0);
                row[t] = 1.0;  // p_max_t >= traj
                a.push_back(row);
                b.push_back(traj.deltas[t]);
                row.assign(n_vars, 0.0);
                row[horizon + t] = -1.0;  // -p_min_t >= -traj
                a.push_back(row);
                b.push_back(-traj.deltas[t]);
                row.assign(n_vars, 0.0);
                row[2 * horizon + t] = 1.0;  // soc_max_t >= running
                a.push_back(row);
                b.push_back(running);
                row.assign(n_vars, 0.0);
                row[3 * horizon + t] = -1.0;  // -soc_min_t >= -running
                a.push_back(row);
                b.push_back(-running);
            }
        }
        const auto lp = oracles::solve_lp_geq(c, a, b);
        REQUIRE(lp.optimal);
        double closed_form = 0.0;
        for (int t = 0; t < horizon; ++t)
            closed_form += vb.p_max_kw[t] - vb.p_min_kw[t] + vb.soc_max_kwh[t] -
                           vb.soc_min_kwh[t];
        CHECK(closed_form == doctest::Approx(lp.objective).epsilon(1e-9));
    }
}

TEST_CASE("surrogate evaluation guards the empty class") {
    const std::vector<FlexTrajectory> set = {{{1.0, 0.0}}, {{0.0, 1.0}}};
    SvddOptions opts;
    const auto svdd = svdd_fit(set, opts);
    const auto vb = vbattery_fit(set, 0.0, 1.0);
    const auto table = evaluate_surrogates(svdd, vb, set, {});
    CHECK(table.vb_feasible_pct.has_value());
    CHECK(*table.vb_feasible_pct == doctest::Approx(100.0));
    CHECK(!table.svdd_unfeasible_pct.has_value());  // undefined, not 100
    CHECK(!table.vb_unfeasible_pct.has_value());
}

TEST_CASE("surrogate serializations embed no baseline consumption") {
    const auto problem = small_problem(51);
    EpsoOptions opts;
    opts.swarm_size = 14;
    opts.generations = 20;
    opts.seed = 51;
    const auto set = epso_sample(problem, 5, opts);
    const auto svdd = svdd_fit(set.trajectories, SvddOptions{});
    const auto vb = vbattery_fit(set.trajectories, 0.0, problem.dt_hours);

    const std::string svdd_text = io::svdd_to_json(svdd).dump();
    const std::string vb_text = io::vbattery_to_json(vb).dump();
    CHECK(!io::text_embeds_values(svdd_text, problem.baseline_net_kw));
    CHECK(!io::text_embeds_values(vb_text, problem.baseline_net_kw));

    // The scan itself must catch a deliberate plant.
    const std::string planted =
        svdd_text + io::json(problem.baseline_net_kw[0]).dump();
    CHECK(io::text_embeds_values(planted, problem.baseline_net_kw));
}

TEST_CASE("every EPSO member stays feasible after a re-check round trip") {
    const auto problem = small_problem(61);
    EpsoOptions opts;
    opts.swarm_size = 14;
    opts.generations = 25;
    opts.seed = 61;
    const auto set = epso_sample(problem, 4, opts);
    for (const auto& traj : set.trajectories) {
        const auto replay = check_feasible(traj, problem);
        CHECK(replay.feasible);
        CHECK(replay.fraction >= problem.alpha - 1e-12);
    }
}
