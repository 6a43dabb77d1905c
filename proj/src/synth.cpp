#include "hemskit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace hemskit::synth {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double clearsky_fraction(Timestamp t) {
    const int h = hour_of(t);
    if (h < 6 || h > 18) return 0.0;
    return std::sin(std::numbers::pi * (static_cast<double>(h) - 6.0) / 12.0);
}

features::NwpGrid make_nwp_grid(const NwpConfig& config) {
    features::NwpGrid grid;
    grid.variables = features::nwp_variable_names();
    for (int d = 0; d < config.days; ++d)
        grid.run_times.push_back(config.start + static_cast<Timestamp>(d) * 86400);
    for (int l = 0; l < config.lead_hours; ++l) grid.lead_hours.push_back(l);
    for (int ix = 0; ix < config.grid_nx; ++ix)
        for (int iy = 0; iy < config.grid_ny; ++iy)
            grid.points.push_back({config.lat0 + ix * config.spacing_deg,
                                   config.lon0 + iy * config.spacing_deg});

    const std::size_t n_pts = grid.points.size();
    grid.data.resize(grid.runs() * grid.leads() * n_pts * grid.variable_count());

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Slow synoptic drivers, one latent state per valid hour shared by all runs
    // issued close to it; per-run perturbations model forecast age. A cloud
    // front crosses the grid: its position decides which share of the points
    // sits under the deck.
    const int total_hours = config.days * 24 + config.lead_hours;
    std::vector<double> synoptic(total_hours);
    std::vector<double> gradient_dir(total_hours);
    std::vector<double> front_pos(total_hours);
    double state = 0.0, dir = 0.0, front = 0.0;
    for (int h = 0; h < total_hours; ++h) {
        state = 0.97 * state + 0.25 * gauss(rng);
        dir = 0.995 * dir + 0.1 * gauss(rng);
        front = 0.98 * front + 0.12 * gauss(rng);
        synoptic[h] = state;
        gradient_dir[h] = dir;
        front_pos[h] = 0.12 * std::tanh(front);
    }

    for (std::size_t r = 0; r < grid.runs(); ++r) {
        const double run_noise = 0.2 * gauss(rng);
        for (std::size_t l = 0; l < grid.leads(); ++l) {
            const Timestamp valid = grid.valid_time(r, l);
            const int hour_index =
                static_cast<int>((valid - config.start) / 3600);
            const double base_cloud = synoptic[std::clamp(hour_index, 0, total_hours - 1)];
            const double grad = gradient_dir[std::clamp(hour_index, 0, total_hours - 1)];
            const double cs = clearsky_fraction(valid);
            const double hour_angle =
                2.0 * std::numbers::pi * static_cast<double>(hour_of(valid)) / 24.0;

            const double density = logistic(base_cloud);
            const double front = front_pos[std::clamp(hour_index, 0, total_hours - 1)];
            for (std::size_t p = 0; p < n_pts; ++p) {
                const double dx = grid.points[p].lat - config.lat0 -
                                  0.5 * (config.grid_nx - 1) * config.spacing_deg;
                const double dy = grid.points[p].lon - config.lon0 -
                                  0.5 * (config.grid_ny - 1) * config.spacing_deg;
                // Low cloud deck behind a moving front: points on one side sit
                // under the bank, the rest stay clear. The covered share of the
                // grid is not recoverable from the central point alone.
                const double proj = dx * std::cos(grad) + dy * std::sin(grad);
                const double covered =
                    logistic(60.0 * (proj - front) + 0.5 * run_noise);
                const double texture = 0.06 * std::sin(40.0 * dx + 13.0 * hour_angle) *
                                       std::cos(40.0 * dy - 7.0 * hour_angle);
                const double cfl = std::clamp(0.05 + 0.9 * covered * density + texture, 0.0, 1.0);
                const double cfm =
                    std::clamp(0.08 + 0.35 * density * (1.0 - covered) + 0.5 * texture, 0.0, 1.0);
                const double cfh = logistic(0.3 * base_cloud + 0.4 * texture - 0.4);
                const double cft = std::clamp(std::max(cfl, cfm), 0.0, 1.0);
                const double swflx = std::max(0.0, 980.0 * cs * (1.0 - 0.72 * cft));
                const double temp = 284.0 + 9.0 * cs + 3.0 * std::sin(hour_angle) -
                                    2.0 * base_cloud + 0.5 * run_noise;

                const std::size_t idx = grid.index(r, l, p, 0);
                grid.data[idx + 0] = swflx;
                grid.data[idx + 1] = temp;
                grid.data[idx + 2] = cfl;
                grid.data[idx + 3] = cfm;
                grid.data[idx + 4] = cfh;
                grid.data[idx + 5] = cft;
            }
        }
    }
    grid.validate();
    return grid;
}

TimeSeries make_pv_observations(const features::NwpGrid& grid, const PvPlantConfig& config) {
    const auto slice = features::operational_slice(grid);
    const int v_swflx = grid.variable_index("swflx");

    std::mt19937_64 rng(config.noise_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TimeSeries pv;
    pv.start = slice.times.front();
    pv.step_seconds = 3600;
    pv.values.reserve(slice.times.size());

    for (std::size_t r = 0; r < slice.times.size(); ++r) {
        const double cs = clearsky_fraction(slice.times[r]);
        const std::size_t run = slice.run[r];
        const std::size_t lead = slice.lead[r];

        double mean_flux = 0.0;
        for (std::size_t p = 0; p < grid.point_count(); ++p)
            mean_flux += grid.at(run, lead, p, v_swflx);
        mean_flux /= static_cast<double>(grid.point_count());
        double ss = 0.0;
        for (std::size_t p = 0; p < grid.point_count(); ++p) {
            const double d = grid.at(run, lead, p, v_swflx) - mean_flux;
            ss += d * d;
        }
        const double sstd = std::sqrt(ss / static_cast<double>(grid.point_count() - 1));

        // The plant integrates irradiance over the cloud bank crossing the
        // whole grid, not just the central reading: the grid-mean flux drives
        // the yield and broken-cloud fields (high spatial deviation) cut into
        // it. A central-point-only model cannot see either.
        double fraction = 0.95 * mean_flux / 980.0;
        fraction -= 0.25 * cs * sstd / 400.0;
        fraction += config.noise_share * gauss(rng);
        if (cs <= 0.0) fraction = 0.0;
        pv.values.push_back(config.capacity_kw * std::clamp(fraction, 0.0, 1.0));
    }
    return pv;
}

PanelSeries make_var_panel(const VarPanelConfig& config) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n = config.n;
    const int p = config.p;
    std::vector<Eigen::MatrixXd> lag_coeffs(p, Eigen::MatrixXd::Zero(n, n));
    for (int lag = 0; lag < p; ++lag)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i == j || unit(rng) < config.density)
                    lag_coeffs[lag](i, j) = 0.5 * gauss(rng) / (lag + 1);

    // Scale the companion matrix to the requested spectral radius so the
    // process is stationary.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n * p, n * p);
    for (int lag = 0; lag < p; ++lag)
        companion.block(0, lag * n, n, n) = lag_coeffs[lag];
    if (p > 1)
        companion.block(n, 0, n * (p - 1), n * (p - 1)) =
            Eigen::MatrixXd::Identity(n * (p - 1), n * (p - 1));
    const double radius = companion.eigenvalues().cwiseAbs().maxCoeff();
    if (radius > 1e-12) {
        const double shrink = config.spectral_radius / std::max(radius, config.spectral_radius);
        double factor = shrink;
        for (int lag = 0; lag < p; ++lag) {
            lag_coeffs[lag] *= factor;
            factor *= shrink;
        }
    }

    const int burn_in = 100;
    std::vector<Eigen::VectorXd> history(p, Eigen::VectorXd::Zero(n));
    PanelSeries panel;
    panel.series.resize(n);
    for (int i = 0; i < n; ++i) {
        panel.ids.push_back("hems" + std::to_string(i + 1));
        panel.series[i].start = 1430438400;
        panel.series[i].step_seconds = 3600;
        panel.series[i].values.reserve(config.length);
    }
    for (int t = 0; t < burn_in + config.length; ++t) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
        for (int lag = 0; lag < p; ++lag) next += lag_coeffs[lag] * history[lag];
        for (int i = 0; i < n; ++i) next(i) += config.noise_sigma * gauss(rng);
        for (int lag = p - 1; lag >= 1; --lag) history[lag] = history[lag - 1];
        history[0] = next;
        if (t >= burn_in)
            for (int i = 0; i < n; ++i)
                panel.series[i].values.push_back(next(i) + 1.5 * (i + 1));
    }
    return panel;
}

TabularData make_heteroscedastic(std::uint64_t seed, int n_samples) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TabularData data;
    data.X.columns = {"x1", "x2"};
    data.X.rows.resize(n_samples);
    data.X.values.resize(static_cast<std::size_t>(n_samples) * 2);
    data.y.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double x1 = unit(rng);
        const double x2 = unit(rng);
        data.X.rows[i] = i;
        data.X.at(i, 0) = x1;
        data.X.at(i, 1) = x2;
        data.y[i] = std::sin(2.0 * std::numbers::pi * x1) + (0.2 + 0.8 * x2) * gauss(rng);
    }
    return data;
}

flex::FlexProblem make_flex_problem(const FlexScenarioConfig& config) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    flex::FlexProblem problem;
    problem.alpha = config.alpha;
    problem.dt_hours = 1.0;

    flex::EwhConfig ewh;
    ewh.volume_l = 80.0 + 40.0 * unit(rng);
    ewh.power_kw = 1.5 + unit(rng);
    ewh.loss_w_per_k = 2.0 + unit(rng);
    ewh.initial_c = 52.0 + 6.0 * unit(rng);
    ewh.draw_l_per_h.assign(config.horizon, 0.0);
    for (int t = 0; t < config.horizon; ++t)
        if (unit(rng) < 0.3) ewh.draw_l_per_h[t] = 6.0 * unit(rng);
    problem.fleet.ewh = ewh;

    flex::BatteryConfig battery;
    battery.charge_kw = 1.5 + unit(rng);
    battery.discharge_kw = 1.5 + unit(rng);
    battery.soc_max_kwh = 4.0 + 2.0 * unit(rng);
    battery.soc_min_kwh = 0.4;
    battery.soc_initial_kwh = 0.5 * (battery.soc_min_kwh + battery.soc_max_kwh);
    problem.fleet.battery = battery;

    flex::ShiftableConfig load;
    load.name = "dishwasher";
    load.power_kw = 0.8 + 0.4 * unit(rng);
    load.duration_steps = 2;
    load.window_begin = 0;
    load.window_end = config.horizon - load.duration_steps;
    load.baseline_start = std::min(2, load.window_end);
    problem.fleet.shiftables.push_back(load);

    problem.fleet.pv_capacity_kw = 4.0;

    // Midday surplus window: expected net load dips negative in the middle of
    // the horizon.
    std::vector<double> pv_mean(config.horizon);
    problem.baseline_net_kw.resize(config.horizon);
    for (int t = 0; t < config.horizon; ++t) {
        const double shape =
            std::sin(std::numbers::pi * (static_cast<double>(t) + 0.5) / config.horizon);
        pv_mean[t] = problem.fleet.pv_capacity_kw * shape;
        problem.baseline_net_kw[t] = 1.2 + 0.4 * unit(rng) - pv_mean[t];
    }
    problem.pv_scenarios_kw.resize(config.scenario_count);
    for (int s = 0; s < config.scenario_count; ++s) {
        auto& scenario = problem.pv_scenarios_kw[s];
        scenario.resize(config.horizon);
        const double level = 1.0 + config.pv_sigma * gauss(rng);
        for (int t = 0; t < config.horizon; ++t)
            scenario[t] = std::clamp(pv_mean[t] * (level + 0.1 * gauss(rng)), 0.0,
                                     problem.fleet.pv_capacity_kw);
    }
    return problem;
}

}  // namespace hemskit::synth
