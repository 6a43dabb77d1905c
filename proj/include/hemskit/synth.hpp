#pragma once

#include <cstdint>

#include "hemskit/features.hpp"
#include "hemskit/nwp.hpp"
#include "hemskit/time_series.hpp"
#include "hemskit/trajectory.hpp"

namespace hemskit::synth {

/// Seeded synthetic NWP feed standing in for a real weather provider: daily
/// runs, hourly leads, a small lat/lon grid, and the six base variables with
/// diurnal structure plus spatially correlated cloud fields.
struct NwpConfig {
    std::uint64_t seed = 1;
    int days = 30;
    int grid_nx = 5;
    int grid_ny = 5;
    double lat0 = 41.10;
    double lon0 = -8.60;
    double spacing_deg = 0.05;
    int lead_hours = 72;
    Timestamp start = 1430438400;  // 2015-05-01T00:00:00Z
};

features::NwpGrid make_nwp_grid(const NwpConfig& config);

/// Hourly PV observations for the plant at the grid center. The generation
/// depends on the grid's spatial structure (spatial deviation and weighted
/// averages of the flux field) on top of the central-point sky state, so the
/// spatial feature set carries real signal.
struct PvPlantConfig {
    double capacity_kw = 6.0;
    std::uint64_t noise_seed = 7;
    double noise_share = 0.02;
};

TimeSeries make_pv_observations(const features::NwpGrid& grid, const PvPlantConfig& config);

/// Deterministic clear-sky proxy used for night masking.
double clearsky_fraction(Timestamp t);

/// Stationary sparse VAR(p) panel with per-series offsets (so centering is
/// exercised) and seeded Gaussian innovations.
struct VarPanelConfig {
    std::uint64_t seed = 1;
    int n = 3;
    int p = 2;
    int length = 200;
    double density = 0.4;       // share of nonzero coefficients
    double noise_sigma = 0.1;
    double spectral_radius = 0.7;
};

PanelSeries make_var_panel(const VarPanelConfig& config);

/// Heteroscedastic tabular regression set for quantile-coverage checks:
/// y = sin(2 pi x1) + (0.2 + 0.8 x2) * eps.
struct TabularData {
    features::FeatureMatrix X;
    std::vector<double> y;
};

TabularData make_heteroscedastic(std::uint64_t seed, int n_samples);

/// Behind-the-meter flexibility problem with a midday PV-surplus window and
/// seeded scenario spread, sized for an 8h horizon by default.
struct FlexScenarioConfig {
    std::uint64_t seed = 1;
    int horizon = 8;
    int scenario_count = 10;
    double alpha = 0.9;
    double pv_sigma = 0.35;
};

flex::FlexProblem make_flex_problem(const FlexScenarioConfig& config);

}  // namespace hemskit::synth
