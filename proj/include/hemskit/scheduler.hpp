#pragma once

#include <span>
#include <string>
#include <vector>

#include "hemskit/devices.hpp"

namespace hemskit::hems {

struct Tariff {
    std::vector<double> prices;  // import price per kWh, one per period
    double feed_in = 0.0;        // export remuneration per kWh, 0 = pure self-consumption

    void validate() const;
};

struct Schedule {
    bool feasible = true;
    std::string binding_constraint;  // set when infeasible
    std::vector<int> starts;         // chosen start period per shiftable load
    std::vector<double> ewh_control;  // on/off heating decisions
    double cost = 0.0;
    std::vector<double> imported_kwh;
    std::vector<double> exported_kwh;
    std::vector<double> net_kw;  // consumption minus PV after scheduling
};

/// Import/export netting: sum_t price_t * import_t - feed_in * export_t.
/// Export is never remunerated negatively (clipped at zero revenue).
double schedule_cost(std::span<const double> net_kw, const Tariff& tariff, double dt_hours);

/// Day-ahead HEMS optimization: EWH heating placed greedily in the cheapest
/// periods that hold the comfort band, then exhaustive search over shiftable
/// start combinations (exact at desk scale), ties resolved to earliest starts.
Schedule optimize_schedule(const flex::DeviceFleet& fleet, const Tariff& tariff,
                           std::span<const double> pv_forecast_kw,
                           std::span<const double> base_load_kw, double dt_hours);

/// Cost of the fleet at its baseline starts (no optimization), for savings
/// comparisons.
Schedule baseline_schedule(const flex::DeviceFleet& fleet, const Tariff& tariff,
                           std::span<const double> pv_forecast_kw,
                           std::span<const double> base_load_kw, double dt_hours);

}  // namespace hemskit::hems
