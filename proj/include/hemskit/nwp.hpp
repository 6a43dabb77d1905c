#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hemskit/time_series.hpp"

namespace hemskit::features {

struct GridPoint {
    double lat = 0.0;
    double lon = 0.0;
};

/// The six NWP variables of the base model, in canonical column order.
inline const std::vector<std::string>& nwp_variable_names() {
    static const std::vector<std::string> names = {"swflx", "temp", "cfl",
                                                   "cfm",   "cfh",  "cft"};
    return names;
}

/// Forecasted weather fields over (run, lead time, grid point, variable).
/// Cloud-cover variables live in [0,1], swflx >= 0, temp > 0 K.
struct NwpGrid {
    std::vector<Timestamp> run_times;   // issue time of each run, ascending
    std::vector<int> lead_hours;        // lead times, ascending, one step per hour
    std::vector<GridPoint> points;
    std::vector<std::string> variables;
    std::vector<double> data;  // [run][lead][point][variable], row-major

    std::size_t runs() const { return run_times.size(); }
    std::size_t leads() const { return lead_hours.size(); }
    std::size_t point_count() const { return points.size(); }
    std::size_t variable_count() const { return variables.size(); }

    std::size_t index(std::size_t r, std::size_t l, std::size_t p, std::size_t v) const {
        return ((r * leads() + l) * point_count() + p) * variable_count() + v;
    }
    double at(std::size_t r, std::size_t l, std::size_t p, std::size_t v) const {
        return data[index(r, l, p, v)];
    }

    Timestamp valid_time(std::size_t r, std::size_t l) const {
        return run_times[r] + static_cast<Timestamp>(lead_hours[l]) * 3600;
    }

    int variable_index(const std::string& name) const;

    /// Index of the grid point closest to the grid centroid.
    std::size_t central_point() const;

    void validate() const;
};

}  // namespace hemskit::features
