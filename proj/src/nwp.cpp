#include "hemskit/nwp.hpp"

#include <cmath>
#include <stdexcept>

namespace hemskit::features {

int NwpGrid::variable_index(const std::string& name) const {
    for (std::size_t v = 0; v < variables.size(); ++v)
        if (variables[v] == name) return static_cast<int>(v);
    throw std::invalid_argument("unknown NWP variable: " + name);
}

std::size_t NwpGrid::central_point() const {
    if (points.empty()) throw std::invalid_argument("NWP grid has no points");
    double clat = 0.0, clon = 0.0;
    for (const auto& p : points) {
        clat += p.lat;
        clon += p.lon;
    }
    clat /= static_cast<double>(points.size());
    clon /= static_cast<double>(points.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double dx = points[i].lat - clat;
        const double dy = points[i].lon - clon;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

void NwpGrid::validate() const {
    if (data.size() != runs() * leads() * point_count() * variable_count())
        throw std::invalid_argument("NWP data size inconsistent with dimensions");
    for (std::size_t r = 1; r < run_times.size(); ++r)
        if (run_times[r] <= run_times[r - 1])
            throw std::invalid_argument("NWP run times not ascending");
    const bool has_cloud = !variables.empty();
    if (!has_cloud) throw std::invalid_argument("NWP grid has no variables");
    for (std::size_t v = 0; v < variables.size(); ++v) {
        const auto& name = variables[v];
        const bool cloud = name == "cfl" || name == "cfm" || name == "cfh" || name == "cft";
        for (std::size_t r = 0; r < runs(); ++r)
            for (std::size_t l = 0; l < leads(); ++l)
                for (std::size_t p = 0; p < point_count(); ++p) {
                    const double x = at(r, l, p, v);
                    if (!std::isfinite(x))
                        throw std::invalid_argument("non-finite NWP value");
                    if (cloud && (x < 0.0 || x > 1.0))
                        throw std::invalid_argument("cloud cover outside [0,1]");
                    if (name == "swflx" && x < 0.0)
                        throw std::invalid_argument("negative shortwave flux");
                    if (name == "temp" && x <= 0.0)
                        throw std::invalid_argument("non-positive temperature");
                }
    }
}

}  // namespace hemskit::features
