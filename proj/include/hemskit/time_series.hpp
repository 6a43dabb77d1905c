#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hemskit {

/// Unix timestamp in seconds (UTC, fixed-step indexing only).
using Timestamp = std::int64_t;

/// Renders a timestamp as ISO 8601 UTC, e.g. "2015-06-15T12:00:00Z".
std::string format_timestamp(Timestamp t);

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (the trailing 'Z' is optional).
Timestamp parse_timestamp(const std::string& text);

/// Calendar month (1-12) of a UTC timestamp.
int month_of(Timestamp t);

/// Hour of day (0-23) of a UTC timestamp.
int hour_of(Timestamp t);

/// A single fixed-step power series in kW.
struct TimeSeries {
    Timestamp start = 0;
    std::int64_t step_seconds = 3600;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    Timestamp time_at(std::size_t i) const {
        return start + static_cast<Timestamp>(i) * step_seconds;
    }

    /// Throws std::invalid_argument on non-finite values or step <= 0.
    void validate() const;
};

/// n aligned series, one per HEMS node. All members share start, step and length.
struct PanelSeries {
    std::vector<std::string> ids;
    std::vector<TimeSeries> series;

    std::size_t node_count() const { return series.size(); }
    std::size_t length() const { return series.empty() ? 0 : series.front().size(); }

    /// Throws std::invalid_argument when members are misaligned, empty, or invalid.
    void validate() const;
};

}  // namespace hemskit
