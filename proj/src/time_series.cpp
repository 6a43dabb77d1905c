#include "hemskit/time_series.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hemskit {

namespace {

std::chrono::sys_seconds to_sys(Timestamp t) {
    return std::chrono::sys_seconds{std::chrono::seconds{t}};
}

}  // namespace

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto tp = to_sys(t);
    const auto dp = floor<days>(tp);
    const year_month_day ymd{dp};
    const hh_mm_ss hms{tp - dp};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

Timestamp parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const int got = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s);
    if (got < 3) throw std::invalid_argument("unparseable timestamp: " + text);
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                             day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date: " + text);
    const sys_days dp{ymd};
    return duration_cast<seconds>(dp.time_since_epoch()).count() + h * 3600 + mi * 60 + s;
}

int month_of(Timestamp t) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(to_sys(t))};
    return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

int hour_of(Timestamp t) {
    using namespace std::chrono;
    const auto tp = to_sys(t);
    const hh_mm_ss hms{tp - floor<days>(tp)};
    return static_cast<int>(hms.hours().count());
}

void TimeSeries::validate() const {
    if (step_seconds <= 0) throw std::invalid_argument("time step must be positive");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in series");
    }
}

void PanelSeries::validate() const {
    if (series.empty()) throw std::invalid_argument("panel needs at least one series");
    if (ids.size() != series.size())
        throw std::invalid_argument("panel ids/series count mismatch");
    const auto& head = series.front();
    for (const auto& s : series) {
        s.validate();
        if (s.start != head.start || s.step_seconds != head.step_seconds ||
            s.size() != head.size()) {
            throw std::invalid_argument("panel members misaligned");
        }
    }
}

}  // namespace hemskit
