#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hemskit/admm.hpp"
#include "hemskit/forecast.hpp"
#include "hemskit/nwp.hpp"
#include "hemskit/scheduler.hpp"
#include "hemskit/svdd.hpp"
#include "hemskit/time_series.hpp"
#include "hemskit/virtual_battery.hpp"

namespace hemskit::io {

using json = nlohmann::json;

/// Shortest exact decimal rendering of a double (round-trips bit-exactly).
std::string format_double(double v);

/// Raised on malformed input files; the message carries the row number.
struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 output: comma separated, CRLF line endings, minimal quoting.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Wide panel layout: header "timestamp,<id>,...", one row per step.
void write_panel_csv(const std::filesystem::path& path, const PanelSeries& panel);
PanelSeries read_panel_csv(const std::filesystem::path& path);

/// Long grid layout: run_time, lead_hours, lat, lon, then one column per variable.
void write_nwp_csv(const std::filesystem::path& path, const features::NwpGrid& grid);
features::NwpGrid read_nwp_csv(const std::filesystem::path& path);

/// Per-horizon quantile rows, optionally with the realized observation.
void write_forecast_csv(const std::filesystem::path& path, const QuantileForecast& fc,
                        const std::vector<double>* observed);
QuantileForecast read_forecast_csv(const std::filesystem::path& path,
                                   std::vector<double>* observed = nullptr);

json to_json(const MetricReport& report);
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

json var_model_to_json(const var::VarModel& model);

json svdd_to_json(const flex::SvddModel& model);
flex::SvddModel svdd_from_json(const json& j);

json vbattery_to_json(const flex::VirtualBattery& vb);
flex::VirtualBattery vbattery_from_json(const json& j);

json schedule_to_json(const hems::Schedule& schedule);

json fleet_to_json(const flex::DeviceFleet& fleet);
flex::DeviceFleet fleet_from_json(const json& j);

void write_json_file(const std::filesystem::path& path, const json& j);
json read_json_file(const std::filesystem::path& path);

/// JSON-lines round log: one record per iteration with the worker upload
/// digests and the full hub broadcast.
void write_round_log(const std::filesystem::path& path, const var::RoundLog& log);
var::RoundLog read_round_log(const std::filesystem::path& path);

/// Byte-level scan: true when any non-trivial value of `values` appears
/// verbatim in the serialized text. Used to show surrogate models carry no
/// behind-the-meter baseline data.
bool text_embeds_values(const std::string& text, std::span<const double> values);

}  // namespace hemskit::io
