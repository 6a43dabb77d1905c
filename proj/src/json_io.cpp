#include "hemskit/json_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hemskit::io {

std::string format_double(double v) {
    char buf[40];
    // Shortest representation that parses back to the same double.
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

namespace {

std::string quote_field(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

double parse_double(const std::string& text, std::size_t row) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw CsvError("row " + std::to_string(row) + ": not a number: '" + text + "'");
    return v;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open for writing: " + path.string());
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out << ',';
        out << quote_field(table.header[c]);
    }
    out << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << quote_field(row[c]);
        }
        out << "\r\n";
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open: " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    CsvTable table;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    std::size_t row_no = 1;
    const auto flush_row = [&]() {
        fields.push_back(field);
        field.clear();
        if (table.header.empty())
            table.header = fields;
        else {
            if (fields.size() != table.header.size())
                throw CsvError("row " + std::to_string(row_no) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
            table.rows.push_back(fields);
        }
        fields.clear();
        ++row_no;
    };
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c == '\r') {
            // handled with the following newline
        } else if (c == '\n') {
            flush_row();
        } else {
            field += c;
        }
    }
    if (!field.empty() || !fields.empty()) flush_row();
    if (table.header.empty()) throw CsvError("empty CSV: " + path.string());
    return table;
}

void write_panel_csv(const std::filesystem::path& path, const PanelSeries& panel) {
    panel.validate();
    CsvTable table;
    table.header.push_back("timestamp");
    for (const auto& id : panel.ids) table.header.push_back(id);
    for (std::size_t t = 0; t < panel.length(); ++t) {
        std::vector<std::string> row;
        row.push_back(format_timestamp(panel.series.front().time_at(t)));
        for (const auto& s : panel.series) row.push_back(format_double(s.values[t]));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

PanelSeries read_panel_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header.front() != "timestamp")
        throw CsvError("panel CSV must start with a timestamp column");
    if (table.rows.empty()) throw CsvError("panel CSV has no data rows");

    PanelSeries panel;
    for (std::size_t c = 1; c < table.header.size(); ++c) panel.ids.push_back(table.header[c]);
    panel.series.resize(panel.ids.size());

    const Timestamp start = parse_timestamp(table.rows.front().front());
    Timestamp step = 3600;
    if (table.rows.size() > 1)
        step = parse_timestamp(table.rows[1].front()) - start;
    if (step <= 0) throw CsvError("row 3: non-increasing timestamps");
    for (auto& s : panel.series) {
        s.start = start;
        s.step_seconds = step;
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const Timestamp expected = start + static_cast<Timestamp>(r) * step;
        if (parse_timestamp(table.rows[r].front()) != expected)
            throw CsvError("row " + std::to_string(r + 2) + ": unexpected timestamp (fixed step required)");
        for (std::size_t c = 1; c < table.header.size(); ++c)
            panel.series[c - 1].values.push_back(parse_double(table.rows[r][c], r + 2));
    }
    panel.validate();
    return panel;
}

void write_nwp_csv(const std::filesystem::path& path, const features::NwpGrid& grid) {
    CsvTable table;
    table.header = {"run_time", "lead_hours", "lat", "lon"};
    for (const auto& v : grid.variables) table.header.push_back(v);
    for (std::size_t r = 0; r < grid.runs(); ++r)
        for (std::size_t l = 0; l < grid.leads(); ++l)
            for (std::size_t p = 0; p < grid.point_count(); ++p) {
                std::vector<std::string> row;
                row.push_back(format_timestamp(grid.run_times[r]));
                row.push_back(std::to_string(grid.lead_hours[l]));
                row.push_back(format_double(grid.points[p].lat));
                row.push_back(format_double(grid.points[p].lon));
                for (std::size_t v = 0; v < grid.variable_count(); ++v)
                    row.push_back(format_double(grid.at(r, l, p, v)));
                table.rows.push_back(std::move(row));
            }
    write_csv(path, table);
}

features::NwpGrid read_nwp_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 5 || table.header[0] != "run_time" ||
        table.header[1] != "lead_hours" || table.header[2] != "lat" || table.header[3] != "lon")
        throw CsvError("NWP CSV header must be run_time,lead_hours,lat,lon,<variables>");

    features::NwpGrid grid;
    for (std::size_t c = 4; c < table.header.size(); ++c)
        grid.variables.push_back(table.header[c]);

    std::vector<Timestamp> runs;
    std::vector<int> leads;
    std::vector<features::GridPoint> points;
    const auto find_or_add = [](auto& list, const auto& value) {
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i] == value) return i;
        list.push_back(value);
        return list.size() - 1;
    };
    struct Cell {
        std::size_t run, lead, point;
        std::vector<double> values;
    };
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        Cell cell;
        cell.run = find_or_add(runs, parse_timestamp(row[0]));
        cell.lead = find_or_add(leads, static_cast<int>(parse_double(row[1], r + 2)));
        features::GridPoint pt{parse_double(row[2], r + 2), parse_double(row[3], r + 2)};
        std::size_t p = points.size();
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i].lat == pt.lat && points[i].lon == pt.lon) {
                p = i;
                break;
            }
        if (p == points.size()) points.push_back(pt);
        cell.point = p;
        for (std::size_t c = 4; c < row.size(); ++c)
            cell.values.push_back(parse_double(row[c], r + 2));
        cells.push_back(std::move(cell));
    }
    grid.run_times = runs;
    grid.lead_hours = leads;
    grid.points = points;
    grid.data.assign(grid.runs() * grid.leads() * grid.point_count() * grid.variable_count(),
                     std::numeric_limits<double>::quiet_NaN());
    for (const auto& cell : cells)
        for (std::size_t v = 0; v < grid.variable_count(); ++v)
            grid.data[grid.index(cell.run, cell.lead, cell.point, v)] = cell.values[v];
    grid.validate();
    return grid;
}

void write_forecast_csv(const std::filesystem::path& path, const QuantileForecast& fc,
                        const std::vector<double>* observed) {
    CsvTable table;
    table.header = {"issue_time", "horizon_hours", "point"};
    for (double q : fc.quantile_levels) {
        char label[16];
        std::snprintf(label, sizeof(label), "q%02d", static_cast<int>(std::lround(q * 100)));
        table.header.push_back(label);
    }
    if (observed) table.header.push_back("observed");
    for (std::size_t h = 0; h < fc.horizon_count(); ++h) {
        std::vector<std::string> row;
        row.push_back(format_timestamp(fc.issue_time));
        row.push_back(std::to_string(fc.horizons[h]));
        row.push_back(format_double(fc.point[h]));
        for (double v : fc.values[h]) row.push_back(format_double(v));
        if (observed) row.push_back(format_double((*observed)[h]));
        table.rows.push_back(std::move(row));
    }
    write_csv(path, table);
}

QuantileForecast read_forecast_csv(const std::filesystem::path& path,
                                   std::vector<double>* observed) {
    const CsvTable table = read_csv(path);
    QuantileForecast fc;
    if (table.header.size() < 4) throw CsvError("forecast CSV too narrow");
    const bool has_observed = table.header.back() == "observed";
    const std::size_t q_end = table.header.size() - (has_observed ? 1 : 0);
    for (std::size_t c = 3; c < q_end; ++c) {
        const auto& name = table.header[c];
        if (name.size() != 3 || name[0] != 'q')
            throw CsvError("unexpected quantile column: " + name);
        fc.quantile_levels.push_back(std::stoi(name.substr(1)) / 100.0);
    }
    if (observed && !has_observed) throw CsvError("forecast CSV lacks an observed column");
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (r == 0) fc.issue_time = parse_timestamp(row[0]);
        fc.horizons.push_back(static_cast<int>(parse_double(row[1], r + 2)));
        fc.point.push_back(parse_double(row[2], r + 2));
        std::vector<double> values;
        for (std::size_t c = 3; c < q_end; ++c) values.push_back(parse_double(row[c], r + 2));
        fc.values.push_back(std::move(values));
        if (observed) observed->push_back(parse_double(row.back(), r + 2));
    }
    fc.validate();
    return fc;
}

json to_json(const MetricReport& report) {
    return json{{"mae", report.mae},
                {"rmse", report.rmse},
                {"crps", report.crps},
                {"n_samples", report.n_samples}};
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = j.size();
    const auto cols = rows ? j.front().size() : 0;
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    return m;
}

json var_model_to_json(const var::VarModel& model) {
    json j;
    j["type"] = "var_lasso";
    j["coefficients"] = matrix_to_json(model.B);
    j["lambda"] = model.lambda;
    j["rho"] = model.rho;
    j["iterations"] = model.iterations;
    j["converged"] = model.converged;
    j["primal_residual"] = model.primal_residual;
    j["dual_residual"] = model.dual_residual;
    j["n"] = model.n;
    j["p"] = model.p;
    j["means"] = std::vector<double>(model.means.data(), model.means.data() + model.means.size());
    return j;
}

json svdd_to_json(const flex::SvddModel& model) {
    json j;
    j["type"] = "svdd";
    j["params"] = {{"kernel", "sigmoid"},
                   {"gamma", model.gamma},
                   {"coef0", model.coef0},
                   {"nu", model.nu},
                   {"radius2_threshold", model.radius2_threshold},
                   {"cross_term", model.cross_term},
                   {"betas", model.betas},
                   {"support_vectors", model.support_vectors}};
    return j;
}

flex::SvddModel svdd_from_json(const json& j) {
    if (j.at("type") != "svdd") throw std::invalid_argument("not an SVDD serialization");
    const auto& params = j.at("params");
    flex::SvddModel model;
    model.gamma = params.at("gamma").get<double>();
    model.coef0 = params.at("coef0").get<double>();
    model.nu = params.at("nu").get<double>();
    model.radius2_threshold = params.at("radius2_threshold").get<double>();
    model.cross_term = params.at("cross_term").get<double>();
    model.betas = params.at("betas").get<std::vector<double>>();
    model.support_vectors = params.at("support_vectors").get<std::vector<std::vector<double>>>();
    return model;
}

json vbattery_to_json(const flex::VirtualBattery& vb) {
    json j;
    j["type"] = "virtual_battery";
    j["params"] = {{"p_max_kw", vb.p_max_kw},     {"p_min_kw", vb.p_min_kw},
                   {"soc_max_kwh", vb.soc_max_kwh}, {"soc_min_kwh", vb.soc_min_kwh},
                   {"soc_initial_kwh", vb.soc_initial_kwh}, {"dt_hours", vb.dt_hours}};
    return j;
}

flex::VirtualBattery vbattery_from_json(const json& j) {
    if (j.at("type") != "virtual_battery")
        throw std::invalid_argument("not a virtual battery serialization");
    const auto& params = j.at("params");
    flex::VirtualBattery vb;
    vb.p_max_kw = params.at("p_max_kw").get<std::vector<double>>();
    vb.p_min_kw = params.at("p_min_kw").get<std::vector<double>>();
    vb.soc_max_kwh = params.at("soc_max_kwh").get<std::vector<double>>();
    vb.soc_min_kwh = params.at("soc_min_kwh").get<std::vector<double>>();
    vb.soc_initial_kwh = params.at("soc_initial_kwh").get<double>();
    vb.dt_hours = params.at("dt_hours").get<double>();
    return vb;
}

json schedule_to_json(const hems::Schedule& schedule) {
    json j;
    j["feasible"] = schedule.feasible;
    if (!schedule.feasible) j["binding_constraint"] = schedule.binding_constraint;
    j["starts"] = schedule.starts;
    j["ewh_control"] = schedule.ewh_control;
    j["cost"] = schedule.cost;
    j["imported_kwh"] = schedule.imported_kwh;
    j["exported_kwh"] = schedule.exported_kwh;
    j["net_kw"] = schedule.net_kw;
    return j;
}

json fleet_to_json(const flex::DeviceFleet& fleet) {
    json j;
    if (fleet.ewh) {
        const auto& e = *fleet.ewh;
        j["ewh"] = {{"volume_l", e.volume_l},       {"power_kw", e.power_kw},
                    {"efficiency", e.efficiency},   {"loss_w_per_k", e.loss_w_per_k},
                    {"temp_min_c", e.temp_min_c},   {"temp_max_c", e.temp_max_c},
                    {"ambient_c", e.ambient_c},     {"inlet_c", e.inlet_c},
                    {"initial_c", e.initial_c},     {"draw_l_per_h", e.draw_l_per_h}};
    }
    if (fleet.battery) {
        const auto& b = *fleet.battery;
        j["battery"] = {{"charge_kw", b.charge_kw},
                        {"discharge_kw", b.discharge_kw},
                        {"eff_charge", b.eff_charge},
                        {"eff_discharge", b.eff_discharge},
                        {"soc_min_kwh", b.soc_min_kwh},
                        {"soc_max_kwh", b.soc_max_kwh},
                        {"soc_initial_kwh", b.soc_initial_kwh},
                        {"charge_from_surplus_only", b.charge_from_surplus_only}};
    }
    json loads = json::array();
    for (const auto& s : fleet.shiftables)
        loads.push_back({{"name", s.name},
                         {"power_kw", s.power_kw},
                         {"duration_steps", s.duration_steps},
                         {"window_begin", s.window_begin},
                         {"window_end", s.window_end},
                         {"baseline_start", s.baseline_start}});
    j["shiftables"] = loads;
    j["pv_capacity_kw"] = fleet.pv_capacity_kw;
    return j;
}

namespace {

template <typename T>
void maybe_get(const json& j, const char* key, T& value) {
    if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace

flex::DeviceFleet fleet_from_json(const json& j) {
    flex::DeviceFleet fleet;
    if (j.contains("ewh")) {
        flex::EwhConfig e;
        const auto& je = j.at("ewh");
        maybe_get(je, "volume_l", e.volume_l);
        maybe_get(je, "power_kw", e.power_kw);
        maybe_get(je, "efficiency", e.efficiency);
        maybe_get(je, "loss_w_per_k", e.loss_w_per_k);
        maybe_get(je, "temp_min_c", e.temp_min_c);
        maybe_get(je, "temp_max_c", e.temp_max_c);
        maybe_get(je, "ambient_c", e.ambient_c);
        maybe_get(je, "inlet_c", e.inlet_c);
        maybe_get(je, "initial_c", e.initial_c);
        maybe_get(je, "draw_l_per_h", e.draw_l_per_h);
        fleet.ewh = e;
    }
    if (j.contains("battery")) {
        flex::BatteryConfig b;
        const auto& jb = j.at("battery");
        maybe_get(jb, "charge_kw", b.charge_kw);
        maybe_get(jb, "discharge_kw", b.discharge_kw);
        maybe_get(jb, "eff_charge", b.eff_charge);
        maybe_get(jb, "eff_discharge", b.eff_discharge);
        maybe_get(jb, "soc_min_kwh", b.soc_min_kwh);
        maybe_get(jb, "soc_max_kwh", b.soc_max_kwh);
        maybe_get(jb, "soc_initial_kwh", b.soc_initial_kwh);
        maybe_get(jb, "charge_from_surplus_only", b.charge_from_surplus_only);
        fleet.battery = b;
    }
    if (j.contains("shiftables")) {
        for (const auto& js : j.at("shiftables")) {
            flex::ShiftableConfig s;
            maybe_get(js, "name", s.name);
            maybe_get(js, "power_kw", s.power_kw);
            maybe_get(js, "duration_steps", s.duration_steps);
            maybe_get(js, "window_begin", s.window_begin);
            maybe_get(js, "window_end", s.window_end);
            maybe_get(js, "baseline_start", s.baseline_start);
            fleet.shiftables.push_back(s);
        }
    }
    maybe_get(j, "pv_capacity_kw", fleet.pv_capacity_kw);
    fleet.validate();
    return fleet;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open: " + path.string());
    return json::parse(in);
}

void write_round_log(const std::filesystem::path& path, const var::RoundLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open for writing: " + path.string());
    for (const auto& rec : log.rounds) {
        json j;
        j["k"] = rec.k;
        j["n_workers"] = log.n_workers;
        j["rho"] = log.rho;
        json uploads = json::array();
        for (std::size_t w = 0; w < rec.upload_digests.size(); ++w) {
            char digest[24];
            std::snprintf(digest, sizeof(digest), "%016llx",
                          static_cast<unsigned long long>(rec.upload_digests[w]));
            uploads.push_back({{"node", w}, {"digest", digest}});
        }
        j["uploads"] = uploads;
        j["broadcast"] = {{"consensus", matrix_to_json(rec.consensus)},
                          {"mean_partial", matrix_to_json(rec.mean_partial)},
                          {"dual", matrix_to_json(rec.dual)}};
        out << j.dump() << '\n';
    }
}

var::RoundLog read_round_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open: " + path.string());
    var::RoundLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        log.n_workers = j.at("n_workers").get<int>();
        log.rho = j.at("rho").get<double>();
        var::RoundRecord rec;
        rec.k = j.at("k").get<int>();
        for (const auto& upload : j.at("uploads"))
            rec.upload_digests.push_back(
                std::stoull(upload.at("digest").get<std::string>(), nullptr, 16));
        rec.consensus = matrix_from_json(j.at("broadcast").at("consensus"));
        rec.mean_partial = matrix_from_json(j.at("broadcast").at("mean_partial"));
        rec.dual = matrix_from_json(j.at("broadcast").at("dual"));
        log.rounds.push_back(std::move(rec));
    }
    return log;
}

bool text_embeds_values(const std::string& text, std::span<const double> values) {
    for (double v : values) {
        if (std::fabs(v) < 1e-9) continue;  // zeros match anything
        const std::string rendered = json(v).dump();
        if (rendered.size() < 4) continue;  // too short to be telling
        if (text.find(rendered) != std::string::npos) return true;
    }
    return false;
}

}  // namespace hemskit::io
