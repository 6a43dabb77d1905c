#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "hemskit/epso.hpp"
#include "hemskit/json_io.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw hemskit::io::CsvError("cannot open config: " + path);
    return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HEMS toolkit: collaborative forecasting, flexibility surrogates and scheduling"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    long long seed_override = -1;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--seed", seed_override, "Override the config RNG seed");
        cmd->add_option("--out", out_dir, "Output directory");
    };

    auto* forecast = app.add_subcommand("forecast", "Embedded PV forecasting pipeline");
    auto* collab = app.add_subcommand("collab", "Collaborative VAR-LASSO fits and privacy report");
    auto* flex = app.add_subcommand("flex", "Flexibility trajectories and surrogate models");
    auto* schedule = app.add_subcommand("schedule", "Day-ahead appliance scheduling");
    auto* evaluate = app.add_subcommand("evaluate", "Score a forecast CSV");
    for (auto* cmd : {forecast, collab, flex, schedule, evaluate}) add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        nlohmann::json config = load_config(config_path);
        if (seed_override >= 0) config["seed"] = static_cast<std::uint64_t>(seed_override);
        const std::filesystem::path out(out_dir);

        if (forecast->parsed()) return hemskit::cli::run_forecast(config, out);
        if (collab->parsed()) return hemskit::cli::run_collab(config, out);
        if (flex->parsed()) return hemskit::cli::run_flex(config, out);
        if (schedule->parsed()) return hemskit::cli::run_schedule(config, out);
        if (evaluate->parsed()) return hemskit::cli::run_evaluate(config, out);
    } catch (const hemskit::flex::FlexSamplingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hemskit::cli::kExitNumerical;
    } catch (const hemskit::io::CsvError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hemskit::cli::kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return hemskit::cli::kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hemskit::cli::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hemskit::cli::kExitNumerical;
    }
    return hemskit::cli::kExitOk;
}
