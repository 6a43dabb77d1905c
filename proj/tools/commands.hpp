#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

namespace hemskit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;  // non-convergence / infeasible
inline constexpr int kExitIo = 2;         // I/O or schema error

/// Every command stages its outputs and commits them atomically: a failing run
/// leaves no partial files in the output directory.
int run_forecast(nlohmann::json config, const std::filesystem::path& out_dir);
int run_collab(nlohmann::json config, const std::filesystem::path& out_dir);
int run_flex(nlohmann::json config, const std::filesystem::path& out_dir);
int run_schedule(nlohmann::json config, const std::filesystem::path& out_dir);
int run_evaluate(nlohmann::json config, const std::filesystem::path& out_dir);

}  // namespace hemskit::cli
