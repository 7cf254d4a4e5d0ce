// SPDX-License-Identifier: MIT

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "resr/pipeline.hpp"

namespace resr {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Everything a CLI run can be configured with. Tables in the file:
//   [search]     n_iterations, n_populations, population_size, alpha, top_k,
//                operators, max_complexity, parsimony, tournament_size,
//                crossover_probability, migration_count, init_max_depth,
//                init_constant_range, seed, workers,
//                [search.constant_budget] / [search.offspring_budget]
//                restarts, evaluations; [search.mutation] one weight per operator
//   [retrieval]  band, tie_relative, tie_absolute
//   [data]       fps, top_k_trajectories
//   [forecast]   horizon (steps) or duration (s), dt
//   [export]     format ("json" | "csv"), points_per_second, duration,
//                source_width, source_height, width, height
//   [bench]      systems, seeds, alphas, duration, sample_rate, jitter,
//                noise_sigma, points_per_seed, top_k_trajectories, workers
// Unknown keys are errors.
struct RunConfig {
    DiscoveryConfig discovery;
    BenchmarkConfig bench; // bench.discovery is kept equal to discovery
    std::optional<double> fps;
    std::size_t top_k_trajectories = 5;
    std::optional<std::size_t> forecast_horizon;
    double forecast_duration = 5.0;
    std::optional<double> forecast_dt;
    ExportOptions export_options;
};

enum class ConfigFormat { Json, Toml };

RunConfig parse_run_config(std::string_view text, ConfigFormat format, RunConfig base = {});
// Format from the extension (.toml, otherwise JSON).
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

// Settings snapshot as JSON text, loadable by parse_run_config.
std::string config_to_json(const RunConfig& config);

} // namespace resr
