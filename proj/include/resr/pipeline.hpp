// SPDX-License-Identifier: MIT

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "resr/bank.hpp"
#include "resr/dynamics.hpp"
#include "resr/retrieval.hpp"
#include "resr/search.hpp"
#include "resr/trajectory.hpp"

namespace resr {

struct DiscoveryConfig {
    SearchConfig search;
    std::optional<std::size_t> dtw_band;
    // Front members whose validation MSE is within best * (1 + rel) + abs
    // count as tied; the simplest of them is reported.
    double tie_relative = 1e-6;
    double tie_absolute = 1e-10;
};

struct AxisDiscovery {
    Axis axis = Axis::X;
    Expr expr;
    std::size_t complexity = 1;
    double train_mse = 0.0;      // protected ops, as seen by the search
    double validation_mse = 0.0; // protected ops off
    double test_mse = 0.0;       // protected ops off
    std::optional<double> ted_similarity;         // commutative variant
    std::optional<double> ordered_ted_similarity; // plain ordered variant
    bool truth_depends_on_t = false;
    std::vector<RetrievalHit> retrieved;
    std::vector<Candidate> front;
    ConvergenceLog log;
    std::vector<std::string> warnings;
    bool divergent = false;
};

struct GroundTruthPair {
    Expr x;
    Expr y;
};

struct DiscoveryResult {
    std::string id;
    AxisDiscovery x;
    AxisDiscovery y;
    double test_mse = 0.0; // mean over test samples of ((x^-x)^2 + (y^-y)^2) / 2
    bool divergent = false;
    double t_last = 0.0; // last observed time
    double dt = 0.0;     // observed grid spacing
    DiscoveryConfig config;

    // Mean similarity over the axes whose ground truth depends on t (both
    // axes when neither does); nullopt without ground truth.
    std::optional<double> ted_similarity() const;
};

// Retrieval and search per axis on the train segment, then selection of the
// validation-MSE minimizer on the final front.
DiscoveryResult discover(const SplitTrajectory& split, const EquationBank& bank, const DiscoveryConfig& config,
    const std::optional<GroundTruthPair>& truth = std::nullopt, std::string id = {});

struct Forecast {
    std::vector<Sample> samples;
    std::size_t horizon = 0;
    std::string source_id;
};

class ForecastError : public std::runtime_error {
public:
    ForecastError(double t, const std::string& detail);
    double t() const noexcept { return t_; }

private:
    double t_;
};

// f_x, f_y at t_last + i * dt for i = 1..K with protected ops off. dt defaults
// to the observed spacing. Throws ForecastError at the first non-finite value.
Forecast forecast(const DiscoveryResult& result, std::size_t horizon, std::optional<double> dt = std::nullopt);
Forecast forecast(const Expr& fx, const Expr& fy, double t_last, std::size_t horizon, double dt, std::string source_id = {});

enum class ExportFormat { Json, Csv };

struct Resolution {
    double width = 640.0;
    double height = 480.0;
};

struct ExportOptions {
    ExportFormat format = ExportFormat::Json;
    Resolution source;
    Resolution target;
    double points_per_second = 2.0;
    // Length of the exported window; defaults to horizon * native spacing.
    std::optional<double> duration;
};

struct ExportedPoint {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

// round(duration * pps) points at t_first + j / pps, each taken from the
// nearest forecast sample and scaled by target / source resolution.
std::vector<ExportedPoint> resample_for_export(const Forecast& fc, const ExportOptions& options);
void export_trajectory(const Forecast& fc, const ExportOptions& options, const std::filesystem::path& path);

// "ground_truth": {"<point_id>": {"x": "...", "y": "..."}} in the trajectory
// sidecar JSON, if any.
std::map<int, GroundTruthPair> read_ground_truth(const std::filesystem::path& csv);

// Top-k trajectories by motion variance, each discovered independently.
std::vector<DiscoveryResult> discover_set(const TrajectorySet& set, const EquationBank& bank,
    const DiscoveryConfig& config, std::size_t top_k = 5, const std::map<int, GroundTruthPair>& truth = {});

struct BenchmarkConfig {
    std::vector<SystemKind> systems{SystemKind::SpringMass, SystemKind::DampedSpringMass, SystemKind::Projectile};
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<double> alphas{0.0, 0.75};
    DiscoveryConfig discovery;
    double duration = 5.0;
    double sample_rate = 20.0;
    double initial_state_jitter = 0.2;
    double noise_sigma = 0.0; // px
    // Trajectories generated per (system, seed); the top_k_trajectories with
    // the largest motion variance are discovered and averaged.
    std::size_t points_per_seed = 1;
    std::size_t top_k_trajectories = 5;
    std::size_t workers = 1; // cells in parallel

    void validate() const;
};

struct BenchmarkRun {
    SystemKind system = SystemKind::SpringMass;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    int point_id = 0;
    std::optional<DiscoveryResult> result;
    std::string truth_x, truth_y;
    std::string error; // non-empty when the run threw
};

struct BenchmarkCell {
    SystemKind system = SystemKind::SpringMass;
    double alpha = 0.0;
    std::size_t runs = 0;
    std::size_t failed = 0; // errors and divergent results
    double ted_mean = 0.0, ted_std = 0.0;
    double mse_mean = 0.0, mse_std = 0.0;
};

struct ConvergencePoint {
    std::string system; // system name or "all"
    double alpha = 0.0;
    std::size_t iteration = 0;
    double mean_best_train_mse = 0.0;
    double mean_best_val_mse = 0.0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRun> runs;
    std::vector<BenchmarkCell> cells;
    std::vector<ConvergencePoint> curves;
};

BenchmarkReport run_benchmark(const BenchmarkConfig& config, const EquationBank& bank);

// runs.csv, aggregate.csv, table.csv, convergence.csv and curves.csv.
// Returns the written paths.
std::vector<std::filesystem::path> write_benchmark_report(const BenchmarkReport& report, const std::filesystem::path& dir);

// Shortest round-trip decimal form; fixed across platforms and locales.
std::string format_number(double v);

void write_convergence_csv(const ConvergenceLog& log, const std::filesystem::path& path);
void write_front_tsv(const std::vector<Candidate>& front, const std::filesystem::path& path);

} // namespace resr
