// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace resr {

struct Sample {
    double t = 0.0; // seconds
    double x = 0.0; // px
    double y = 0.0; // px

    friend bool operator==(const Sample&, const Sample&) = default;
};

enum class Axis { X, Y };

struct Trajectory {
    int point_id = 0;
    std::vector<Sample> samples;
    double fps = 0.0;

    std::size_t size() const noexcept { return samples.size(); }
    std::vector<double> times() const;
    std::vector<double> axis(Axis a) const;
    // Throws std::invalid_argument unless t is strictly increasing, there are
    // at least `min_samples` samples and every coordinate is finite.
    void validate(std::size_t min_samples = 2) const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct TrajectorySet {
    std::vector<Trajectory> trajectories;
    std::string source_path;
    std::optional<int> grid_size; // M for an M x M query grid, metadata only
};

struct SplitTrajectory {
    Trajectory train;
    Trajectory validation;
    Trajectory test;
    double t_train_end = 0.0; // time of the last training sample
    double t_val_end = 0.0;   // time of the last validation sample
};

enum class LoadErrorKind {
    Io,
    MissingColumn,
    MalformedRow,
    NonMonotonicFrame,
    DuplicateFrame,
    NonFiniteCoordinate,
    TooFewSamples,
    MissingFps,
};

class LoadError : public std::runtime_error {
public:
    LoadError(LoadErrorKind kind, std::size_t row, const std::string& detail);
    LoadErrorKind kind() const noexcept { return kind_; }
    // 1-based line number in the file (the header is line 1); 0 if not row-specific.
    std::size_t row() const noexcept { return row_; }

private:
    LoadErrorKind kind_;
    std::size_t row_;
};

// Reads `point_id,frame,x,y` CSV. fps comes from the argument or, when absent,
// from a sidecar JSON (`<file>.json` or `<stem>.json`) holding key "fps".
TrajectorySet load_trajectories(const std::filesystem::path& path, std::optional<double> fps = std::nullopt);

void write_trajectories_csv(const std::filesystem::path& path, const TrajectorySet& set);

// Var(x) + Var(y), population variance over time.
double motion_variance(const Trajectory& traj);

TrajectorySet select_top_k_by_variance(const TrajectorySet& set, std::size_t k);

// 80/10/10 along time; boundaries at floor(0.8 T) and floor(0.9 T). Requires T >= 10.
SplitTrajectory temporal_split(const Trajectory& traj);

} // namespace resr
