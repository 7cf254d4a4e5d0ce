// SPDX-License-Identifier: MIT

#include "resr/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace resr {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::optional<double> sidecar_fps(const std::filesystem::path& csv, std::optional<int>& grid)
{
    const std::filesystem::path candidates[] = {
        std::filesystem::path(csv.string() + ".json"),
        std::filesystem::path(csv).replace_extension(".json"),
    };
    for (const auto& p : candidates) {
        std::ifstream in(p);
        if (!in.good()) continue;
        const auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) continue;
        if (doc.contains("grid_size") && doc["grid_size"].is_number_integer()) {
            grid = doc["grid_size"].get<int>();
        }
        if (doc.contains("fps") && doc["fps"].is_number()) {
            return doc["fps"].get<double>();
        }
    }
    return std::nullopt;
}

std::string load_error_prefix(LoadErrorKind kind)
{
    switch (kind) {
    case LoadErrorKind::Io: return "io error";
    case LoadErrorKind::MissingColumn: return "missing column";
    case LoadErrorKind::MalformedRow: return "malformed row";
    case LoadErrorKind::NonMonotonicFrame: return "non-monotonic frame";
    case LoadErrorKind::DuplicateFrame: return "duplicate frame";
    case LoadErrorKind::NonFiniteCoordinate: return "non-finite coordinate";
    case LoadErrorKind::TooFewSamples: return "too few samples";
    case LoadErrorKind::MissingFps: return "missing fps";
    }
    return "load error";
}

double population_variance(const std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

Trajectory segment(const Trajectory& traj, std::size_t begin, std::size_t end)
{
    Trajectory out;
    out.point_id = traj.point_id;
    out.fps = traj.fps;
    out.samples.assign(traj.samples.begin() + static_cast<std::ptrdiff_t>(begin),
        traj.samples.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

} // namespace

LoadError::LoadError(LoadErrorKind kind, std::size_t row, const std::string& detail)
    : std::runtime_error(load_error_prefix(kind) + (row ? " at row " + std::to_string(row) : std::string()) + ": " + detail),
      kind_(kind), row_(row)
{
}

std::vector<double> Trajectory::times() const
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.t);
    return out;
}

std::vector<double> Trajectory::axis(Axis a) const
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(a == Axis::X ? s.x : s.y);
    return out;
}

void Trajectory::validate(std::size_t min_samples) const
{
    if (samples.size() < min_samples) {
        throw std::invalid_argument("trajectory has " + std::to_string(samples.size()) + " samples, need "
            + std::to_string(min_samples));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i].x) || !std::isfinite(samples[i].y) || !std::isfinite(samples[i].t)) {
            throw std::invalid_argument("non-finite sample at index " + std::to_string(i));
        }
        if (i > 0 && !(samples[i].t > samples[i - 1].t)) {
            throw std::invalid_argument("time not strictly increasing at index " + std::to_string(i));
        }
    }
}

TrajectorySet load_trajectories(const std::filesystem::path& path, std::optional<double> fps)
{
    std::ifstream in(path);
    if (!in.good()) {
        throw LoadError(LoadErrorKind::Io, 0, "cannot open " + path.string());
    }
    TrajectorySet set;
    set.source_path = path.string();
    {
        std::optional<int> grid;
        auto side = sidecar_fps(path, grid);
        set.grid_size = grid;
        if (!fps) fps = side;
    }
    if (!fps || !(*fps > 0.0) || !std::isfinite(*fps)) {
        throw LoadError(LoadErrorKind::MissingFps, 0, "no positive fps given by flag or sidecar for " + path.string());
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw LoadError(LoadErrorKind::MissingColumn, 1, "missing header");
    }
    const auto header = split_csv(line);
    auto column = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw LoadError(LoadErrorKind::MissingColumn, 1, "header lacks '" + std::string(name) + "'");
    };
    const std::size_t c_id = column("point_id");
    const std::size_t c_frame = column("frame");
    const std::size_t c_x = column("x");
    const std::size_t c_y = column("y");
    const std::size_t width = std::max({c_id, c_frame, c_x, c_y}) + 1;

    struct Row {
        long frame;
        double x, y;
        std::size_t line;
    };
    std::map<int, std::vector<Row>> by_point;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() < width) {
            throw LoadError(LoadErrorKind::MalformedRow, row, "expected " + std::to_string(header.size()) + " fields");
        }
        int id = 0;
        long frame = 0;
        double x = 0.0;
        double y = 0.0;
        if (!parse_number(cells[c_id], id) || !parse_number(cells[c_frame], frame)) {
            throw LoadError(LoadErrorKind::MalformedRow, row, "point_id and frame must be integers");
        }
        const bool okx = parse_number(cells[c_x], x);
        const bool oky = parse_number(cells[c_y], y);
        if (!okx || !oky) {
            const auto bad = !okx ? cells[c_x] : cells[c_y];
            if (bad == "nan" || bad == "NaN" || bad == "inf" || bad == "-inf") {
                throw LoadError(LoadErrorKind::NonFiniteCoordinate, row, "coordinate '" + std::string(bad) + "'");
            }
            throw LoadError(LoadErrorKind::MalformedRow, row, "coordinate '" + std::string(bad) + "' is not a number");
        }
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw LoadError(LoadErrorKind::NonFiniteCoordinate, row, "coordinates must be finite");
        }
        auto& rows = by_point[id];
        if (!rows.empty()) {
            if (frame == rows.back().frame) {
                throw LoadError(LoadErrorKind::DuplicateFrame, row,
                    "point " + std::to_string(id) + " frame " + std::to_string(frame) + " repeats row "
                        + std::to_string(rows.back().line));
            }
            if (frame < rows.back().frame) {
                const bool dup = std::any_of(rows.begin(), rows.end(), [&](const Row& r) { return r.frame == frame; });
                throw LoadError(dup ? LoadErrorKind::DuplicateFrame : LoadErrorKind::NonMonotonicFrame, row,
                    "point " + std::to_string(id) + " frame " + std::to_string(frame) + " after frame "
                        + std::to_string(rows.back().frame));
            }
        }
        rows.push_back(Row{frame, x, y, row});
    }

    for (const auto& [id, rows] : by_point) {
        if (rows.size() < 2) {
            throw LoadError(LoadErrorKind::TooFewSamples, rows.front().line,
                "point " + std::to_string(id) + " has a single sample");
        }
        Trajectory traj;
        traj.point_id = id;
        traj.fps = *fps;
        traj.samples.reserve(rows.size());
        for (const auto& r : rows) {
            traj.samples.push_back(Sample{static_cast<double>(r.frame) / *fps, r.x, r.y});
        }
        set.trajectories.push_back(std::move(traj));
    }
    return set;
}

void write_trajectories_csv(const std::filesystem::path& path, const TrajectorySet& set)
{
    std::ofstream out(path);
    if (!out.good()) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "point_id,frame,x,y\n";
    char buf[64];
    auto num = [&](double v) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, p);
    };
    for (const auto& traj : set.trajectories) {
        for (const auto& s : traj.samples) {
            const long frame = std::lround(s.t * traj.fps);
            out << traj.point_id << ',' << frame << ',' << num(s.x) << ',' << num(s.y) << '\n';
        }
    }
}

double motion_variance(const Trajectory& traj)
{
    return population_variance(traj.axis(Axis::X)) + population_variance(traj.axis(Axis::Y));
}

TrajectorySet select_top_k_by_variance(const TrajectorySet& set, std::size_t k)
{
    if (k == 0) {
        throw std::invalid_argument("select_top_k_by_variance: k must be >= 1");
    }
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(set.trajectories.size());
    for (std::size_t i = 0; i < set.trajectories.size(); ++i) {
        scored.emplace_back(motion_variance(set.trajectories[i]), i);
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return set.trajectories[a.second].point_id < set.trajectories[b.second].point_id;
    });
    TrajectorySet out;
    out.source_path = set.source_path;
    out.grid_size = set.grid_size;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) {
        out.trajectories.push_back(set.trajectories[scored[i].second]);
    }
    return out;
}

SplitTrajectory temporal_split(const Trajectory& traj)
{
    const std::size_t n = traj.size();
    if (n < 10) {
        throw std::invalid_argument("temporal_split: need at least 10 samples, got " + std::to_string(n));
    }
    const std::size_t train_end = (8 * n) / 10;
    const std::size_t val_end = (9 * n) / 10;
    SplitTrajectory out;
    out.train = segment(traj, 0, train_end);
    out.validation = segment(traj, train_end, val_end);
    out.test = segment(traj, val_end, n);
    out.t_train_end = traj.samples[train_end - 1].t;
    out.t_val_end = traj.samples[val_end - 1].t;
    return out;
}

} // namespace resr
