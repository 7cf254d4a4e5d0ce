// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "resr/trajectory.hpp"

using namespace resr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("resr_ingest_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& body) const
    {
        std::ofstream(path / name) << body;
        return path / name;
    }
};

LoadError load_failure(const fs::path& p, std::optional<double> fps = 10.0)
{
    try {
        load_trajectories(p, fps);
    } catch (const LoadError& e) {
        return e;
    }
    FAIL("expected a load error for " << p);
    return LoadError(LoadErrorKind::Io, 0, "");
}

Trajectory line_traj(int id, std::vector<double> xs, std::vector<double> ys)
{
    Trajectory tr;
    tr.point_id = id;
    tr.fps = 1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) tr.samples.push_back({double(i), xs[i], ys[i]});
    return tr;
}

double direct_variance(const std::vector<double>& v)
{
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / double(v.size());
}

} // namespace

TEST_SUITE("ingestion")
{
    TEST_CASE("frames convert to seconds and points are grouped")
    {
        TempDir dir;
        const auto p = dir.write("two.csv", "point_id,frame,x,y\n1,0,1,2\n0,0,5,5\n1,1,2,3\n0,1,6,6\n1,2,3,4\n0,2,7,7\n");
        const auto set = load_trajectories(p, 10.0);
        REQUIRE(set.trajectories.size() == 2);
        CHECK(set.trajectories[0].point_id == 0);
        CHECK(set.trajectories[1].point_id == 1);
        for (const auto& tr : set.trajectories) {
            REQUIRE(tr.size() == 3);
            CHECK(tr.samples[0].t == doctest::Approx(0.0));
            CHECK(tr.samples[1].t == doctest::Approx(0.1));
            CHECK(tr.samples[2].t == doctest::Approx(0.2));
            CHECK(tr.fps == 10.0);
        }
        CHECK(set.trajectories[1].samples[2].x == 3.0);
    }

    TEST_CASE("fps comes from the sidecar when no flag is given")
    {
        TempDir dir;
        const auto p = dir.write("clip.csv", "point_id,frame,x,y\n0,0,0,0\n0,2,1,1\n");
        dir.write("clip.json", R"({"fps": 4, "grid_size": 10})");
        const auto set = load_trajectories(p);
        CHECK(set.grid_size == 10);
        CHECK(set.trajectories[0].samples[1].t == doctest::Approx(0.5));
        CHECK(load_trajectories(p, 2.0).trajectories[0].samples[1].t == doctest::Approx(1.0));

        const auto q = dir.write("bare.csv", "point_id,frame,x,y\n0,0,0,0\n0,1,1,1\n");
        CHECK(load_failure(q, std::nullopt).kind() == LoadErrorKind::MissingFps);
    }

    TEST_CASE("header columns may appear in any order")
    {
        TempDir dir;
        const auto p = dir.write("order.csv", "x,y,frame,point_id\n1,2,0,3\n4,5,1,3\n");
        const auto set = load_trajectories(p, 1.0);
        REQUIRE(set.trajectories.size() == 1);
        CHECK(set.trajectories[0].point_id == 3);
        CHECK(set.trajectories[0].samples[1] == Sample{1.0, 4.0, 5.0});
    }

    TEST_CASE("empty file with a valid header is an empty set")
    {
        TempDir dir;
        CHECK(load_trajectories(dir.write("empty.csv", "point_id,frame,x,y\n"), 10.0).trajectories.empty());
    }

    TEST_CASE("load errors are distinct and name the row")
    {
        TempDir dir;
        auto e = load_failure(dir.write("dup.csv", "point_id,frame,x,y\n0,0,1,1\n0,1,2,2\n0,1,3,3\n"));
        CHECK(e.kind() == LoadErrorKind::DuplicateFrame);
        CHECK(e.row() == 4);
        CHECK(std::string(e.what()).find("row 4") != std::string::npos);

        e = load_failure(dir.write("back.csv", "point_id,frame,x,y\n0,0,1,1\n0,2,2,2\n0,1,3,3\n"));
        CHECK(e.kind() == LoadErrorKind::NonMonotonicFrame);
        CHECK(e.row() == 4);

        e = load_failure(dir.write("nan.csv", "point_id,frame,x,y\n0,0,1,1\n0,1,nan,2\n"));
        CHECK(e.kind() == LoadErrorKind::NonFiniteCoordinate);
        CHECK(e.row() == 3);

        e = load_failure(dir.write("cols.csv", "point_id,frame,x\n0,0,1\n"));
        CHECK(e.kind() == LoadErrorKind::MissingColumn);
        CHECK(e.row() == 1);

        e = load_failure(dir.write("short.csv", "point_id,frame,x,y\n0,0,1,1\n0,1,2\n"));
        CHECK(e.kind() == LoadErrorKind::MalformedRow);
        CHECK(e.row() == 3);

        e = load_failure(dir.write("alone.csv", "point_id,frame,x,y\n0,0,1,1\n"));
        CHECK(e.kind() == LoadErrorKind::TooFewSamples);

        CHECK(load_failure(dir.path / "missing.csv").kind() == LoadErrorKind::Io);
    }

    TEST_CASE("csv writer round-trips through the loader")
    {
        TempDir dir;
        TrajectorySet set;
        set.trajectories.push_back(line_traj(2, {0.1, 0.25, 1e-3}, {3.0, -4.5, 1e6}));
        set.trajectories[0].fps = 10.0;
        for (auto& s : set.trajectories[0].samples) s.t /= 10.0;
        write_trajectories_csv(dir.path / "rt.csv", set);
        const auto back = load_trajectories(dir.path / "rt.csv", 10.0);
        REQUIRE(back.trajectories.size() == 1);
        CHECK(back.trajectories[0] == set.trajectories[0]);
    }

    TEST_CASE("top-k selection by variance")
    {
        TrajectorySet set;
        set.trajectories.push_back(line_traj(0, {1, 1, 1}, {2, 2, 2}));
        set.trajectories.push_back(line_traj(1, {0, 1, 2}, {0, 0, 0}));
        CHECK(select_top_k_by_variance(set, 1).trajectories[0].point_id == 1);
        CHECK(select_top_k_by_variance(set, 2).trajectories.size() == 2);
        CHECK(select_top_k_by_variance(set, 7).trajectories.size() == 2);
        CHECK_THROWS_AS(select_top_k_by_variance(set, 0), std::invalid_argument);

        // scores 0..4 built so Var(x) + Var(y) = score, shuffled ids
        TrajectorySet five;
        const int ids[] = {3, 0, 4, 1, 2};
        for (int score = 0; score < 5; ++score) {
            const double a = std::sqrt(double(score)); // population variance of {-a, a} is a^2
            five.trajectories.push_back(line_traj(ids[score], {-a, a}, {0, 0}));
        }
        for (const auto& tr : five.trajectories) {
            const double oracle = direct_variance(tr.axis(Axis::X)) + direct_variance(tr.axis(Axis::Y));
            CHECK(motion_variance(tr) == doctest::Approx(oracle));
        }
        const auto top = select_top_k_by_variance(five, 2);
        REQUIRE(top.trajectories.size() == 2);
        CHECK(motion_variance(top.trajectories[0]) == doctest::Approx(4.0));
        CHECK(motion_variance(top.trajectories[1]) == doctest::Approx(3.0));
    }

    TEST_CASE("ties break on lower point id, and the order is stable")
    {
        TrajectorySet set;
        for (int id : {5, 2, 9, 1}) set.trajectories.push_back(line_traj(id, {0, 1}, {0, 1}));
        const auto top = select_top_k_by_variance(set, 3);
        CHECK(top.trajectories[0].point_id == 1);
        CHECK(top.trajectories[1].point_id == 2);
        CHECK(top.trajectories[2].point_id == 5);
        CHECK(select_top_k_by_variance(set, 3).trajectories == top.trajectories);
    }

    TEST_CASE("variance is translation invariant and scales quadratically")
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-50.0, 50.0);
        for (int trial = 0; trial < 50; ++trial) {
            Trajectory tr;
            for (int i = 0; i < 30; ++i) tr.samples.push_back({double(i), u(rng), u(rng)});
            const double base = motion_variance(tr);
            Trajectory shifted = tr;
            Trajectory scaled = tr;
            const double dx = u(rng), dy = u(rng), s = 0.5 + std::abs(u(rng)) / 10.0;
            for (auto& p : shifted.samples) {
                p.x += dx;
                p.y += dy;
            }
            for (auto& p : scaled.samples) {
                p.x *= s;
                p.y *= s;
            }
            CHECK(motion_variance(shifted) == doctest::Approx(base).epsilon(1e-10));
            CHECK(motion_variance(scaled) == doctest::Approx(s * s * base).epsilon(1e-10));
        }
    }

    TEST_CASE("temporal split sizes follow floor boundaries")
    {
        auto make = [](std::size_t n) {
            Trajectory tr;
            for (std::size_t i = 0; i < n; ++i) tr.samples.push_back({double(i), double(i), -double(i)});
            return tr;
        };
        auto s = temporal_split(make(100));
        CHECK(s.train.size() == 80);
        CHECK(s.validation.size() == 10);
        CHECK(s.test.size() == 10);
        CHECK(s.t_train_end == 79.0);
        CHECK(s.t_val_end == 89.0);
        s = temporal_split(make(10));
        CHECK(s.train.size() == 8);
        CHECK(s.validation.size() == 1);
        CHECK(s.test.size() == 1);
        CHECK_THROWS_AS(temporal_split(make(9)), std::invalid_argument);

        for (std::size_t n = 10; n < 200; ++n) {
            const auto tr = make(n);
            const auto sp = temporal_split(tr);
            CHECK(sp.train.size() == (8 * n) / 10);
            CHECK(sp.train.size() + sp.validation.size() == (9 * n) / 10);
            std::vector<Sample> joined = sp.train.samples;
            joined.insert(joined.end(), sp.validation.samples.begin(), sp.validation.samples.end());
            joined.insert(joined.end(), sp.test.samples.begin(), sp.test.samples.end());
            CHECK(joined == tr.samples);
        }
    }

    TEST_CASE("trajectory validation")
    {
        auto tr = line_traj(0, {0, 1, 2}, {0, 1, 2});
        CHECK_NOTHROW(tr.validate());
        CHECK_THROWS_AS(tr.validate(4), std::invalid_argument);
        tr.samples[2].t = 1.0;
        CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
        tr = line_traj(0, {0, INFINITY}, {0, 1});
        CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
    }
}
