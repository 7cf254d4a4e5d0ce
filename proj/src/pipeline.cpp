// SPDX-License-Identifier: MIT

#include "resr/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "resr/parallel.hpp"

namespace resr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Series axis_series(const Trajectory& traj, Axis axis) { return Series{traj.times(), traj.axis(axis)}; }

// Unclamped MSE for reporting: +inf when any prediction is non-finite.
double report_mse(const Expr& e, const Series& s)
{
    if (s.size() == 0) return kNaN;
    Evaluator ev;
    std::vector<double> pred(s.size());
    ev.evaluate(e, s.t, false, pred);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = pred[i] - s.y[i];
        sum += d * d;
    }
    return std::isfinite(sum) ? sum / static_cast<double>(s.size()) : kInf;
}

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

AxisDiscovery discover_axis(Axis axis, const SplitTrajectory& split, const EquationBank& bank,
    const DiscoveryConfig& config, const std::optional<Expr>& truth)
{
    AxisDiscovery out;
    out.axis = axis;
    const Series train = axis_series(split.train, axis);
    const Series val = axis_series(split.validation, axis);
    const Series test = axis_series(split.test, axis);

    RetrievalQuery query{train.t, train.y, config.search.top_k_retrieval, config.dtw_band};
    out.retrieved = retrieve_top_k(query, bank, config.search.workers).ranked;
    std::vector<Expr> seeds;
    for (const auto& hit : out.retrieved) seeds.push_back(bank.entries[hit.entry_index].expr);

    auto evolved = evolve(config.search, train, val, seeds, axis == Axis::X ? 0 : 1);
    out.log = std::move(evolved.log);
    out.warnings = std::move(evolved.warnings);
    out.front = evolved.front.front();

    if (out.front.empty()) {
        out.divergent = true;
        out.expr = Expr::constant(mean_of(train.y));
    } else {
        // front is ordered by complexity, so the first member within the tie band is the simplest
        std::vector<double> scores;
        for (const auto& c : out.front) scores.push_back(val.size() > 0 ? report_mse(c.expr, val) : c.mse);
        double best = kInf;
        for (double s : scores) best = std::min(best, s);
        std::size_t chosen = 0;
        if (std::isfinite(best)) {
            const double band = best * (1.0 + config.tie_relative) + config.tie_absolute;
            while (!(scores[chosen] <= band)) ++chosen;
        } else {
            // nothing is finite off protected ops: fall back to the lowest train MSE
            for (std::size_t i = 1; i < out.front.size(); ++i)
                if (out.front[i].mse < out.front[chosen].mse) chosen = i;
            out.divergent = true;
        }
        out.expr = simplify(out.front[chosen].expr);
    }
    out.complexity = complexity(out.expr);
    out.train_mse = series_mse(out.expr, train);
    out.validation_mse = val.size() > 0 ? report_mse(out.expr, val) : kNaN;
    out.test_mse = report_mse(out.expr, test);
    if (truth) {
        out.ted_similarity = commutative_ted_similarity(out.expr, *truth);
        out.ordered_ted_similarity = normalized_ted_similarity(out.expr, *truth);
        out.truth_depends_on_t = truth->has_variable();
    }
    return out;
}

double observed_spacing(const SplitTrajectory& split)
{
    const Trajectory* parts[] = {&split.train, &split.validation, &split.test};
    std::vector<double> t;
    for (const auto* p : parts)
        for (const auto& s : p->samples) t.push_back(s.t);
    if (split.train.fps > 0.0) return 1.0 / split.train.fps;
    if (t.size() < 2) return 1.0;
    return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t point)
{
    if (point == 0) return seed;
    std::uint64_t x = seed ^ (0xD1B54A32D192ED03ull * (point + 1));
    x = (x ^ (x >> 31)) * 0x7FB5D329728EA185ull;
    return x ^ (x >> 27);
}

} // namespace

std::optional<double> DiscoveryResult::ted_similarity() const
{
    if (!x.ted_similarity || !y.ted_similarity) return std::nullopt;
    if (x.truth_depends_on_t == y.truth_depends_on_t) return (*x.ted_similarity + *y.ted_similarity) / 2.0;
    return x.truth_depends_on_t ? *x.ted_similarity : *y.ted_similarity;
}

DiscoveryResult discover(const SplitTrajectory& split, const EquationBank& bank, const DiscoveryConfig& config,
    const std::optional<GroundTruthPair>& truth, std::string id)
{
    config.search.validate();
    DiscoveryResult r;
    r.id = std::move(id);
    r.config = config;
    r.x = discover_axis(Axis::X, split, bank, config, truth ? std::optional<Expr>(truth->x) : std::nullopt);
    r.y = discover_axis(Axis::Y, split, bank, config, truth ? std::optional<Expr>(truth->y) : std::nullopt);
    r.test_mse = (r.x.test_mse + r.y.test_mse) / 2.0;
    r.divergent = r.x.divergent || r.y.divergent;
    const Trajectory& last = !split.test.samples.empty() ? split.test
        : !split.validation.samples.empty()              ? split.validation
                                                         : split.train;
    r.t_last = last.samples.back().t;
    r.dt = observed_spacing(split);
    return r;
}

ForecastError::ForecastError(double t, const std::string& detail)
    : std::runtime_error(detail), t_(t)
{
}

Forecast forecast(const Expr& fx, const Expr& fy, double t_last, std::size_t horizon, double dt, std::string source_id)
{
    if (horizon == 0) throw std::invalid_argument("forecast: horizon must be >= 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("forecast: dt must be positive");
    Forecast fc;
    fc.horizon = horizon;
    fc.source_id = std::move(source_id);
    std::vector<double> t(horizon);
    for (std::size_t i = 0; i < horizon; ++i) t[i] = t_last + static_cast<double>(i + 1) * dt;
    Evaluator ev;
    std::vector<double> xs(horizon), ys(horizon);
    ev.evaluate(fx, t, false, xs);
    ev.evaluate(fy, t, false, ys);
    for (std::size_t i = 0; i < horizon; ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            std::ostringstream msg;
            msg << "forecast is not finite at t = " << format_number(t[i]) << " (" << (std::isfinite(xs[i]) ? "y" : "x")
                << " axis)";
            throw ForecastError(t[i], msg.str());
        }
        fc.samples.push_back(Sample{t[i], xs[i], ys[i]});
    }
    return fc;
}

Forecast forecast(const DiscoveryResult& result, std::size_t horizon, std::optional<double> dt)
{
    return forecast(result.x.expr, result.y.expr, result.t_last, horizon, dt.value_or(result.dt), result.id);
}

std::vector<ExportedPoint> resample_for_export(const Forecast& fc, const ExportOptions& options)
{
    if (fc.samples.empty()) throw std::invalid_argument("export: empty forecast");
    if (!(options.points_per_second > 0.0)) throw std::invalid_argument("export: points_per_second must be positive");
    if (!(options.source.width > 0 && options.source.height > 0 && options.target.width > 0 && options.target.height > 0))
        throw std::invalid_argument("export: resolutions must be positive");
    const auto& s = fc.samples;
    double duration = 0.0;
    if (options.duration) {
        duration = *options.duration;
    } else {
        const double spacing = s.size() > 1 ? (s.back().t - s.front().t) / static_cast<double>(s.size() - 1) : 0.0;
        duration = spacing * static_cast<double>(s.size());
    }
    if (!(duration > 0.0)) throw std::invalid_argument("export: duration must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration * options.points_per_second));
    const double sx = options.target.width / options.source.width;
    const double sy = options.target.height / options.source.height;
    std::vector<ExportedPoint> out;
    out.reserve(n);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double want = s.front().t + static_cast<double>(j) / options.points_per_second;
        while (k + 1 < s.size() && std::fabs(s[k + 1].t - want) < std::fabs(s[k].t - want)) ++k;
        out.push_back(ExportedPoint{s[k].t, s[k].x * sx, s[k].y * sy});
    }
    return out;
}

void export_trajectory(const Forecast& fc, const ExportOptions& options, const std::filesystem::path& path)
{
    const auto pts = resample_for_export(fc, options);
    auto out = open_out(path);
    if (options.format == ExportFormat::Csv) {
        out << "t,x,y\n";
        for (const auto& p : pts) out << format_number(p.t) << ',' << format_number(p.x) << ',' << format_number(p.y) << '\n';
    } else {
        // header fields through the JSON library, then one point per line
        const auto str = [](const auto& v) { return nlohmann::json(v).dump(); };
        const auto res = [&](const Resolution& r) { return "[" + format_number(r.width) + ", " + format_number(r.height) + "]"; };
        out << "{\n  \"source\": " << str(fc.source_id) << ",\n  \"points_per_second\": " << format_number(options.points_per_second)
            << ",\n  \"resolution\": " << res(options.target) << ",\n  \"source_resolution\": " << res(options.source)
            << ",\n  \"points\": [";
        for (std::size_t i = 0; i < pts.size(); ++i)
            out << (i ? ",\n    [" : "\n    [") << format_number(pts[i].x) << ", " << format_number(pts[i].y) << ']';
        out << (pts.empty() ? "],\n  \"t\": [" : "\n  ],\n  \"t\": [");
        for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? ", " : "") << format_number(pts[i].t);
        out << "]\n}\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::map<int, GroundTruthPair> read_ground_truth(const std::filesystem::path& csv)
{
    std::map<int, GroundTruthPair> out;
    for (const auto& side : {std::filesystem::path(csv.string() + ".json"), std::filesystem::path(csv).replace_extension(".json")}) {
        std::ifstream in(side);
        if (!in) continue;
        const auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("ground_truth")) continue;
        for (const auto& [key, value] : doc["ground_truth"].items())
            out.emplace(std::stoi(key), GroundTruthPair{parse(value.at("x").get<std::string>()), parse(value.at("y").get<std::string>())});
        break;
    }
    return out;
}

std::vector<DiscoveryResult> discover_set(const TrajectorySet& set, const EquationBank& bank,
    const DiscoveryConfig& config, std::size_t top_k, const std::map<int, GroundTruthPair>& truth)
{
    std::vector<DiscoveryResult> out;
    for (const auto& traj : select_top_k_by_variance(set, top_k).trajectories) {
        const auto it = truth.find(traj.point_id);
        out.push_back(discover(temporal_split(traj), bank, config,
            it == truth.end() ? std::nullopt : std::optional<GroundTruthPair>(it->second),
            "point_" + std::to_string(traj.point_id)));
    }
    return out;
}

void BenchmarkConfig::validate() const
{
    if (systems.empty() || seeds.empty() || alphas.empty()) throw std::invalid_argument("benchmark: systems, seeds and alphas must be non-empty");
    if (points_per_seed == 0 || top_k_trajectories == 0) throw std::invalid_argument("benchmark: trajectory counts must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("benchmark: noise_sigma must be >= 0");
    for (double a : alphas) {
        SearchConfig s = discovery.search;
        s.alpha = a;
        s.validate();
    }
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config, const EquationBank& bank)
{
    config.validate();
    struct Job {
        SystemKind system;
        std::uint64_t seed;
        double alpha;
    };
    std::vector<Job> jobs;
    for (SystemKind sys : config.systems)
        for (double a : config.alphas)
            for (std::uint64_t seed : config.seeds) jobs.push_back({sys, seed, a});

    const std::size_t cell_workers = resolve_workers(config.workers);
    std::vector<std::vector<BenchmarkRun>> per_job(jobs.size());
    parallel_for(jobs.size(), cell_workers, [&](std::size_t j) {
        const Job& job = jobs[j];
        auto fail_all = [&](const std::string& what) {
            BenchmarkRun run{job.system, job.seed, job.alpha, 0, std::nullopt, {}, {}, what};
            per_job[j].push_back(std::move(run));
        };
        try {
            SystemSpec spec;
            spec.kind = job.system;
            spec.duration = config.duration;
            spec.sample_rate = config.sample_rate;
            spec.initial_state_jitter = config.initial_state_jitter;
            TrajectorySet set;
            std::map<int, GroundTruthPair> truth;
            for (std::size_t p = 0; p < config.points_per_seed; ++p) {
                auto gt = generate(spec, point_seed(job.seed, p));
                gt.trajectory.point_id = static_cast<int>(p);
                if (config.noise_sigma > 0.0)
                    gt.trajectory = add_noise(gt.trajectory, config.noise_sigma, point_seed(job.seed, p) ^ 0x5bd1e995ull);
                if (gt.analytic_x && gt.analytic_y) truth.emplace(static_cast<int>(p), GroundTruthPair{*gt.analytic_x, *gt.analytic_y});
                set.trajectories.push_back(std::move(gt.trajectory));
            }
            DiscoveryConfig dc = config.discovery;
            dc.search.alpha = job.alpha;
            dc.search.seed = job.seed;
            if (cell_workers > 1) dc.search.workers = 1;
            for (const auto& traj : select_top_k_by_variance(set, config.top_k_trajectories).trajectories) {
                BenchmarkRun run{job.system, job.seed, job.alpha, traj.point_id, std::nullopt, {}, {}, {}};
                const auto it = truth.find(traj.point_id);
                std::optional<GroundTruthPair> tp;
                if (it != truth.end()) {
                    tp = it->second;
                    run.truth_x = to_string(tp->x);
                    run.truth_y = to_string(tp->y);
                }
                try {
                    run.result = discover(temporal_split(traj), bank, dc, tp,
                        std::string(system_name(job.system)) + "/" + std::to_string(job.seed) + "/" + std::to_string(traj.point_id));
                } catch (const std::exception& e) {
                    run.error = e.what();
                }
                per_job[j].push_back(std::move(run));
            }
        } catch (const std::exception& e) {
            fail_all(e.what());
        }
    });

    BenchmarkReport report;
    for (auto& runs : per_job)
        for (auto& r : runs) report.runs.push_back(std::move(r));

    auto ok = [](const BenchmarkRun& r) { return r.result && !r.result->divergent && r.error.empty(); };
    for (SystemKind sys : config.systems)
        for (double a : config.alphas) {
            BenchmarkCell cell{sys, a, 0, 0, 0, 0, 0, 0};
            std::vector<double> teds, mses;
            for (const auto& r : report.runs) {
                if (r.system != sys || r.alpha != a) continue;
                ++cell.runs;
                if (!ok(r)) {
                    ++cell.failed;
                    continue;
                }
                if (auto t = r.result->ted_similarity()) teds.push_back(*t);
                mses.push_back(r.result->test_mse);
            }
            cell.ted_mean = teds.empty() ? kNaN : mean_of(teds);
            cell.ted_std = teds.empty() ? kNaN : sample_std(teds);
            cell.mse_mean = mses.empty() ? kNaN : mean_of(mses);
            cell.mse_std = mses.empty() ? kNaN : sample_std(mses);
            report.cells.push_back(cell);
        }

    auto add_curve = [&](const std::string& label, double a, auto&& include) {
        std::vector<double> train(config.discovery.search.n_iterations, 0.0), val(train.size(), 0.0);
        std::size_t n = 0;
        for (const auto& r : report.runs) {
            if (r.alpha != a || !include(r) || !ok(r)) continue;
            for (std::size_t i = 0; i < train.size(); ++i) {
                train[i] += (r.result->x.log[i].best_train_mse + r.result->y.log[i].best_train_mse) / 2.0;
                val[i] += (r.result->x.log[i].best_val_mse + r.result->y.log[i].best_val_mse) / 2.0;
            }
            ++n;
        }
        if (n == 0) return;
        for (std::size_t i = 0; i < train.size(); ++i)
            report.curves.push_back(ConvergencePoint{label, a, i + 1, train[i] / static_cast<double>(n), val[i] / static_cast<double>(n)});
    };
    for (double a : config.alphas) {
        for (SystemKind sys : config.systems)
            add_curve(std::string(system_name(sys)), a, [&](const BenchmarkRun& r) { return r.system == sys; });
        add_curve("all", a, [](const BenchmarkRun&) { return true; });
    }
    return report;
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::filesystem::path> write_benchmark_report(const BenchmarkReport& report, const std::filesystem::path& dir)
{
    std::vector<std::filesystem::path> written;
    auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };

    {
        const auto path = dir / "runs.csv";
        auto out = open_out(path);
        out << "system,seed,alpha,point_id,status,ted,ted_x,ted_y,test_mse,val_mse_x,val_mse_y,complexity_x,complexity_y,"
               "expr_x,expr_y,truth_x,truth_y,error\n";
        for (const auto& r : report.runs) {
            out << system_name(r.system) << ',' << r.seed << ',' << format_number(r.alpha) << ',' << r.point_id << ',';
            if (!r.result) {
                out << "error,,,,,,,,,,," << csv_field(r.truth_x) << ',' << csv_field(r.truth_y) << ',' << csv_field(r.error) << '\n';
                continue;
            }
            const auto& d = *r.result;
            out << (d.divergent ? "divergent" : "ok") << ',' << num(d.ted_similarity()) << ',' << num(d.x.ted_similarity) << ','
                << num(d.y.ted_similarity) << ',' << format_number(d.test_mse) << ',' << format_number(d.x.validation_mse) << ','
                << format_number(d.y.validation_mse) << ',' << d.x.complexity << ',' << d.y.complexity << ','
                << csv_field(to_string(d.x.expr)) << ',' << csv_field(to_string(d.y.expr)) << ',' << csv_field(r.truth_x) << ','
                << csv_field(r.truth_y) << ",\n";
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "aggregate.csv";
        auto out = open_out(path);
        out << "system,alpha,runs,failed,ted_mean,ted_std,mse_mean,mse_std\n";
        for (const auto& c : report.cells)
            out << system_name(c.system) << ',' << format_number(c.alpha) << ',' << c.runs << ',' << c.failed << ','
                << format_number(c.ted_mean) << ',' << format_number(c.ted_std) << ',' << format_number(c.mse_mean) << ','
                << format_number(c.mse_std) << '\n';
        written.push_back(path);
    }
    {
        // one row per alpha, "mean ± std" per system and metric
        const auto path = dir / "table.csv";
        auto out = open_out(path);
        std::vector<SystemKind> systems;
        std::vector<double> alphas;
        for (const auto& c : report.cells) {
            if (std::find(systems.begin(), systems.end(), c.system) == systems.end()) systems.push_back(c.system);
            if (std::find(alphas.begin(), alphas.end(), c.alpha) == alphas.end()) alphas.push_back(c.alpha);
        }
        out << "alpha";
        for (SystemKind s : systems) out << ',' << system_name(s) << "_ted," << system_name(s) << "_mse";
        out << '\n';
        auto cell_text = [](double m, double s) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.2f", m, s);
            return std::string(buf);
        };
        for (double a : alphas) {
            out << format_number(a);
            for (SystemKind s : systems) {
                const auto it = std::find_if(report.cells.begin(), report.cells.end(),
                    [&](const BenchmarkCell& c) { return c.system == s && c.alpha == a; });
                out << ',' << cell_text(it->ted_mean, it->ted_std) << ',' << cell_text(it->mse_mean, it->mse_std);
            }
            out << '\n';
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "convergence.csv";
        auto out = open_out(path);
        out << "system,seed,alpha,point_id,iteration,best_train_mse,best_val_mse,best_expr_x,best_expr_y\n";
        for (const auto& r : report.runs) {
            if (!r.result) continue;
            const auto& lx = r.result->x.log;
            const auto& ly = r.result->y.log;
            for (std::size_t i = 0; i < lx.size(); ++i)
                out << system_name(r.system) << ',' << r.seed << ',' << format_number(r.alpha) << ',' << r.point_id << ','
                    << lx[i].iteration << ',' << format_number((lx[i].best_train_mse + ly[i].best_train_mse) / 2.0) << ','
                    << format_number((lx[i].best_val_mse + ly[i].best_val_mse) / 2.0) << ',' << csv_field(lx[i].best_expr) << ','
                    << csv_field(ly[i].best_expr) << '\n';
        }
        written.push_back(path);
    }
    {
        const auto path = dir / "curves.csv";
        auto out = open_out(path);
        out << "system,alpha,iteration,mean_best_train_mse,mean_best_val_mse\n";
        for (const auto& p : report.curves)
            out << p.system << ',' << format_number(p.alpha) << ',' << p.iteration << ',' << format_number(p.mean_best_train_mse)
                << ',' << format_number(p.mean_best_val_mse) << '\n';
        written.push_back(path);
    }
    return written;
}

void write_convergence_csv(const ConvergenceLog& log, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "iteration,best_train_mse,best_val_mse,best_expr\n";
    for (const auto& r : log)
        out << r.iteration << ',' << format_number(r.best_train_mse) << ',' << format_number(r.best_val_mse) << ','
            << csv_field(r.best_expr) << '\n';
}

void write_front_tsv(const std::vector<Candidate>& front, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "complexity\tmse\texpression\n";
    for (const auto& c : front) out << c.complexity << '\t' << format_number(c.mse) << '\t' << to_string(c.expr) << '\n';
}

} // namespace resr
