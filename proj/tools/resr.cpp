// SPDX-License-Identifier: MIT
//
// resr: command-line front end. Exit codes: 0 ok, 1 usage or input error,
// 2 divergent search.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "resr/config.hpp"
#include "resr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace resr;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitDivergent = 2;

using ojson = nlohmann::ordered_json;

struct Common {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<std::string> bank;
    std::string out_dir = ".";
    std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "TOML or JSON settings file; flags override it")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "master RNG seed");
    cmd->add_option("--alpha", c.alpha, "share of each population seeded from retrieval, in [0, 1]");
    cmd->add_option("--bank", c.bank, "equation bank TSV (default: the shipped bank)");
    cmd->add_option("--out-dir", c.out_dir, "directory for output files");
    cmd->add_option("--workers", c.workers, "worker threads (0 = all cores)");
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg = c.config ? load_run_config(*c.config) : RunConfig{};
    if (c.seed) cfg.discovery.search.seed = *c.seed;
    if (c.alpha) cfg.discovery.search.alpha = *c.alpha;
    if (c.workers) {
        cfg.discovery.search.workers = *c.workers;
        cfg.bench.workers = *c.workers;
    }
    cfg.bench.discovery = cfg.discovery;
    return cfg;
}

EquationBank open_bank(const Common& c)
{
    auto bank = load_bank(c.bank ? fs::path(*c.bank) : default_bank_path());
    for (const auto& w : bank.warnings) std::cerr << "warning: " << w << '\n';
    return bank;
}

ojson number(double v)
{
    if (std::isfinite(v)) return v;
    return format_number(v); // JSON has no inf/nan
}

ojson axis_json(const AxisDiscovery& a)
{
    ojson j;
    j["expression"] = to_string(a.expr);
    j["complexity"] = a.complexity;
    j["train_mse"] = number(a.train_mse);
    j["validation_mse"] = number(a.validation_mse);
    j["test_mse"] = number(a.test_mse);
    if (a.ted_similarity) j["ted_similarity"] = *a.ted_similarity;
    if (a.ordered_ted_similarity) j["ordered_ted_similarity"] = *a.ordered_ted_similarity;
    j["divergent"] = a.divergent;
    auto& hits = j["retrieved"] = ojson::array();
    for (const auto& h : a.retrieved) hits.push_back({{"id", h.id}, {"distance", number(h.distance)}});
    j["warnings"] = a.warnings;
    return j;
}

ojson result_json(const DiscoveryResult& r)
{
    ojson j;
    j["id"] = r.id;
    j["f_x"] = to_string(r.x.expr);
    j["f_y"] = to_string(r.y.expr);
    j["test_mse"] = number(r.test_mse);
    if (auto t = r.ted_similarity()) j["ted_similarity"] = *t;
    j["divergent"] = r.divergent;
    j["t_last"] = r.t_last;
    j["dt"] = r.dt;
    j["axes"] = {{"x", axis_json(r.x)}, {"y", axis_json(r.y)}};
    return j;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string file_stem_safe(std::string s)
{
    for (char& c : s)
        if (c == '/' || c == ' ') c = '_';
    return s;
}

// ---- gen-data --------------------------------------------------------------

struct GenArgs {
    std::string system = "spring_mass";
    std::size_t points = 1;
    std::optional<double> duration, fps, jitter;
    double noise = 0.0;
    std::string name;
};

int cmd_gen_data(const Common& c, const GenArgs& g)
{
    const RunConfig cfg = resolve(c);
    SystemSpec spec;
    spec.kind = system_from_name(g.system);
    spec.duration = g.duration.value_or(cfg.bench.duration);
    spec.sample_rate = g.fps.value_or(cfg.bench.sample_rate);
    spec.initial_state_jitter = g.jitter.value_or(cfg.bench.initial_state_jitter);
    const std::uint64_t seed = cfg.discovery.search.seed;

    TrajectorySet set;
    ojson truth = ojson::object();
    ojson states = ojson::object();
    for (std::size_t p = 0; p < g.points; ++p) {
        const std::uint64_t s = seed + p * 1000003ull;
        auto gt = generate(spec, s);
        gt.trajectory.point_id = static_cast<int>(p);
        if (g.noise > 0.0) gt.trajectory = add_noise(gt.trajectory, g.noise, s ^ 0x5bd1e995ull);
        if (gt.analytic_x && gt.analytic_y)
            truth[std::to_string(p)] = {{"x", to_string(*gt.analytic_x)}, {"y", to_string(*gt.analytic_y)}};
        ojson params = ojson::object();
        for (const auto& [k, v] : gt.spec.params) params[k] = v;
        states[std::to_string(p)] = params;
        set.trajectories.push_back(std::move(gt.trajectory));
    }
    const std::string stem = g.name.empty() ? g.system + "_seed" + std::to_string(seed) : g.name;
    const fs::path csv = fs::path(c.out_dir) / (stem + ".csv");
    fs::create_directories(csv.parent_path());
    write_trajectories_csv(csv, set);
    ojson side;
    side["fps"] = spec.sample_rate;
    side["system"] = g.system;
    side["seed"] = seed;
    side["noise_sigma"] = g.noise;
    side["initial_states"] = states;
    if (!truth.empty()) side["ground_truth"] = truth;
    write_text(fs::path(csv.string() + ".json"), side.dump(2) + "\n");
    std::cout << csv.string() << '\n';
    return 0;
}

// ---- retrieve --------------------------------------------------------------

struct RetrieveArgs {
    std::string input;
    std::optional<int> point;
    std::string axis = "both";
    std::optional<std::size_t> k;
};

const Trajectory& pick_trajectory(const TrajectorySet& set, std::optional<int> point)
{
    if (set.trajectories.empty()) throw std::invalid_argument("input has no trajectories");
    const int id = point ? *point : select_top_k_by_variance(set, 1).trajectories.front().point_id;
    for (const auto& t : set.trajectories)
        if (t.point_id == id) return t;
    throw std::invalid_argument("no trajectory with point_id " + std::to_string(id));
}

int cmd_retrieve(const Common& c, const RetrieveArgs& a)
{
    const RunConfig cfg = resolve(c);
    const auto bank = open_bank(c);
    const auto set = load_trajectories(a.input, cfg.fps);
    const Trajectory& traj = pick_trajectory(set, a.point);
    const auto split = temporal_split(traj);
    std::vector<Axis> axes;
    if (a.axis == "x" || a.axis == "both") axes.push_back(Axis::X);
    if (a.axis == "y" || a.axis == "both") axes.push_back(Axis::Y);
    if (axes.empty()) throw CLI::ValidationError("--axis", "must be x, y or both");
    std::cout << "axis\trank\tid\tdistance\texpression\n";
    for (Axis ax : axes) {
        RetrievalQuery q{split.train.times(), split.train.axis(ax), a.k.value_or(cfg.discovery.search.top_k_retrieval), cfg.discovery.dtw_band};
        const auto r = retrieve_top_k(q, bank, cfg.discovery.search.workers);
        std::size_t rank = 1;
        for (const auto& h : r.ranked)
            std::cout << (ax == Axis::X ? "x" : "y") << '\t' << rank++ << '\t' << h.id << '\t' << format_number(h.distance) << '\t'
                      << to_string(bank.entries[h.entry_index].expr) << '\n';
    }
    return 0;
}

// ---- discover --------------------------------------------------------------

struct DiscoverArgs {
    std::string input;
    std::optional<double> fps;
    std::optional<std::size_t> top_k;
};

int cmd_discover(const Common& c, const DiscoverArgs& a)
{
    RunConfig cfg = resolve(c);
    if (a.fps) cfg.fps = a.fps;
    if (a.top_k) cfg.top_k_trajectories = *a.top_k;
    const auto bank = open_bank(c);
    const auto set = load_trajectories(a.input, cfg.fps);
    const auto truth = read_ground_truth(a.input);
    const auto results = discover_set(set, bank, cfg.discovery, cfg.top_k_trajectories, truth);

    ojson doc;
    doc["input"] = a.input;
    doc["config"] = ojson::parse(config_to_json(cfg));
    auto& arr = doc["results"] = ojson::array();
    bool divergent = false;
    double mse_sum = 0.0, ted_sum = 0.0;
    std::size_t ted_n = 0;
    const fs::path dir(c.out_dir);
    for (const auto& r : results) {
        arr.push_back(result_json(r));
        divergent = divergent || r.divergent;
        mse_sum += r.test_mse;
        if (auto t = r.ted_similarity()) {
            ted_sum += *t;
            ++ted_n;
        }
        const std::string stem = file_stem_safe(r.id);
        write_convergence_csv(r.x.log, dir / ("convergence_" + stem + "_x.csv"));
        write_convergence_csv(r.y.log, dir / ("convergence_" + stem + "_y.csv"));
        write_front_tsv(r.x.front, dir / ("front_" + stem + "_x.tsv"));
        write_front_tsv(r.y.front, dir / ("front_" + stem + "_y.tsv"));
        std::cout << r.id << "\tx = " << to_string(r.x.expr) << "\ty = " << to_string(r.y.expr) << "\ttest_mse = " << format_number(r.test_mse);
        if (auto t = r.ted_similarity()) std::cout << "\tted = " << format_number(*t);
        if (r.divergent) std::cout << "\tDIVERGENT";
        std::cout << '\n';
    }
    if (!results.empty()) {
        doc["mean_test_mse"] = number(mse_sum / static_cast<double>(results.size()));
        if (ted_n) doc["mean_ted_similarity"] = ted_sum / static_cast<double>(ted_n);
    }
    write_text(dir / "discovery.json", doc.dump(2) + "\n");
    return divergent ? kExitDivergent : 0;
}

// ---- forecast --------------------------------------------------------------

struct ForecastArgs {
    std::string result;
    std::optional<std::string> id;
    std::optional<std::size_t> horizon;
    std::optional<double> duration, dt;
};

int cmd_forecast(const Common& c, const ForecastArgs& a)
{
    const RunConfig cfg = resolve(c);
    std::ifstream in(a.result);
    if (!in) throw std::invalid_argument("cannot read " + a.result);
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("results")) throw std::invalid_argument(a.result + " is not a discovery result");
    const nlohmann::json* chosen = nullptr;
    for (const auto& r : doc["results"])
        if (!a.id || r.at("id").get<std::string>() == *a.id) {
            chosen = &r;
            break;
        }
    if (!chosen) throw std::invalid_argument("no result " + a.id.value_or("") + " in " + a.result);

    const double dt = a.dt ? *a.dt : cfg.forecast_dt ? *cfg.forecast_dt : chosen->at("dt").get<double>();
    std::size_t horizon = 0;
    if (a.horizon) {
        horizon = *a.horizon;
    } else if (!a.duration && cfg.forecast_horizon) {
        horizon = *cfg.forecast_horizon;
    } else {
        horizon = static_cast<std::size_t>(std::llround(a.duration.value_or(cfg.forecast_duration) / dt));
    }
    const auto fc = forecast(parse(chosen->at("f_x").get<std::string>()), parse(chosen->at("f_y").get<std::string>()),
        chosen->at("t_last").get<double>(), horizon, dt, chosen->at("id").get<std::string>());
    const fs::path path = fs::path(c.out_dir) / ("forecast_" + file_stem_safe(fc.source_id) + ".csv");
    std::ostringstream out;
    out << "# source " << fc.source_id << "\nt,x,y\n";
    for (const auto& s : fc.samples) out << format_number(s.t) << ',' << format_number(s.x) << ',' << format_number(s.y) << '\n';
    write_text(path, out.str());
    std::cout << path.string() << '\n';
    return 0;
}

Forecast read_forecast_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    Forecast fc;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# source ", 0) == 0) {
            fc.source_id = line.substr(9);
            continue;
        }
        if (line[0] == '#' || line == "t,x,y") continue;
        Sample s;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &s.t, &s.x, &s.y) != 3) throw std::invalid_argument("malformed forecast row: " + line);
        fc.samples.push_back(s);
    }
    fc.horizon = fc.samples.size();
    return fc;
}

// ---- export ----------------------------------------------------------------

struct ExportArgs {
    std::string forecast;
    std::optional<std::string> format;
    std::optional<double> pps, duration, width, height, source_width, source_height;
    std::optional<std::string> output;
};

int cmd_export(const Common& c, const ExportArgs& a)
{
    const RunConfig cfg = resolve(c);
    ExportOptions opt = cfg.export_options;
    if (a.format) {
        if (*a.format == "json") opt.format = ExportFormat::Json;
        else if (*a.format == "csv") opt.format = ExportFormat::Csv;
        else throw CLI::ValidationError("--format", "must be json or csv");
    }
    if (a.pps) opt.points_per_second = *a.pps;
    if (a.duration) opt.duration = *a.duration;
    if (a.width) opt.target.width = *a.width;
    if (a.height) opt.target.height = *a.height;
    if (a.source_width) opt.source.width = *a.source_width;
    if (a.source_height) opt.source.height = *a.source_height;
    const auto fc = read_forecast_csv(a.forecast);
    const fs::path path = a.output ? fs::path(*a.output)
                                   : fs::path(c.out_dir) / ("trajectory_" + file_stem_safe(fc.source_id.empty() ? "export" : fc.source_id) +
                                         (opt.format == ExportFormat::Json ? ".json" : ".csv"));
    export_trajectory(fc, opt, path);
    std::cout << path.string() << '\n';
    return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
    bool full = false;
    std::vector<std::string> systems;
    std::vector<std::uint64_t> seeds;
    std::vector<double> alphas;
    std::optional<std::size_t> iterations, populations;
};

int cmd_bench(const Common& c, const BenchArgs& a)
{
    RunConfig cfg = resolve(c);
    BenchmarkConfig bench = cfg.bench;
    if (a.full) {
        bench.systems = all_systems();
        bench.seeds.clear();
        for (std::uint64_t s = 1; s <= 10; ++s) bench.seeds.push_back(s);
        bench.points_per_seed = 5;
        bench.discovery.search.n_populations = 30;
    }
    if (!a.systems.empty()) {
        bench.systems.clear();
        for (const auto& s : a.systems) bench.systems.push_back(system_from_name(s));
    }
    if (!a.seeds.empty()) bench.seeds = a.seeds;
    if (!a.alphas.empty()) bench.alphas = a.alphas;
    else if (c.alpha) bench.alphas = {*c.alpha};
    if (a.iterations) bench.discovery.search.n_iterations = *a.iterations;
    if (a.populations) bench.discovery.search.n_populations = *a.populations;

    const auto bank = open_bank(c);
    const auto report = run_benchmark(bench, bank);
    for (const auto& p : write_benchmark_report(report, c.out_dir)) std::cout << p.string() << '\n';
    for (const auto& cell : report.cells)
        std::cerr << system_name(cell.system) << " alpha=" << format_number(cell.alpha) << " ted=" << format_number(cell.ted_mean)
                  << " mse=" << format_number(cell.mse_mean) << " failed=" << cell.failed << "/" << cell.runs << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Symbolic regression of object trajectories with equation-bank seeding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "resr 0.1.0");

    Common common;
    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "simulate a physical system and write a trajectory CSV");
    add_common(gen_cmd, common);
    gen_cmd->add_option("--system", gen.system, "system name")->check(CLI::IsMember(
        {"spring_mass", "damped_spring_mass", "projectile", "two_body", "single_pendulum", "double_pendulum"}));
    gen_cmd->add_option("--points", gen.points, "number of trajectories (point ids)")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--duration", gen.duration, "seconds");
    gen_cmd->add_option("--fps", gen.fps, "sampling rate in Hz");
    gen_cmd->add_option("--jitter", gen.jitter, "relative initial-state spread");
    gen_cmd->add_option("--noise", gen.noise, "Gaussian pixel noise sigma");
    gen_cmd->add_option("--name", gen.name, "output file stem");

    RetrieveArgs ret;
    auto* ret_cmd = app.add_subcommand("retrieve", "rank bank equations against a trajectory's training segment");
    add_common(ret_cmd, common);
    ret_cmd->add_option("--input", ret.input, "trajectory CSV")->required()->check(CLI::ExistingFile);
    ret_cmd->add_option("--point", ret.point, "point_id (default: highest motion variance)");
    ret_cmd->add_option("--axis", ret.axis, "x, y or both");
    ret_cmd->add_option("-k,--top-k", ret.k, "number of entries");

    DiscoverArgs disc;
    auto* disc_cmd = app.add_subcommand("discover", "discover x(t), y(t) for the top trajectories of a CSV");
    add_common(disc_cmd, common);
    disc_cmd->add_option("--input", disc.input, "trajectory CSV")->required()->check(CLI::ExistingFile);
    disc_cmd->add_option("--fps", disc.fps, "frame rate when no sidecar gives one");
    disc_cmd->add_option("--top-k", disc.top_k, "trajectories by motion variance");

    ForecastArgs fc;
    auto* fc_cmd = app.add_subcommand("forecast", "extrapolate discovered equations past the observed interval");
    add_common(fc_cmd, common);
    fc_cmd->add_option("--result", fc.result, "discovery.json from `resr discover`")->required()->check(CLI::ExistingFile);
    fc_cmd->add_option("--id", fc.id, "result id (default: first)");
    fc_cmd->add_option("--horizon", fc.horizon, "steps");
    fc_cmd->add_option("--duration", fc.duration, "seconds (used when --horizon is absent)");
    fc_cmd->add_option("--dt", fc.dt, "step in seconds (default: observed spacing)");

    ExportArgs ex;
    auto* ex_cmd = app.add_subcommand("export", "resample a forecast into a coordinate file");
    add_common(ex_cmd, common);
    ex_cmd->add_option("--forecast", ex.forecast, "forecast CSV from `resr forecast`")->required()->check(CLI::ExistingFile);
    ex_cmd->add_option("--format", ex.format, "json or csv");
    ex_cmd->add_option("--pps", ex.pps, "points per second");
    ex_cmd->add_option("--duration", ex.duration, "seconds to export");
    ex_cmd->add_option("--width", ex.width, "target width in px");
    ex_cmd->add_option("--height", ex.height, "target height in px");
    ex_cmd->add_option("--source-width", ex.source_width, "source width in px");
    ex_cmd->add_option("--source-height", ex.source_height, "source height in px");
    ex_cmd->add_option("-o,--output", ex.output, "output file");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "run systems x seeds x alphas and write report CSVs");
    add_common(bench_cmd, common);
    bench_cmd->add_flag("--full", bench.full, "all systems, 10 seeds, 5 trajectories each, 30 populations");
    bench_cmd->add_option("--systems", bench.systems, "system names");
    bench_cmd->add_option("--seeds", bench.seeds, "seeds");
    bench_cmd->add_option("--alphas", bench.alphas, "alpha values");
    bench_cmd->add_option("--iterations", bench.iterations, "search iterations");
    bench_cmd->add_option("--populations", bench.populations, "populations per axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen_data(common, gen);
        if (*ret_cmd) return cmd_retrieve(common, ret);
        if (*disc_cmd) return cmd_discover(common, disc);
        if (*fc_cmd) return cmd_forecast(common, fc);
        if (*ex_cmd) return cmd_export(common, ex);
        if (*bench_cmd) return cmd_bench(common, bench);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
