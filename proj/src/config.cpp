// SPDX-License-Identifier: MIT

#include "resr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>
#include <toml.hpp>

namespace resr {

namespace {

using json = nlohmann::json;

// Typed access to one table; every key must be consumed.
class Table {
public:
    Table(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object()) throw ConfigError(where() + " must be a table");
    }

    Table(const Table&) = delete;

    void done() const
    {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.contains(key)) throw ConfigError("unknown key " + qualified(key));
    }

    const json* find(const std::string& key)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void read(const std::string& key, double& out)
    {
        if (const json* v = find(key)) out = as_double(*v, key);
    }
    void read(const std::string& key, std::optional<double>& out)
    {
        if (const json* v = find(key)) out = as_double(*v, key);
    }
    template <class U>
        requires std::is_unsigned_v<U>
    void read(const std::string& key, U& out)
    {
        if (const json* v = find(key)) out = static_cast<U>(as_count(*v, key));
    }
    void read(const std::string& key, std::optional<std::size_t>& out)
    {
        if (const json* v = find(key)) out = as_count(*v, key);
    }
    void read(const std::string& key, std::string& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(qualified(key) + " must be a string");
            out = v->get<std::string>();
        }
    }

    const json& array(const std::string& key, const json& v)
    {
        if (!v.is_array()) throw ConfigError(qualified(key) + " must be an array");
        return v;
    }

    double as_double(const json& v, const std::string& key) const
    {
        if (!v.is_number()) throw ConfigError(qualified(key) + " must be a number");
        return v.get<double>();
    }

    std::size_t as_count(const json& v, const std::string& key) const
    {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(qualified(key) + " must be a non-negative integer");
        return v.get<std::size_t>();
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_budget(Table& parent, const std::string& key, ConstantBudget& b)
{
    if (const json* v = parent.find(key)) {
        Table t(*v, parent.qualified(key));
        t.read("restarts", b.restarts);
        t.read("evaluations", b.evaluations);
        t.done();
    }
}

void read_search(const json& obj, SearchConfig& s)
{
    Table t(obj, "search");
    t.read("n_iterations", s.n_iterations);
    t.read("n_populations", s.n_populations);
    t.read("population_size", s.population_size);
    t.read("alpha", s.alpha);
    t.read("top_k", s.top_k_retrieval);
    if (const json* v = t.find("operators")) {
        s.operators.clear();
        for (const auto& name : t.array("operators", *v)) {
            if (!name.is_string()) throw ConfigError("search.operators entries must be strings");
            try {
                s.operators.push_back(kind_from_name(name.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("search.operators: ") + e.what());
            }
        }
    }
    t.read("max_complexity", s.max_complexity);
    t.read("parsimony", s.parsimony);
    t.read("tournament_size", s.tournament_size);
    t.read("crossover_probability", s.crossover_probability);
    t.read("migration_count", s.migration_count);
    t.read("init_max_depth", s.init_max_depth);
    t.read("init_constant_range", s.init_constant_range);
    t.read("seed", s.seed);
    t.read("workers", s.workers);
    read_budget(t, "constant_budget", s.constant_budget);
    read_budget(t, "offspring_budget", s.offspring_budget);
    if (const json* v = t.find("mutation")) {
        Table m(*v, "search.mutation");
        m.read("replace_kind", s.mutation.replace_kind);
        m.read("replace_subtree", s.mutation.replace_subtree);
        m.read("perturb_constant", s.mutation.perturb_constant);
        m.read("insert_unary", s.mutation.insert_unary);
        m.read("delete_unary", s.mutation.delete_unary);
        m.read("simplify", s.mutation.simplify);
        m.done();
    }
    t.done();
}

void read_bench(const json& obj, BenchmarkConfig& b)
{
    Table t(obj, "bench");
    if (const json* v = t.find("systems")) {
        b.systems.clear();
        for (const auto& name : t.array("systems", *v)) {
            if (!name.is_string()) throw ConfigError("bench.systems entries must be strings");
            try {
                b.systems.push_back(system_from_name(name.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("bench.systems: ") + e.what());
            }
        }
    }
    if (const json* v = t.find("seeds")) {
        b.seeds.clear();
        for (const auto& s : t.array("seeds", *v)) b.seeds.push_back(t.as_count(s, "seeds"));
    }
    if (const json* v = t.find("alphas")) {
        b.alphas.clear();
        for (const auto& a : t.array("alphas", *v)) b.alphas.push_back(t.as_double(a, "alphas"));
    }
    t.read("duration", b.duration);
    t.read("sample_rate", b.sample_rate);
    t.read("jitter", b.initial_state_jitter);
    t.read("noise_sigma", b.noise_sigma);
    t.read("points_per_seed", b.points_per_seed);
    t.read("top_k_trajectories", b.top_k_trajectories);
    t.read("workers", b.workers);
    t.done();
}

void apply_document(const json& doc, RunConfig& cfg)
{
    Table root(doc, "");
    if (const json* v = root.find("search")) read_search(*v, cfg.discovery.search);
    if (const json* v = root.find("retrieval")) {
        Table t(*v, "retrieval");
        t.read("band", cfg.discovery.dtw_band);
        t.read("tie_relative", cfg.discovery.tie_relative);
        t.read("tie_absolute", cfg.discovery.tie_absolute);
        t.done();
    }
    if (const json* v = root.find("data")) {
        Table t(*v, "data");
        t.read("fps", cfg.fps);
        t.read("top_k_trajectories", cfg.top_k_trajectories);
        t.done();
    }
    if (const json* v = root.find("forecast")) {
        Table t(*v, "forecast");
        t.read("horizon", cfg.forecast_horizon);
        t.read("duration", cfg.forecast_duration);
        t.read("dt", cfg.forecast_dt);
        t.done();
    }
    if (const json* v = root.find("export")) {
        Table t(*v, "export");
        std::string format = cfg.export_options.format == ExportFormat::Csv ? "csv" : "json";
        t.read("format", format);
        if (format == "csv") {
            cfg.export_options.format = ExportFormat::Csv;
        } else if (format == "json") {
            cfg.export_options.format = ExportFormat::Json;
        } else {
            throw ConfigError("export.format must be \"json\" or \"csv\"");
        }
        t.read("points_per_second", cfg.export_options.points_per_second);
        t.read("duration", cfg.export_options.duration);
        t.read("source_width", cfg.export_options.source.width);
        t.read("source_height", cfg.export_options.source.height);
        t.read("width", cfg.export_options.target.width);
        t.read("height", cfg.export_options.target.height);
        t.done();
    }
    if (const json* v = root.find("bench")) read_bench(*v, cfg.bench);
    root.done();
    cfg.bench.discovery = cfg.discovery;
}

} // namespace

RunConfig parse_run_config(std::string_view text, ConfigFormat format, RunConfig base)
{
    json doc;
    if (format == ConfigFormat::Toml) {
        try {
            const auto tbl = toml::parse(text);
            std::ostringstream ss;
            ss << toml::json_formatter{tbl};
            doc = json::parse(ss.str());
        } catch (const toml::parse_error& e) {
            std::ostringstream msg;
            msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
            throw ConfigError(msg.str());
        }
    } else {
        doc = json::parse(text.begin(), text.end(), nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config is not valid JSON");
    }
    apply_document(doc, base);
    return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const auto format = path.extension() == ".toml" ? ConfigFormat::Toml : ConfigFormat::Json;
    return parse_run_config(ss.str(), format, std::move(base));
}

std::string config_to_json(const RunConfig& cfg)
{
    nlohmann::ordered_json j;
    const auto& s = cfg.discovery.search;
    auto& js = j["search"];
    js["n_iterations"] = s.n_iterations;
    js["n_populations"] = s.n_populations;
    js["population_size"] = s.population_size;
    js["alpha"] = s.alpha;
    js["top_k"] = s.top_k_retrieval;
    js["operators"] = nlohmann::ordered_json::array();
    for (NodeKind k : s.operators) js["operators"].push_back(std::string(kind_name(k)));
    js["max_complexity"] = s.max_complexity;
    js["parsimony"] = s.parsimony;
    js["tournament_size"] = s.tournament_size;
    js["crossover_probability"] = s.crossover_probability;
    js["migration_count"] = s.migration_count;
    js["init_max_depth"] = s.init_max_depth;
    js["init_constant_range"] = s.init_constant_range;
    js["seed"] = s.seed;
    js["workers"] = s.workers;
    js["constant_budget"] = {{"restarts", s.constant_budget.restarts}, {"evaluations", s.constant_budget.evaluations}};
    js["offspring_budget"] = {{"restarts", s.offspring_budget.restarts}, {"evaluations", s.offspring_budget.evaluations}};
    js["mutation"] = {{"replace_kind", s.mutation.replace_kind}, {"replace_subtree", s.mutation.replace_subtree},
        {"perturb_constant", s.mutation.perturb_constant}, {"insert_unary", s.mutation.insert_unary},
        {"delete_unary", s.mutation.delete_unary}, {"simplify", s.mutation.simplify}};

    auto& jr = j["retrieval"];
    if (cfg.discovery.dtw_band) jr["band"] = *cfg.discovery.dtw_band;
    jr["tie_relative"] = cfg.discovery.tie_relative;
    jr["tie_absolute"] = cfg.discovery.tie_absolute;

    auto& jd = j["data"];
    if (cfg.fps) jd["fps"] = *cfg.fps;
    jd["top_k_trajectories"] = cfg.top_k_trajectories;

    auto& jf = j["forecast"];
    if (cfg.forecast_horizon) jf["horizon"] = *cfg.forecast_horizon;
    jf["duration"] = cfg.forecast_duration;
    if (cfg.forecast_dt) jf["dt"] = *cfg.forecast_dt;

    const auto& e = cfg.export_options;
    auto& je = j["export"];
    je["format"] = e.format == ExportFormat::Csv ? "csv" : "json";
    je["points_per_second"] = e.points_per_second;
    if (e.duration) je["duration"] = *e.duration;
    je["source_width"] = e.source.width;
    je["source_height"] = e.source.height;
    je["width"] = e.target.width;
    je["height"] = e.target.height;

    const auto& b = cfg.bench;
    auto& jb = j["bench"];
    jb["systems"] = nlohmann::ordered_json::array();
    for (SystemKind k : b.systems) jb["systems"].push_back(std::string(system_name(k)));
    jb["seeds"] = b.seeds;
    jb["alphas"] = b.alphas;
    jb["duration"] = b.duration;
    jb["sample_rate"] = b.sample_rate;
    jb["jitter"] = b.initial_state_jitter;
    jb["noise_sigma"] = b.noise_sigma;
    jb["points_per_seed"] = b.points_per_seed;
    jb["top_k_trajectories"] = b.top_k_trajectories;
    jb["workers"] = b.workers;
    return j.dump(2);
}

} // namespace resr
