// SPDX-License-Identifier: MIT

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "resr/config.hpp"
#include "resr/pipeline.hpp"

namespace py = pybind11;
using namespace resr;

namespace {

Trajectory make_trajectory(const std::vector<double>& t, const std::vector<double>& x, const std::vector<double>& y, double fps)
{
    if (t.size() != x.size() || t.size() != y.size()) throw std::invalid_argument("t, x and y must have the same length");
    Trajectory traj;
    traj.fps = fps;
    for (std::size_t i = 0; i < t.size(); ++i) traj.samples.push_back(Sample{t[i], x[i], y[i]});
    traj.validate();
    return traj;
}

py::dict axis_dict(const AxisDiscovery& a)
{
    py::dict d;
    d["expr"] = to_string(a.expr);
    d["complexity"] = a.complexity;
    d["train_mse"] = a.train_mse;
    d["validation_mse"] = a.validation_mse;
    d["test_mse"] = a.test_mse;
    d["ted_similarity"] = a.ted_similarity ? py::cast(*a.ted_similarity) : py::none();
    py::list retrieved;
    for (const auto& h : a.retrieved) retrieved.append(py::make_tuple(h.id, h.distance));
    d["retrieved"] = retrieved;
    py::list front;
    for (const auto& c : a.front) front.append(py::make_tuple(c.complexity, c.mse, to_string(c.expr)));
    d["front"] = front;
    py::list log;
    for (const auto& r : a.log) log.append(py::make_tuple(r.iteration, r.best_train_mse, r.best_val_mse));
    d["log"] = log;
    d["warnings"] = a.warnings;
    d["divergent"] = a.divergent;
    return d;
}

DiscoveryConfig discovery_config(const std::string& config, std::optional<std::uint64_t> seed, std::optional<double> alpha)
{
    DiscoveryConfig cfg;
    if (!config.empty()) {
        // JSON objects start with a brace, anything else is read as TOML
        const auto first = config.find_first_not_of(" \t\r\n");
        const auto format = first != std::string::npos && config[first] == '{' ? ConfigFormat::Json : ConfigFormat::Toml;
        cfg = parse_run_config(config, format).discovery;
    }
    if (seed) cfg.search.seed = *seed;
    if (alpha) cfg.search.alpha = *alpha;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Retrieval-seeded symbolic regression for 2D trajectories";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<LoadError>(m, "LoadError", PyExc_ValueError);
    py::register_exception<BankError>(m, "BankError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ForecastError>(m, "ForecastError", PyExc_ArithmeticError);

    py::class_<Expr>(m, "Expr")
        .def(py::init([](const std::string& text) { return parse(text); }), py::arg("text"))
        .def("__str__", [](const Expr& e) { return to_string(e); })
        .def("__repr__", [](const Expr& e) { return "Expr('" + to_string(e) + "')"; })
        .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
        .def("__len__", &Expr::size)
        .def_property_readonly("complexity", [](const Expr& e) { return complexity(e); })
        .def_property_readonly("depth", &Expr::depth)
        .def_property_readonly("constants", &Expr::constants)
        .def("with_constants", [](const Expr& e, const std::vector<double>& c) { return e.with_constants(c); })
        .def("evaluate", [](const Expr& e, const std::vector<double>& t, bool protected_ops) {
            return evaluate(e, EvalContext(t, protected_ops));
        }, py::arg("t"), py::arg("protected_ops") = false)
        .def("simplify", [](const Expr& e) { return simplify(e); });

    m.def("parse", [](const std::string& text) { return parse(text); }, py::arg("text"));
    m.def("tree_edit_distance", &tree_edit_distance);
    m.def("ted_similarity", &normalized_ted_similarity);
    m.def("commutative_ted_similarity", &commutative_ted_similarity);

    m.def("dtw_distance", [](const std::vector<double>& a, const std::vector<double>& b, std::optional<std::size_t> band) {
        return dtw_distance(a, b, band);
    }, py::arg("a"), py::arg("b"), py::arg("band") = py::none());
    m.def("normalized_dtw", [](const std::vector<double>& obs, const std::vector<double>& ref, std::optional<std::size_t> band) {
        return normalized_dtw(obs, ref, band);
    }, py::arg("observed"), py::arg("reference"), py::arg("band") = py::none());
    m.def("rescale_to_range", [](const std::vector<double>& s, double lo, double hi) { return rescale_to_range(s, lo, hi); });

    py::class_<EquationBank>(m, "EquationBank")
        .def("__len__", &EquationBank::size)
        .def_readonly("version", &EquationBank::version)
        .def_readonly("warnings", &EquationBank::warnings)
        .def("entries", [](const EquationBank& b) {
            py::list out;
            for (const auto& e : b.entries) out.append(py::make_tuple(e.id, std::string(source_name(e.source)), to_string(e.expr)));
            return out;
        })
        .def("stats", [](const EquationBank& b) {
            py::dict out;
            for (const auto& [src, s] : bank_stats(b)) out[py::str(std::string(source_name(src)))] = py::make_tuple(s.count, s.mean_complexity);
            return out;
        });
    m.def("load_bank", [](const std::filesystem::path& p) { return load_bank(p); }, py::arg("path"));
    m.def("default_bank_path", &default_bank_path);

    m.def("retrieve", [](const EquationBank& bank, const std::vector<double>& t, const std::vector<double>& values, std::size_t k,
                          std::optional<std::size_t> band, std::size_t workers) {
        const auto r = retrieve_top_k(RetrievalQuery{t, values, k, band}, bank, workers);
        py::list out;
        for (const auto& h : r.ranked) out.append(py::make_tuple(h.id, h.distance, to_string(bank.entries[h.entry_index].expr)));
        return out;
    }, py::arg("bank"), py::arg("t"), py::arg("values"), py::arg("k") = 10, py::arg("band") = py::none(), py::arg("workers") = 1);

    m.def("generate", [](const std::string& system, const std::map<std::string, double>& params, std::uint64_t seed,
                          double duration, double sample_rate, double jitter) {
        SystemSpec spec;
        spec.kind = system_from_name(system);
        spec.params = params;
        spec.duration = duration;
        spec.sample_rate = sample_rate;
        spec.initial_state_jitter = jitter;
        const auto gt = generate(spec, seed);
        py::dict d;
        d["t"] = gt.trajectory.times();
        d["x"] = gt.trajectory.axis(Axis::X);
        d["y"] = gt.trajectory.axis(Axis::Y);
        d["fps"] = gt.trajectory.fps;
        d["truth_x"] = gt.analytic_x ? py::cast(to_string(*gt.analytic_x)) : py::none();
        d["truth_y"] = gt.analytic_y ? py::cast(to_string(*gt.analytic_y)) : py::none();
        return d;
    }, py::arg("system"), py::arg("params") = std::map<std::string, double>{}, py::arg("seed") = 0, py::arg("duration") = 5.0,
        py::arg("sample_rate") = 20.0, py::arg("jitter") = 0.0);

    m.def("optimize_constants", [](const Expr& e, const std::vector<double>& t, const std::vector<double>& y, std::size_t restarts,
                                    std::size_t evaluations, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        double mse = 0.0;
        Expr fitted = optimize_constants(e, Series{t, y}, ConstantBudget{restarts, evaluations}, rng, &mse);
        return py::make_tuple(fitted, mse);
    }, py::arg("expr"), py::arg("t"), py::arg("y"), py::arg("restarts") = 8, py::arg("evaluations") = 100, py::arg("seed") = 0);

    m.def("discover", [](const std::vector<double>& t, const std::vector<double>& x, const std::vector<double>& y, const EquationBank& bank,
                          double fps, const std::string& config, std::optional<std::uint64_t> seed, std::optional<double> alpha,
                          std::optional<std::string> truth_x, std::optional<std::string> truth_y) {
        const auto cfg = discovery_config(config, seed, alpha);
        std::optional<GroundTruthPair> truth;
        if (truth_x && truth_y) truth = GroundTruthPair{parse(*truth_x), parse(*truth_y)};
        DiscoveryResult r;
        {
            py::gil_scoped_release release;
            r = discover(temporal_split(make_trajectory(t, x, y, fps)), bank, cfg, truth);
        }
        py::dict d;
        d["x"] = axis_dict(r.x);
        d["y"] = axis_dict(r.y);
        d["f_x"] = to_string(r.x.expr);
        d["f_y"] = to_string(r.y.expr);
        d["test_mse"] = r.test_mse;
        d["divergent"] = r.divergent;
        d["t_last"] = r.t_last;
        d["dt"] = r.dt;
        const auto ted = r.ted_similarity();
        d["ted_similarity"] = ted ? py::cast(*ted) : py::none();
        return d;
    }, py::arg("t"), py::arg("x"), py::arg("y"), py::arg("bank"), py::arg("fps") = 0.0, py::arg("config") = "",
        py::arg("seed") = py::none(), py::arg("alpha") = py::none(), py::arg("truth_x") = py::none(), py::arg("truth_y") = py::none());

    m.def("forecast", [](const std::string& fx, const std::string& fy, double t_last, std::size_t horizon, double dt) {
        const auto fc = forecast(parse(fx), parse(fy), t_last, horizon, dt);
        py::list out;
        for (const auto& s : fc.samples) out.append(py::make_tuple(s.t, s.x, s.y));
        return out;
    }, py::arg("f_x"), py::arg("f_y"), py::arg("t_last"), py::arg("horizon"), py::arg("dt"));

    m.def("resample_for_export", [](const std::vector<std::tuple<double, double, double>>& samples, double points_per_second,
                                     std::optional<double> duration, std::pair<double, double> source, std::pair<double, double> target) {
        Forecast fc;
        for (const auto& [t, x, y] : samples) fc.samples.push_back(Sample{t, x, y});
        fc.horizon = fc.samples.size();
        ExportOptions opt;
        opt.points_per_second = points_per_second;
        opt.duration = duration;
        opt.source = Resolution{source.first, source.second};
        opt.target = Resolution{target.first, target.second};
        py::list out;
        for (const auto& p : resample_for_export(fc, opt)) out.append(py::make_tuple(p.t, p.x, p.y));
        return out;
    }, py::arg("samples"), py::arg("points_per_second") = 2.0, py::arg("duration") = py::none(),
        py::arg("source") = std::pair<double, double>{640.0, 480.0}, py::arg("target") = std::pair<double, double>{640.0, 480.0});

    m.def("load_trajectories", [](const std::filesystem::path& p, std::optional<double> fps) {
        const auto set = load_trajectories(p, fps);
        py::list out;
        for (const auto& traj : set.trajectories) {
            py::dict d;
            d["point_id"] = traj.point_id;
            d["fps"] = traj.fps;
            d["t"] = traj.times();
            d["x"] = traj.axis(Axis::X);
            d["y"] = traj.axis(Axis::Y);
            out.append(d);
        }
        return out;
    }, py::arg("path"), py::arg("fps") = py::none());
}
