// SPDX-License-Identifier: MIT

#include "resr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace resr {

namespace {

const std::map<std::string, double>& defaults(SystemKind kind)
{
    static const std::map<std::string, double> spring{
        {"k", 4.0}, {"m", 1.0}, {"amplitude", 1.0}, {"phase", 0.0}, {"center", 0.0}, {"y0", 0.0}};
    static const std::map<std::string, double> damped{{"k", 4.0}, {"m", 1.0}, {"gamma", 0.3}, {"amplitude", 1.0},
        {"phase", 0.0}, {"center", 0.0}, {"y0", 0.0}};
    static const std::map<std::string, double> projectile{
        {"x0", -1.0}, {"y0", 0.0}, {"vx", 0.5}, {"vy", 4.0}, {"g", 9.8}};
    static const std::map<std::string, double> two_body{{"G", 1.0}, {"m1", 1.0}, {"m2", 3.0}, {"separation", 1.0},
        {"phase", 0.0}, {"com_x", 0.0}, {"com_y", 0.0}};
    static const std::map<std::string, double> single{{"g", 9.8}, {"length", 1.0}, {"theta0", 0.3}, {"omega0", 0.0}};
    static const std::map<std::string, double> dbl{{"g", 9.8}, {"m1", 1.0}, {"m2", 1.0}, {"length1", 1.0},
        {"length2", 1.0}, {"theta1", 0.5}, {"theta2", 0.5}, {"omega1", 0.0}, {"omega2", 0.0}};
    switch (kind) {
    case SystemKind::SpringMass: return spring;
    case SystemKind::DampedSpringMass: return damped;
    case SystemKind::Projectile: return projectile;
    case SystemKind::TwoBody: return two_body;
    case SystemKind::SinglePendulum: return single;
    case SystemKind::DoublePendulum: return dbl;
    }
    return spring;
}

// How the seeded jitter perturbs each initial-state parameter.
enum class Jitter { Scale, ShiftUnit, ShiftPhase };

std::vector<std::pair<std::string, Jitter>> initial_state_params(SystemKind kind)
{
    switch (kind) {
    case SystemKind::SpringMass:
    case SystemKind::DampedSpringMass:
        return {{"amplitude", Jitter::Scale}, {"phase", Jitter::ShiftPhase}, {"center", Jitter::ShiftUnit}};
    case SystemKind::Projectile:
        return {{"x0", Jitter::ShiftUnit}, {"y0", Jitter::ShiftUnit}, {"vx", Jitter::Scale}, {"vy", Jitter::Scale}};
    case SystemKind::TwoBody:
        return {{"phase", Jitter::ShiftPhase}};
    case SystemKind::SinglePendulum:
        return {{"theta0", Jitter::Scale}, {"omega0", Jitter::ShiftUnit}};
    case SystemKind::DoublePendulum:
        return {{"theta1", Jitter::Scale}, {"theta2", Jitter::Scale}, {"omega1", Jitter::ShiftUnit},
            {"omega2", Jitter::ShiftUnit}};
    }
    return {};
}

Expr num(double v) { return Expr::constant(v); }
Expr tvar() { return Expr::variable(); }
Expr scaled(double c, const Expr& e) { return c == 1.0 ? e : Expr::binary(NodeKind::Mul, num(c), e); }
Expr shifted(const Expr& e, double c) { return c == 0.0 ? e : Expr::binary(NodeKind::Add, e, num(c)); }
Expr phase_arg(double omega, double phase) { return shifted(scaled(omega, tvar()), phase); }

std::vector<double> sample_times(const SystemSpec& spec)
{
    const auto frames = static_cast<std::size_t>(std::llround(spec.duration * spec.sample_rate));
    std::vector<double> t(frames);
    for (std::size_t i = 0; i < frames; ++i) t[i] = static_cast<double>(i) / spec.sample_rate;
    return t;
}

double to_px_x(const PixelMap& p, double x) { return p.offset_x + p.scale * x; }
double to_px_y(const PixelMap& p, double y) { return p.offset_y + p.scale * y; }

struct SingleState {
    double theta, omega;
};

SingleState rk4_single(double g_over_l, SingleState s, double h)
{
    auto f = [g_over_l](SingleState u) { return SingleState{u.omega, -g_over_l * std::sin(u.theta)}; };
    const auto k1 = f(s);
    const auto k2 = f({s.theta + 0.5 * h * k1.theta, s.omega + 0.5 * h * k1.omega});
    const auto k3 = f({s.theta + 0.5 * h * k2.theta, s.omega + 0.5 * h * k2.omega});
    const auto k4 = f({s.theta + h * k3.theta, s.omega + h * k3.omega});
    return {s.theta + h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta),
        s.omega + h / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega)};
}

DoublePendulumState double_rhs(const DoublePendulumParams& p, const DoublePendulumState& s)
{
    const double d = s.theta1 - s.theta2;
    const double den = 2.0 * p.m1 + p.m2 - p.m2 * std::cos(2.0 * d);
    const double a1 = (-p.g * (2.0 * p.m1 + p.m2) * std::sin(s.theta1) - p.m2 * p.g * std::sin(s.theta1 - 2.0 * s.theta2)
                          - 2.0 * std::sin(d) * p.m2
                              * (s.omega2 * s.omega2 * p.length2 + s.omega1 * s.omega1 * p.length1 * std::cos(d)))
        / (p.length1 * den);
    const double a2 = (2.0 * std::sin(d)
                          * (s.omega1 * s.omega1 * p.length1 * (p.m1 + p.m2) + p.g * (p.m1 + p.m2) * std::cos(s.theta1)
                              + s.omega2 * s.omega2 * p.length2 * p.m2 * std::cos(d)))
        / (p.length2 * den);
    return {s.omega1, a1, s.omega2, a2};
}

DoublePendulumState axpy(const DoublePendulumState& s, double h, const DoublePendulumState& k)
{
    return {s.theta1 + h * k.theta1, s.omega1 + h * k.omega1, s.theta2 + h * k.theta2, s.omega2 + h * k.omega2};
}

DoublePendulumState rk4_double(const DoublePendulumParams& p, const DoublePendulumState& s, double h)
{
    const auto k1 = double_rhs(p, s);
    const auto k2 = double_rhs(p, axpy(s, 0.5 * h, k1));
    const auto k3 = double_rhs(p, axpy(s, 0.5 * h, k2));
    const auto k4 = double_rhs(p, axpy(s, h, k3));
    return {s.theta1 + h / 6.0 * (k1.theta1 + 2.0 * k2.theta1 + 2.0 * k3.theta1 + k4.theta1),
        s.omega1 + h / 6.0 * (k1.omega1 + 2.0 * k2.omega1 + 2.0 * k3.omega1 + k4.omega1),
        s.theta2 + h / 6.0 * (k1.theta2 + 2.0 * k2.theta2 + 2.0 * k3.theta2 + k4.theta2),
        s.omega2 + h / 6.0 * (k1.omega2 + 2.0 * k2.omega2 + 2.0 * k3.omega2 + k4.omega2)};
}

std::size_t substeps(double sample_interval, double step)
{
    if (!(step > 0.0) || !(sample_interval > 0.0)) {
        throw std::invalid_argument("integration step and sample interval must be positive");
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::ceil(sample_interval / step - 1e-9))));
}

void check_drift(const std::vector<double>& energy)
{
    if (energy.empty()) return;
    const double e0 = energy.front();
    double worst = 0.0;
    for (double e : energy) worst = std::max(worst, std::fabs(e - e0));
    if (e0 > 0.0 && worst / e0 > 0.01) {
        throw IntegrationError("energy drift " + std::to_string(100.0 * worst / e0)
            + "% exceeds 1%; reduce the integration step");
    }
}

} // namespace

std::string_view system_name(SystemKind kind) noexcept
{
    switch (kind) {
    case SystemKind::SpringMass: return "spring_mass";
    case SystemKind::DampedSpringMass: return "damped_spring_mass";
    case SystemKind::Projectile: return "projectile";
    case SystemKind::TwoBody: return "two_body";
    case SystemKind::SinglePendulum: return "single_pendulum";
    case SystemKind::DoublePendulum: return "double_pendulum";
    }
    return "unknown";
}

SystemKind system_from_name(std::string_view name)
{
    for (auto k : all_systems()) {
        if (system_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown system: " + std::string(name));
}

const std::vector<SystemKind>& all_systems()
{
    static const std::vector<SystemKind> all{SystemKind::SpringMass, SystemKind::DampedSpringMass,
        SystemKind::Projectile, SystemKind::TwoBody, SystemKind::SinglePendulum, SystemKind::DoublePendulum};
    return all;
}

bool has_analytic_solution(SystemKind kind) noexcept
{
    return kind != SystemKind::SinglePendulum && kind != SystemKind::DoublePendulum;
}

double SystemSpec::param(const std::string& name) const
{
    if (auto it = params.find(name); it != params.end()) return it->second;
    const auto& d = defaults(kind);
    if (auto it = d.find(name); it != d.end()) return it->second;
    throw std::invalid_argument("system " + std::string(system_name(kind)) + " has no parameter '" + name + "'");
}

void SystemSpec::validate() const
{
    if (!(duration > 0.0) || !std::isfinite(duration)) throw std::invalid_argument("duration must be > 0");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) throw std::invalid_argument("sample rate must be > 0");
    if (!(pixels.scale > 0.0)) throw std::invalid_argument("pixel scale must be > 0");
    if (!(initial_state_jitter >= 0.0)) throw std::invalid_argument("jitter must be >= 0");
    const auto& d = defaults(kind);
    for (const auto& [name, value] : params) {
        if (!d.contains(name)) {
            throw std::invalid_argument("system " + std::string(system_name(kind)) + " has no parameter '" + name + "'");
        }
        if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + name + "' must be finite");
    }
    auto positive = [&](const char* name) {
        if (!(param(name) > 0.0)) throw std::invalid_argument(std::string("parameter '") + name + "' must be > 0");
    };
    switch (kind) {
    case SystemKind::SpringMass:
        positive("k");
        positive("m");
        break;
    case SystemKind::DampedSpringMass:
        positive("k");
        positive("m");
        positive("gamma");
        if (!(param("k") / param("m") > param("gamma") * param("gamma"))) {
            throw std::invalid_argument("damped spring-mass must be underdamped (gamma^2 < k/m)");
        }
        break;
    case SystemKind::Projectile:
        positive("g");
        break;
    case SystemKind::TwoBody:
        positive("G");
        positive("m1");
        positive("m2");
        positive("separation");
        break;
    case SystemKind::SinglePendulum:
        positive("g");
        positive("length");
        break;
    case SystemKind::DoublePendulum:
        positive("g");
        positive("m1");
        positive("m2");
        positive("length1");
        positive("length2");
        if (duration > 5.0) throw std::invalid_argument("double pendulum horizons are limited to 5 s");
        break;
    }
}

SystemSpec realize_initial_state(const SystemSpec& spec, std::uint64_t seed)
{
    SystemSpec out = spec;
    for (const auto& [name, value] : defaults(spec.kind)) {
        out.params.emplace(name, value);
    }
    if (spec.initial_state_jitter == 0.0) return out;
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double j = spec.initial_state_jitter;
    for (const auto& [name, how] : initial_state_params(spec.kind)) {
        double& v = out.params[name];
        const double r = u(rng);
        switch (how) {
        case Jitter::Scale: v *= 1.0 + j * r; break;
        case Jitter::ShiftUnit: v += j * r; break;
        case Jitter::ShiftPhase: v += j * std::numbers::pi * r; break;
        }
    }
    return out;
}

std::optional<std::pair<Expr, Expr>> analytic_equation(const SystemSpec& spec)
{
    const auto& px = spec.pixels;
    const double s = px.scale;
    switch (spec.kind) {
    case SystemKind::SpringMass: {
        const double w = std::sqrt(spec.param("k") / spec.param("m"));
        Expr x = shifted(scaled(s * spec.param("amplitude"), Expr::unary(NodeKind::Cos, phase_arg(w, spec.param("phase")))),
            to_px_x(px, spec.param("center")));
        return std::make_pair(x, num(to_px_y(px, spec.param("y0"))));
    }
    case SystemKind::DampedSpringMass: {
        const double w0 = std::sqrt(spec.param("k") / spec.param("m"));
        const double gamma = spec.param("gamma");
        const double wd = std::sqrt(w0 * w0 - gamma * gamma);
        Expr envelope = scaled(s * spec.param("amplitude"), Expr::unary(NodeKind::Exp, scaled(-gamma, tvar())));
        Expr osc = Expr::unary(NodeKind::Cos, phase_arg(wd, spec.param("phase")));
        Expr x = shifted(Expr::binary(NodeKind::Mul, envelope, osc), to_px_x(px, spec.param("center")));
        return std::make_pair(x, num(to_px_y(px, spec.param("y0"))));
    }
    case SystemKind::Projectile: {
        const double x0 = to_px_x(px, spec.param("x0"));
        const double y0 = to_px_y(px, spec.param("y0"));
        const double vx = s * spec.param("vx");
        const double vy = s * spec.param("vy");
        const double half_g = 0.5 * s * spec.param("g");
        // constant + linear term, dropping zero pieces
        auto linear = [](double c0, double v) {
            if (v == 0.0) return num(c0);
            Expr term = scaled(v, tvar());
            return c0 == 0.0 ? term : Expr::binary(NodeKind::Add, num(c0), term);
        };
        Expr x = linear(x0, vx);
        Expr quad = scaled(half_g, Expr::binary(NodeKind::Pow, tvar(), num(2.0)));
        Expr y = (y0 == 0.0 && vy == 0.0) ? Expr::unary(NodeKind::Neg, quad)
                                          : Expr::binary(NodeKind::Sub, linear(y0, vy), quad);
        return std::make_pair(x, y);
    }
    case SystemKind::TwoBody: {
        const double m1 = spec.param("m1");
        const double m2 = spec.param("m2");
        const double d = spec.param("separation");
        const double radius = d * m2 / (m1 + m2);
        const double w = std::sqrt(spec.param("G") * (m1 + m2) / (d * d * d));
        const double phase = spec.param("phase");
        Expr x = shifted(scaled(s * radius, Expr::unary(NodeKind::Cos, phase_arg(w, phase))),
            to_px_x(px, spec.param("com_x")));
        Expr y = shifted(scaled(s * radius, Expr::unary(NodeKind::Sin, phase_arg(w, phase))),
            to_px_y(px, spec.param("com_y")));
        return std::make_pair(x, y);
    }
    case SystemKind::SinglePendulum:
    case SystemKind::DoublePendulum:
        return std::nullopt;
    }
    return std::nullopt;
}

std::vector<PendulumSample> integrate_single_pendulum(
    double g, double length, double theta0, double omega0, double duration, double step, double sample_interval)
{
    const std::size_t n_sub = substeps(sample_interval, step);
    const double h = sample_interval / static_cast<double>(n_sub);
    const auto samples = static_cast<std::size_t>(std::llround(duration / sample_interval));
    std::vector<PendulumSample> out;
    out.reserve(samples + 1);
    SingleState s{theta0, omega0};
    const double k = g / length;
    for (std::size_t i = 0; i <= samples; ++i) {
        out.push_back({static_cast<double>(i) * sample_interval, s.theta, s.omega});
        if (i == samples) break;
        for (std::size_t j = 0; j < n_sub; ++j) s = rk4_single(k, s, h);
    }
    return out;
}

double single_pendulum_energy(double g, double length, double theta, double omega)
{
    return 0.5 * length * length * omega * omega + g * length * (1.0 - std::cos(theta));
}

std::vector<std::pair<double, DoublePendulumState>> integrate_double_pendulum(const DoublePendulumParams& p,
    DoublePendulumState initial, double duration, double step, double sample_interval)
{
    const std::size_t n_sub = substeps(sample_interval, step);
    const double h = sample_interval / static_cast<double>(n_sub);
    const auto samples = static_cast<std::size_t>(std::llround(duration / sample_interval));
    std::vector<std::pair<double, DoublePendulumState>> out;
    out.reserve(samples + 1);
    DoublePendulumState s = initial;
    for (std::size_t i = 0; i <= samples; ++i) {
        out.emplace_back(static_cast<double>(i) * sample_interval, s);
        if (i == samples) break;
        for (std::size_t j = 0; j < n_sub; ++j) s = rk4_double(p, s, h);
    }
    return out;
}

double double_pendulum_energy(const DoublePendulumParams& p, const DoublePendulumState& s)
{
    const double kinetic = 0.5 * p.m1 * p.length1 * p.length1 * s.omega1 * s.omega1
        + 0.5 * p.m2
            * (p.length1 * p.length1 * s.omega1 * s.omega1 + p.length2 * p.length2 * s.omega2 * s.omega2
                + 2.0 * p.length1 * p.length2 * s.omega1 * s.omega2 * std::cos(s.theta1 - s.theta2));
    const double potential = (p.m1 + p.m2) * p.g * p.length1 * (1.0 - std::cos(s.theta1))
        + p.m2 * p.g * p.length2 * (1.0 - std::cos(s.theta2));
    return kinetic + potential;
}

GroundTruth generate(const SystemSpec& input, std::uint64_t seed)
{
    input.validate();
    const SystemSpec spec = realize_initial_state(input, seed);
    spec.validate();
    GroundTruth gt;
    gt.spec = spec;
    gt.trajectory.point_id = 0;
    gt.trajectory.fps = spec.sample_rate;
    const auto times = sample_times(spec);
    if (times.size() < 2) throw std::invalid_argument("duration * sample rate must give at least 2 samples");
    const auto& px = spec.pixels;
    auto push = [&](double t, double xm, double ym) {
        gt.trajectory.samples.push_back(Sample{t, to_px_x(px, xm), to_px_y(px, ym)});
    };

    switch (spec.kind) {
    case SystemKind::SpringMass: {
        const double w = std::sqrt(spec.param("k") / spec.param("m"));
        const double a = spec.param("amplitude");
        const double phase = spec.param("phase");
        for (double t : times) push(t, a * std::cos(w * t + phase) + spec.param("center"), spec.param("y0"));
        break;
    }
    case SystemKind::DampedSpringMass: {
        const double w0 = std::sqrt(spec.param("k") / spec.param("m"));
        const double gamma = spec.param("gamma");
        const double wd = std::sqrt(w0 * w0 - gamma * gamma);
        const double a = spec.param("amplitude");
        const double phase = spec.param("phase");
        for (double t : times) {
            push(t, a * std::exp(-gamma * t) * std::cos(wd * t + phase) + spec.param("center"), spec.param("y0"));
        }
        break;
    }
    case SystemKind::Projectile: {
        const double g = spec.param("g");
        for (double t : times) {
            push(t, spec.param("x0") + spec.param("vx") * t, spec.param("y0") + spec.param("vy") * t - 0.5 * g * t * t);
        }
        break;
    }
    case SystemKind::TwoBody: {
        const double m1 = spec.param("m1");
        const double m2 = spec.param("m2");
        const double d = spec.param("separation");
        const double radius = d * m2 / (m1 + m2);
        const double w = std::sqrt(spec.param("G") * (m1 + m2) / (d * d * d));
        const double phase = spec.param("phase");
        for (double t : times) {
            push(t, spec.param("com_x") + radius * std::cos(w * t + phase),
                spec.param("com_y") + radius * std::sin(w * t + phase));
        }
        break;
    }
    case SystemKind::SinglePendulum: {
        const double g = spec.param("g");
        const double len = spec.param("length");
        const double dt = 1.0 / spec.sample_rate;
        const auto path = integrate_single_pendulum(
            g, len, spec.param("theta0"), spec.param("omega0"), dt * static_cast<double>(times.size() - 1), dt / 20.0, dt);
        std::vector<double> energy;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto& s = path[i];
            push(times[i], len * std::sin(s.theta), -len * std::cos(s.theta));
            energy.push_back(single_pendulum_energy(g, len, s.theta, s.omega));
        }
        check_drift(energy);
        break;
    }
    case SystemKind::DoublePendulum: {
        DoublePendulumParams p{spec.param("g"), spec.param("m1"), spec.param("m2"), spec.param("length1"),
            spec.param("length2")};
        DoublePendulumState s0{spec.param("theta1"), spec.param("omega1"), spec.param("theta2"), spec.param("omega2")};
        const double dt = 1.0 / spec.sample_rate;
        const auto path = integrate_double_pendulum(p, s0, dt * static_cast<double>(times.size() - 1), dt / 20.0, dt);
        std::vector<double> energy;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto& s = path[i].second;
            push(times[i], p.length1 * std::sin(s.theta1) + p.length2 * std::sin(s.theta2),
                -p.length1 * std::cos(s.theta1) - p.length2 * std::cos(s.theta2));
            energy.push_back(double_pendulum_energy(p, s));
        }
        check_drift(energy);
        break;
    }
    }

    if (auto eq = analytic_equation(spec)) {
        gt.analytic_x = eq->first;
        gt.analytic_y = eq->second;
    }
    return gt;
}

Trajectory add_noise(const Trajectory& traj, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
    if (sigma == 0.0) return traj;
    Trajectory out = traj;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& s : out.samples) {
        s.x += noise(rng);
        s.y += noise(rng);
    }
    return out;
}

} // namespace resr
