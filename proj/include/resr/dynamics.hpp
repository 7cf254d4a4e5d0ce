// SPDX-License-Identifier: MIT

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "resr/expr.hpp"
#include "resr/trajectory.hpp"

namespace resr {

enum class SystemKind { SpringMass, DampedSpringMass, Projectile, TwoBody, SinglePendulum, DoublePendulum };

std::string_view system_name(SystemKind kind) noexcept;
SystemKind system_from_name(std::string_view name);
const std::vector<SystemKind>& all_systems();
bool has_analytic_solution(SystemKind kind) noexcept;

// Affine map from simulation metres to image pixels: px = offset + scale * m.
struct PixelMap {
    double scale = 100.0;
    double offset_x = 320.0;
    double offset_y = 240.0;

    static PixelMap identity() { return PixelMap{1.0, 0.0, 0.0}; }
};

// Parameter names per system (defaults in parentheses):
//   spring_mass:         k (4), m (1), amplitude (1), phase (0), center (0), y0 (0)
//   damped_spring_mass:  k (4), m (1), gamma (0.3), amplitude (1), phase (0), center (0), y0 (0)
//   projectile:          x0 (-1), y0 (0), vx (0.5), vy (4), g (9.8)
//   two_body:            G (1), m1 (1), m2 (3), separation (1), phase (0), com_x (0), com_y (0)
//   single_pendulum:     g (9.8), length (1), theta0 (0.3), omega0 (0)
//   double_pendulum:     g (9.8), m1 (1), m2 (1), length1 (1), length2 (1), theta1 (0.5), theta2 (0.5),
//                        omega1 (0), omega2 (0)
// Two-body tracks the first body on a circular orbit about the centre of
// mass; the double pendulum tracks the outer bob.
struct SystemSpec {
    SystemKind kind = SystemKind::SpringMass;
    std::map<std::string, double> params;
    double duration = 5.0;     // s
    double sample_rate = 20.0; // Hz
    PixelMap pixels;
    // Relative spread applied to initial-state parameters by generate() using
    // the seed; 0 keeps the initial state exactly as given.
    double initial_state_jitter = 0.0;

    double param(const std::string& name) const; // falls back to the default
    void validate() const;                       // throws std::invalid_argument
};

struct GroundTruth {
    Trajectory trajectory;
    std::optional<Expr> analytic_x;
    std::optional<Expr> analytic_y;
    SystemSpec spec; // with the initial state actually used
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Applies the seeded initial-state jitter (identity when jitter is 0).
SystemSpec realize_initial_state(const SystemSpec& spec, std::uint64_t seed);

GroundTruth generate(const SystemSpec& spec, std::uint64_t seed);

// (x(t), y(t)) in pixel coordinates, constants substituted from the spec;
// nullopt for the pendulum systems.
std::optional<std::pair<Expr, Expr>> analytic_equation(const SystemSpec& spec);

Trajectory add_noise(const Trajectory& traj, double sigma, std::uint64_t seed);

// Fixed-step RK4 for the pendulum systems, exposed for convergence studies.
struct PendulumSample {
    double t = 0.0;
    double theta = 0.0;
    double omega = 0.0;
};

std::vector<PendulumSample> integrate_single_pendulum(
    double g, double length, double theta0, double omega0, double duration, double step, double sample_interval);

// Energy per unit mass with the potential zero at the lowest point.
double single_pendulum_energy(double g, double length, double theta, double omega);

struct DoublePendulumState {
    double theta1 = 0.0, omega1 = 0.0, theta2 = 0.0, omega2 = 0.0;
};

struct DoublePendulumParams {
    double g = 9.8, m1 = 1.0, m2 = 1.0, length1 = 1.0, length2 = 1.0;
};

std::vector<std::pair<double, DoublePendulumState>> integrate_double_pendulum(const DoublePendulumParams& p,
    DoublePendulumState initial, double duration, double step, double sample_interval);

double double_pendulum_energy(const DoublePendulumParams& p, const DoublePendulumState& s);

} // namespace resr
