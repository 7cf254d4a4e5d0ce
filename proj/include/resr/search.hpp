// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "resr/expr.hpp"

namespace resr {

// Fitness assigned to any candidate whose prediction is non-finite somewhere.
inline constexpr double kPenaltyMse = 1.0e12;

// add, sub, mul, div, pow, cos, sin, exp, log, tan, sqrt. Neg is parseable
// but never proposed by the search.
std::vector<NodeKind> default_operators();

struct ConstantBudget {
    std::size_t restarts = 8;
    std::size_t evaluations = 100; // per restart
};

enum class MutationOp {
    ReplaceKind,
    ReplaceSubtree,
    PerturbConstant,
    InsertUnary,
    DeleteUnary,
    Simplify,
};

std::string_view mutation_name(MutationOp op) noexcept;

struct MutationWeights {
    double replace_kind = 1.0;
    double replace_subtree = 1.0;
    double perturb_constant = 2.0;
    double insert_unary = 0.5;
    double delete_unary = 0.5;
    double simplify = 0.5;

    double weight(MutationOp op) const noexcept;
};

struct SearchConfig {
    std::size_t n_iterations = 100;
    std::size_t n_populations = 30;
    std::size_t population_size = 30;
    double alpha = 0.75;
    std::size_t top_k_retrieval = 10;
    std::vector<NodeKind> operators = default_operators();
    std::size_t max_complexity = 30;
    double parsimony = 1e-3;
    std::size_t tournament_size = 5;
    double crossover_probability = 0.25;
    MutationWeights mutation;
    ConstantBudget constant_budget;           // full refit of seeds and population bests
    ConstantBudget offspring_budget{1, 40};   // capped fit on every offspring
    std::size_t migration_count = 1;          // front members copied into each population per iteration
    std::size_t init_max_depth = 5;
    double init_constant_range = 10.0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    // Throws std::invalid_argument on alpha outside [0,1], zero budgets or
    // sizes, an operator outside the default set, or a tournament larger
    // than the population.
    void validate() const;
};

// Observed samples for one axis.
struct Series {
    std::vector<double> t;
    std::vector<double> y;

    std::size_t size() const noexcept { return t.size(); }
};

struct Candidate {
    Expr expr;
    double mse = kPenaltyMse;
    std::size_t complexity = 1;
    std::size_t age = 0;    // iteration of birth, 0 for the initial population
    bool refit = false;     // a full refit since the last change no longer halved the MSE
    bool seeded = false;    // copied from a retrieved equation at initialization

    double score(double parsimony) const noexcept { return mse * (1.0 + parsimony * static_cast<double>(complexity)); }
};

// Mean squared error over the series; kPenaltyMse when any prediction (or the
// sum) is non-finite. The Evaluator overloads reuse its buffers.
double series_mse(const Expr& e, const Series& s, bool protected_ops = true);
double series_mse(Evaluator& ev, std::span<const Node> nodes, const Series& s, bool protected_ops, std::vector<double>& scratch);

// Train MSE of an already-fitted candidate under protected operators.
double fitness(const Candidate& c, const Series& train);

// Simplex descent over the constant vector: the first start is the current
// values, later ones perturb the best point found so far. The returned
// expression never has a higher train MSE than `e`. `mse_out` receives it.
Expr optimize_constants(const Expr& e, const Series& train, ConstantBudget budget, std::mt19937_64& rng,
    double* mse_out = nullptr);

// Best per complexity level seen so far.
class ParetoFront {
public:
    // Keeps `c` if it beats the stored candidate of the same complexity (or
    // none exists). Returns true when stored.
    bool offer(const Candidate& c);

    // Members whose MSE strictly improves on every simpler member, by
    // increasing complexity.
    std::vector<Candidate> front() const;
    const std::map<std::size_t, Candidate>& levels() const noexcept { return levels_; }
    // Lowest MSE overall, ties to lower complexity. Null when empty.
    const Candidate* best() const;
    bool empty() const noexcept { return levels_.empty(); }

private:
    std::map<std::size_t, Candidate> levels_;
};

struct ConvergenceRecord {
    std::size_t iteration = 0; // 1-based
    double best_train_mse = kPenaltyMse;
    double best_val_mse = kPenaltyMse;
    std::string best_expr; // front member with the best validation MSE (train MSE without validation data)
};

using ConvergenceLog = std::vector<ConvergenceRecord>;

// Grow-method random tree over the configured operators. Leaves are t or a
// constant U[-range, range]; pow exponents are constant-only. A lone leaf
// has depth 1.
Expr random_expr(std::mt19937_64& rng, const SearchConfig& config, std::size_t max_depth);

// One population: round(alpha * size) members (ties to even) taken from `retrieved`
// in rank order, cycling, then random trees up to the complexity cap. Seeds
// are simplified; seeds over the cap are skipped and reported in `warnings`.
// Constants are not fitted here.
std::vector<Candidate> initialize_population(const SearchConfig& config, std::span<const Expr> retrieved,
    std::mt19937_64& rng, std::vector<std::string>* warnings = nullptr);

Candidate mutate(const Candidate& c, std::mt19937_64& rng, const SearchConfig& config);
// Applies one specific operator; returns the parent unchanged when it does not
// apply or keeps exceeding the cap.
Candidate mutate(const Candidate& c, MutationOp op, std::mt19937_64& rng, const SearchConfig& config);

// Random subtree of `a` replaced by a random subtree of `b`.
Candidate crossover(const Candidate& a, const Candidate& b, std::mt19937_64& rng, const SearchConfig& config);

struct EvolveResult {
    ParetoFront front;
    ConvergenceLog log;
    std::vector<std::string> warnings;
    bool divergent = false; // every candidate stayed at the penalty sentinel
};

// Island-model steady-state search. `validation` (possibly empty) feeds the
// log only; it is evaluated with protected operators off. `stream` separates
// RNG streams of independent runs sharing a seed, e.g. the x and y axes.
EvolveResult evolve(const SearchConfig& config, const Series& train, const Series& validation,
    std::span<const Expr> retrieved, std::uint64_t stream = 0);

} // namespace resr
