// SPDX-License-Identifier: MIT

#include "resr/search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resr/optimize.hpp"
#include "resr/parallel.hpp"

namespace resr {

namespace {

constexpr std::size_t kRetries = 5;

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t population)
{
    return splitmix(splitmix(splitmix(seed) ^ stream) ^ population);
}

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

std::vector<NodeKind> filtered(const SearchConfig& config, bool (*pred)(NodeKind) noexcept)
{
    std::vector<NodeKind> out;
    for (NodeKind k : config.operators)
        if (pred(k)) out.push_back(k);
    return out;
}

Expr random_constant(std::mt19937_64& rng, const SearchConfig& config)
{
    return Expr::constant(uniform(rng, -config.init_constant_range, config.init_constant_range));
}

Expr random_leaf(std::mt19937_64& rng, const SearchConfig& config)
{
    return chance(rng, 0.5) ? Expr::variable() : random_constant(rng, config);
}

Expr grow(std::mt19937_64& rng, const SearchConfig& config, std::size_t depth_left, bool root)
{
    constexpr double kLeafProbability = 0.3;
    if (depth_left == 0 || config.operators.empty() || (!root && chance(rng, kLeafProbability)))
        return random_leaf(rng, config);
    const NodeKind op = config.operators[pick(rng, config.operators.size())];
    if (is_unary(op)) return Expr::unary(op, grow(rng, config, depth_left - 1, false));
    Expr lhs = grow(rng, config, depth_left - 1, false);
    if (op == NodeKind::Pow) return Expr::binary(op, lhs, random_constant(rng, config));
    return Expr::binary(op, lhs, grow(rng, config, depth_left - 1, false));
}

Candidate make_candidate(Expr e, std::size_t age)
{
    Candidate c;
    c.complexity = complexity(e);
    c.expr = std::move(e);
    c.age = age;
    return c;
}

// Structural edit for one operator; nullopt when the operator does not apply.
std::optional<Expr> apply_mutation(const Expr& e, MutationOp op, std::mt19937_64& rng, const SearchConfig& config)
{
    switch (op) {
    case MutationOp::ReplaceKind: {
        const std::size_t i = pick(rng, e.size());
        const Node& n = e[i];
        if (n.kind == NodeKind::Constant) return e.replace_node(i, Node{NodeKind::Variable, 0.0});
        if (n.kind == NodeKind::Variable) return e.replace_node(i, random_constant(rng, config).root());
        auto pool = filtered(config, is_unary(n.kind) ? &is_unary : &is_binary);
        std::erase(pool, n.kind);
        if (pool.empty()) return std::nullopt;
        return e.replace_node(i, Node{pool[pick(rng, pool.size())], 0.0});
    }
    case MutationOp::ReplaceSubtree: {
        const std::size_t i = pick(rng, e.size());
        const std::size_t extra_levels = pick(rng, 3); // replacement depth 1..3
        return e.replace_subtree(i, grow(rng, config, extra_levels, extra_levels > 0));
    }
    case MutationOp::PerturbConstant: {
        std::vector<std::size_t> consts;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i].kind == NodeKind::Constant) consts.push_back(i);
        if (consts.empty()) return std::nullopt;
        const std::size_t i = consts[pick(rng, consts.size())];
        Node n = e[i];
        if (n.value == 0.0) {
            n.value = std::normal_distribution<double>(0.0, 1.0)(rng);
        } else {
            n.value *= std::exp(std::normal_distribution<double>(0.0, 0.5)(rng));
        }
        if (!std::isfinite(n.value)) return std::nullopt;
        return e.replace_node(i, n);
    }
    case MutationOp::InsertUnary: {
        const auto pool = filtered(config, &is_unary);
        if (pool.empty()) return std::nullopt;
        const std::size_t i = pick(rng, e.size());
        return e.replace_subtree(i, Expr::unary(pool[pick(rng, pool.size())], e.subtree(i)));
    }
    case MutationOp::DeleteUnary: {
        std::vector<std::size_t> unary;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (is_unary(e[i].kind)) unary.push_back(i);
        if (unary.empty()) return std::nullopt;
        const std::size_t i = unary[pick(rng, unary.size())];
        return e.replace_subtree(i, e.subtree(i + 1));
    }
    case MutationOp::Simplify:
        return simplify(e);
    }
    return std::nullopt;
}

constexpr MutationOp kAllOps[] = {MutationOp::ReplaceKind, MutationOp::ReplaceSubtree, MutationOp::PerturbConstant,
    MutationOp::InsertUnary, MutationOp::DeleteUnary, MutationOp::Simplify};

MutationOp draw_op(std::mt19937_64& rng, const MutationWeights& w)
{
    double weights[std::size(kAllOps)];
    for (std::size_t i = 0; i < std::size(kAllOps); ++i) weights[i] = w.weight(kAllOps[i]);
    std::discrete_distribution<std::size_t> d(std::begin(weights), std::end(weights));
    return kAllOps[d(rng)];
}

void fit(Candidate& c, const Series& train, ConstantBudget budget, std::mt19937_64& rng)
{
    double mse = kPenaltyMse;
    c.expr = optimize_constants(c.expr, train, budget, rng, &mse);
    c.mse = mse;
    c.complexity = complexity(c.expr);
}

// Order used for tournaments and replacement.
bool fitter(const Candidate& a, const Candidate& b, double parsimony)
{
    const double sa = a.score(parsimony), sb = b.score(parsimony);
    if (sa != sb) return sa < sb;
    return a.complexity < b.complexity;
}

void check_series(const Series& s, const char* what, std::size_t min_points)
{
    if (s.t.size() != s.y.size()) throw std::invalid_argument(std::string(what) + ": t and y differ in length");
    if (s.size() < min_points)
        throw std::invalid_argument(std::string(what) + ": needs at least " + std::to_string(min_points) + " points");
    for (double v : s.y)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite observation");
}

} // namespace

std::vector<NodeKind> default_operators()
{
    return {NodeKind::Add, NodeKind::Sub, NodeKind::Mul, NodeKind::Div, NodeKind::Pow, NodeKind::Cos, NodeKind::Sin,
        NodeKind::Exp, NodeKind::Log, NodeKind::Tan, NodeKind::Sqrt};
}

std::string_view mutation_name(MutationOp op) noexcept
{
    switch (op) {
    case MutationOp::ReplaceKind: return "replace_kind";
    case MutationOp::ReplaceSubtree: return "replace_subtree";
    case MutationOp::PerturbConstant: return "perturb_constant";
    case MutationOp::InsertUnary: return "insert_unary";
    case MutationOp::DeleteUnary: return "delete_unary";
    case MutationOp::Simplify: return "simplify";
    }
    return "?";
}

double MutationWeights::weight(MutationOp op) const noexcept
{
    switch (op) {
    case MutationOp::ReplaceKind: return replace_kind;
    case MutationOp::ReplaceSubtree: return replace_subtree;
    case MutationOp::PerturbConstant: return perturb_constant;
    case MutationOp::InsertUnary: return insert_unary;
    case MutationOp::DeleteUnary: return delete_unary;
    case MutationOp::Simplify: return simplify;
    }
    return 0.0;
}

void SearchConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw std::invalid_argument("search config: " + msg); };
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
    if (n_iterations == 0 || n_populations == 0 || population_size == 0) fail("iterations and population sizes must be positive");
    if (top_k_retrieval == 0) fail("top_k_retrieval must be positive");
    if (max_complexity == 0) fail("max_complexity must be positive");
    if (!(parsimony >= 0.0) || !std::isfinite(parsimony)) fail("parsimony must be a finite non-negative number");
    if (tournament_size == 0 || tournament_size > population_size) fail("tournament_size must lie in [1, population_size]");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) fail("crossover_probability must lie in [0, 1]");
    if (constant_budget.restarts == 0 || constant_budget.evaluations == 0) fail("constant budget must be positive");
    if (offspring_budget.restarts == 0 || offspring_budget.evaluations == 0) fail("offspring budget must be positive");
    if (!(init_constant_range > 0.0) || !std::isfinite(init_constant_range)) fail("init_constant_range must be positive");
    double total = 0.0;
    for (MutationOp op : kAllOps) {
        const double w = mutation.weight(op);
        if (!(w >= 0.0) || !std::isfinite(w)) fail("mutation weights must be finite and non-negative");
        total += w;
    }
    if (total <= 0.0) fail("at least one mutation weight must be positive");
    const auto allowed = default_operators();
    for (NodeKind k : operators)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            fail("operator " + std::string(kind_name(k)) + " is not supported");
}

double series_mse(Evaluator& ev, std::span<const Node> nodes, const Series& s, bool protected_ops, std::vector<double>& scratch)
{
    scratch.resize(s.size());
    ev.evaluate(nodes, s.t, protected_ops, scratch);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = scratch[i] - s.y[i];
        sum += d * d;
    }
    if (!std::isfinite(sum)) return kPenaltyMse;
    return std::min(sum / static_cast<double>(s.size()), kPenaltyMse);
}

double series_mse(const Expr& e, const Series& s, bool protected_ops)
{
    if (s.size() == 0) throw std::invalid_argument("series_mse: empty series");
    Evaluator ev;
    std::vector<double> scratch;
    return series_mse(ev, e.nodes(), s, protected_ops, scratch);
}

double fitness(const Candidate& c, const Series& train) { return series_mse(c.expr, train, true); }

Expr optimize_constants(const Expr& e, const Series& train, ConstantBudget budget, std::mt19937_64& rng, double* mse_out)
{
    if (train.size() == 0) throw std::invalid_argument("optimize_constants: empty series");
    thread_local Evaluator ev;
    thread_local std::vector<double> scratch;

    std::vector<Node> nodes(e.nodes().begin(), e.nodes().end());
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].kind == NodeKind::Constant) slots.push_back(i);

    // integral exponents, held fixed by the first start so polynomials reduce to a linear fit
    std::vector<bool> held(slots.size(), false);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind != NodeKind::Pow) continue;
        const std::size_t ex = e.subtree_end(i + 1);
        if (nodes[ex].kind != NodeKind::Constant || nodes[ex].value != std::round(nodes[ex].value)) continue;
        held[static_cast<std::size_t>(std::find(slots.begin(), slots.end(), ex) - slots.begin())] = true;
    }

    auto objective = [&](const std::vector<double>& x) {
        for (std::size_t k = 0; k < slots.size(); ++k) {
            if (!std::isfinite(x[k])) return std::numeric_limits<double>::infinity();
            nodes[slots[k]].value = x[k];
        }
        return series_mse(ev, nodes, train, true, scratch);
    };

    std::vector<double> best = e.constants();
    const double initial = objective(best);
    double best_value = initial;
    if (!slots.empty()) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> extent; // of the simplex that produced the incumbent
        for (std::size_t r = 0; r < budget.restarts && best_value > 0.0; ++r) {
            std::vector<double> start = best;
            std::vector<double> step(start.size());
            for (std::size_t k = 0; k < start.size(); ++k) step[k] = 0.1 * std::max(std::fabs(start[k]), 0.1);
            if (r % 2 == 1) {
                // odd restarts continue from the incumbent at the scale its simplex had reached, or on a
                // shrinking schedule when the incumbent came from outside this call
                const double shrink = std::pow(0.1, static_cast<double>((r + 1) / 2));
                for (std::size_t k = 0; k < start.size(); ++k) {
                    const double s = extent.empty() ? step[k] * shrink : 10.0 * extent[k];
                    step[k] = std::clamp(s, 1e-9 * std::max(std::fabs(start[k]), 1.0), step[k]);
                }
            } else if (r > 0) {
                for (double& v : start) v = v * (1.0 + 0.5 * gauss(rng)) + 0.1 * gauss(rng);
            }

            std::vector<std::size_t> free;
            for (std::size_t k = 0; k < slots.size(); ++k)
                if (r > 0 || !held[k]) free.push_back(k);
            if (free.empty()) continue;
            std::vector<double> sub_start, sub_step;
            for (std::size_t k : free) {
                sub_start.push_back(start[k]);
                sub_step.push_back(step[k]);
            }
            std::vector<double> full = start;
            auto sub_objective = [&](const std::vector<double>& x) {
                for (std::size_t j = 0; j < free.size(); ++j) full[free[j]] = x[j];
                return objective(full);
            };
            auto res = nelder_mead(sub_objective, sub_start, sub_step, budget.evaluations);
            if (res.value < best_value) {
                best_value = res.value;
                best = start;
                extent.assign(slots.size(), 0.0);
                for (std::size_t j = 0; j < free.size(); ++j) {
                    best[free[j]] = res.x[j];
                    extent[free[j]] = res.extent[j];
                }
            }
        }
    }
    if (mse_out) *mse_out = std::min(best_value, initial);
    if (best_value < initial) return e.with_constants(best);
    return e;
}

bool ParetoFront::offer(const Candidate& c)
{
    if (!(c.mse < kPenaltyMse)) return false;
    auto it = levels_.find(c.complexity);
    if (it != levels_.end() && !(c.mse < it->second.mse)) return false;
    levels_.insert_or_assign(c.complexity, c);
    return true;
}

std::vector<Candidate> ParetoFront::front() const
{
    std::vector<Candidate> out;
    for (const auto& [cx, c] : levels_)
        if (out.empty() || c.mse < out.back().mse) out.push_back(c);
    return out;
}

const Candidate* ParetoFront::best() const
{
    const Candidate* best = nullptr;
    for (const auto& [cx, c] : levels_)
        if (!best || c.mse < best->mse) best = &c;
    return best;
}

Expr random_expr(std::mt19937_64& rng, const SearchConfig& config, std::size_t max_depth)
{
    const std::size_t below_root = max_depth > 0 ? max_depth - 1 : 0;
    for (int attempt = 0; attempt < 100; ++attempt) {
        Expr e = grow(rng, config, below_root, true);
        if (complexity(e) <= config.max_complexity) return e;
    }
    // cap far below the depth's reach: fall back to shallow trees
    for (;;) {
        Expr e = grow(rng, config, std::min<std::size_t>(below_root, 2), false);
        if (complexity(e) <= config.max_complexity) return e;
    }
}

std::vector<Candidate> initialize_population(const SearchConfig& config, std::span<const Expr> retrieved,
    std::mt19937_64& rng, std::vector<std::string>* warnings)
{
    std::vector<Expr> seeds;
    for (const Expr& e : retrieved) {
        Expr s = simplify(e);
        if (complexity(s) > config.max_complexity) {
            if (warnings)
                warnings->push_back("seed " + to_string(e) + " exceeds max complexity " +
                    std::to_string(config.max_complexity) + " and is skipped");
            continue;
        }
        seeds.push_back(std::move(s));
    }
    if (seeds.empty() && config.alpha > 0.0 && warnings)
        warnings->push_back("no usable retrieved equations; population is fully random");

    const auto n_seed = seeds.empty()
        ? std::size_t{0}
        : std::min(config.population_size,
              // ties to even: 0.75 * 30 gives 22 seeds
              static_cast<std::size_t>(std::nearbyint(config.alpha * static_cast<double>(config.population_size))));
    std::vector<Candidate> pop;
    pop.reserve(config.population_size);
    for (std::size_t i = 0; i < n_seed; ++i) {
        pop.push_back(make_candidate(seeds[i % seeds.size()], 0));
        pop.back().seeded = true;
    }
    while (pop.size() < config.population_size)
        pop.push_back(make_candidate(random_expr(rng, config, config.init_max_depth), 0));
    return pop;
}

Candidate mutate(const Candidate& c, MutationOp op, std::mt19937_64& rng, const SearchConfig& config)
{
    for (std::size_t attempt = 0; attempt < kRetries; ++attempt) {
        auto e = apply_mutation(c.expr, op, rng, config);
        if (!e) return c;
        if (complexity(*e) <= config.max_complexity) return make_candidate(std::move(*e), c.age);
    }
    return c;
}

Candidate mutate(const Candidate& c, std::mt19937_64& rng, const SearchConfig& config)
{
    for (std::size_t attempt = 0; attempt < kRetries; ++attempt) {
        auto e = apply_mutation(c.expr, draw_op(rng, config.mutation), rng, config);
        if (e && complexity(*e) <= config.max_complexity) return make_candidate(std::move(*e), c.age);
    }
    return c;
}

Candidate crossover(const Candidate& a, const Candidate& b, std::mt19937_64& rng, const SearchConfig& config)
{
    for (std::size_t attempt = 0; attempt < kRetries; ++attempt) {
        const std::size_t i = pick(rng, a.expr.size());
        const std::size_t j = pick(rng, b.expr.size());
        Expr e = a.expr.replace_subtree(i, b.expr.subtree(j));
        if (complexity(e) <= config.max_complexity) return make_candidate(std::move(e), a.age);
    }
    return a;
}

EvolveResult evolve(const SearchConfig& config, const Series& train, const Series& validation,
    std::span<const Expr> retrieved, std::uint64_t stream)
{
    config.validate();
    check_series(train, "evolve train series", 10);
    if (validation.size() > 0) check_series(validation, "evolve validation series", 1);

    const std::size_t n_pop = config.n_populations;
    const double parsimony = config.parsimony;
    std::vector<std::vector<Candidate>> pops(n_pop);
    std::vector<std::mt19937_64> rngs(n_pop);
    std::vector<std::vector<std::string>> init_warnings(n_pop);
    EvolveResult result;

    parallel_for(n_pop, config.workers, [&](std::size_t p) {
        auto& rng = rngs[p];
        rng.seed(stream_seed(config.seed, stream, p));
        pops[p] = initialize_population(config, retrieved, rng, &init_warnings[p]);
        for (auto& c : pops[p]) {
            fit(c, train, c.seeded ? config.constant_budget : config.offspring_budget, rng);
            c.refit = false;
        }
    });
    result.warnings = init_warnings.front();
    for (const auto& pop : pops)
        for (const auto& c : pop) result.front.offer(c);

    auto tournament = [&](const std::vector<Candidate>& pop, std::mt19937_64& rng) {
        std::size_t winner = pick(rng, pop.size());
        std::size_t loser = winner;
        for (std::size_t k = 1; k < config.tournament_size; ++k) {
            const std::size_t i = pick(rng, pop.size());
            if (fitter(pop[i], pop[winner], parsimony)) winner = i;
            if (fitter(pop[loser], pop[i], parsimony)) loser = i;
        }
        return std::pair{winner, loser};
    };

    Evaluator val_ev;
    std::vector<double> val_scratch;
    for (std::size_t iter = 1; iter <= config.n_iterations; ++iter) {
        const auto snapshot = result.front.front();
        parallel_for(n_pop, config.workers, [&](std::size_t p) {
            auto& pop = pops[p];
            auto& rng = rngs[p];
            for (std::size_t m = 0; m < config.migration_count && !snapshot.empty(); ++m) {
                auto worst = std::max_element(pop.begin(), pop.end(),
                    [&](const Candidate& a, const Candidate& b) { return fitter(a, b, parsimony); });
                *worst = snapshot[pick(rng, snapshot.size())];
            }
            for (std::size_t o = 0; o < config.population_size; ++o) {
                const auto [winner, loser] = tournament(pop, rng);
                Candidate child = pop[winner];
                if (chance(rng, config.crossover_probability)) {
                    const auto [mate, unused] = tournament(pop, rng);
                    child = crossover(child, pop[mate], rng, config);
                }
                child = mutate(child, rng, config);
                fit(child, train, config.offspring_budget, rng);
                child.age = iter;
                child.refit = false;
                child.seeded = false;
                assert(child.complexity <= config.max_complexity);
                pop[loser] = std::move(child);
            }
            auto best = std::min_element(pop.begin(), pop.end(),
                [&](const Candidate& a, const Candidate& b) { return fitter(a, b, parsimony); });
            if (!best->refit) {
                // repeated while it still pays off
                const double before = best->mse;
                fit(*best, train, config.constant_budget, rng);
                best->refit = !(best->mse < 0.5 * before);
            }
        });
        for (const auto& pop : pops)
            for (const auto& c : pop) result.front.offer(c);

        ConvergenceRecord rec;
        rec.iteration = iter;
        if (const Candidate* b = result.front.best()) {
            rec.best_train_mse = b->mse;
            rec.best_expr = to_string(b->expr);
            if (validation.size() > 0) {
                rec.best_val_mse = std::numeric_limits<double>::infinity();
                for (const auto& c : result.front.front()) {
                    const double v = series_mse(val_ev, c.expr.nodes(), validation, false, val_scratch);
                    if (v < rec.best_val_mse) {
                        rec.best_val_mse = v;
                        rec.best_expr = to_string(c.expr);
                    }
                }
            } else {
                rec.best_val_mse = std::numeric_limits<double>::quiet_NaN();
            }
        }
        result.log.push_back(std::move(rec));
    }
    result.divergent = result.front.empty();
    return result;
}

} // namespace resr
