// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <fstream>
#include <random>
#include <string>

#include "resr/expr.hpp"
#include "support/oracles.hpp"

using namespace resr;

namespace {

std::vector<std::string> golden_corpus()
{
    std::ifstream in(RESR_TEST_DIR "/golden/expr_roundtrip.txt");
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

ParseErrorKind parse_error_kind(const std::string& s)
{
    try {
        parse(s);
    } catch (const ParseError& e) {
        return e.kind();
    }
    FAIL("expected a parse error for: " << s);
    return ParseErrorKind::EmptyInput;
}

Expr c(double v) { return Expr::constant(v); }
Expr t() { return Expr::variable(); }
Expr add(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Add, a, b); }
Expr mul(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Mul, a, b); }
Expr pw(const Expr& a, const Expr& b) { return Expr::binary(NodeKind::Pow, a, b); }
Expr cos_(const Expr& a) { return Expr::unary(NodeKind::Cos, a); }

} // namespace

TEST_SUITE("expr_core")
{
    TEST_CASE("arity invariants are enforced at construction")
    {
        CHECK_THROWS_AS(Expr::constant(std::nan("")), std::invalid_argument);
        CHECK_THROWS_AS(Expr::unary(NodeKind::Add, t()), std::invalid_argument);
        CHECK_THROWS_AS(Expr::binary(NodeKind::Cos, t(), t()), std::invalid_argument);
        CHECK_THROWS_AS(Expr::from_preorder({Node{NodeKind::Add}, Node{NodeKind::Variable}}), std::invalid_argument);
        CHECK_THROWS_AS(Expr::from_preorder({Node{NodeKind::Variable}, Node{NodeKind::Variable}}), std::invalid_argument);
        CHECK(Expr::from_preorder({Node{NodeKind::Cos}, Node{NodeKind::Variable}}) == cos_(t()));
    }

    TEST_CASE("parse builds the expected trees")
    {
        CHECK(parse("t") == t());
        CHECK(parse("0.5*cos(t + 3) + 100") == add(mul(c(0.5), cos_(add(t(), c(3)))), c(100)));
        const auto e = parse("2^3^2");
        CHECK(e == pw(c(2), pw(c(3), c(2))));
        CHECK(evaluate(e, EvalContext({0.0}))[0] == doctest::Approx(512.0));
        CHECK(parse("-t^2") == Expr::unary(NodeKind::Neg, pw(t(), c(2))));
        CHECK(parse("-3") == c(-3));
        CHECK(parse("-3^2") == Expr::unary(NodeKind::Neg, pw(c(3), c(2))));
        CHECK(parse("-(3)") == Expr::unary(NodeKind::Neg, c(3)));
    }

    TEST_CASE("parse error variants carry byte offsets")
    {
        CHECK(parse_error_kind("") == ParseErrorKind::EmptyInput);
        CHECK(parse_error_kind("   ") == ParseErrorKind::EmptyInput);
        CHECK(parse_error_kind("x + 1") == ParseErrorKind::UnknownIdentifier);
        CHECK(parse_error_kind("(t + 1") == ParseErrorKind::UnbalancedParentheses);
        CHECK(parse_error_kind("t + 1)") == ParseErrorKind::UnbalancedParentheses);
        CHECK(parse_error_kind("cos(t, 1)") == ParseErrorKind::ArityMismatch);
        CHECK(parse_error_kind("cos()") == ParseErrorKind::ArityMismatch);
        CHECK(parse_error_kind("cos t") == ParseErrorKind::ArityMismatch);
        CHECK(parse_error_kind("t +") == ParseErrorKind::UnexpectedToken);
        CHECK(parse_error_kind("t $ 2") == ParseErrorKind::UnexpectedToken);
        CHECK(parse_error_kind("1e999") == ParseErrorKind::InvalidNumber);
        try {
            parse("2 * y");
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 4);
        }
        try {
            parse("cos(t");
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 3);
        }
    }

    TEST_CASE("print uses minimal parentheses")
    {
        CHECK(to_string(add(t(), c(1))) == "t + 1");
        CHECK(to_string(mul(add(t(), c(1)), c(2))) == "(t + 1) * 2");
        CHECK(to_string(pw(t(), c(0.5))) == "t ^ 0.5");
        CHECK(to_string(parse("100 - 4.9*t^2")) == "100 - 4.9 * t ^ 2");
        CHECK(to_string(parse("(-2)^2")) == "(-2) ^ 2");
        CHECK(to_string(parse("-(3)")) == "-(3)");
        CHECK(to_string(parse("t - (t - 1)")) == "t - (t - 1)");
    }

    TEST_CASE("golden corpus: round trip and independent calculator agree")
    {
        const auto corpus = golden_corpus();
        CHECK(corpus.size() >= 20);
        const double ts[] = {0.0, 0.3, 1.0, 2.5, 7.0};
        for (const auto& s : corpus) {
            CAPTURE(s);
            const Expr e = parse(s);
            const Expr back = parse(to_string(e));
            CHECK(back == e);
            for (double tv : ts) {
                const double want = oracle::calculate(s, tv);
                Evaluator ev;
                const double got = ev.evaluate_scalar(e, tv, false);
                if (std::isnan(want)) {
                    CHECK(std::isnan(got));
                } else if (std::isinf(want)) {
                    CHECK(got == want);
                } else {
                    CHECK(std::fabs(got - want) <= 1e-12 * (1.0 + std::fabs(want)));
                }
            }
        }
    }

    TEST_CASE("round trip holds for random trees up to depth 8")
    {
        std::mt19937_64 rng(42);
        for (int i = 0; i < 3000; ++i) {
            const Expr e = oracle::random_expr_with_depth(rng, 8);
            const std::string s = to_string(e);
            CAPTURE(s);
            CHECK(parse(s) == e);
        }
    }

    TEST_CASE("evaluate: identity, precise scalar values and protection")
    {
        CHECK(evaluate(t(), EvalContext({0.0, 1.0, 2.0})) == std::vector<double>{0.0, 1.0, 2.0});
        const auto v = evaluate(parse("0.5*cos(t+3)+100"), EvalContext({0.0}));
        CHECK(std::fabs(v[0] - (0.5 * std::cos(3.0) + 100.0)) < 1e-12);
        CHECK(std::fabs(v[0] - 99.505) < 1e-3);

        const auto p = evaluate(parse("1/t"), EvalContext({0.0, 1.0}, true));
        CHECK_FALSE(std::isfinite(p[0]));
        CHECK(p[1] == 1.0);

        const auto l = evaluate(parse("log(t - 1)"), EvalContext({0.0, 1.0, 2.0}, true));
        CHECK(l[0] == 0.0); // log|−1|
        CHECK(l[1] == kLogZeroSentinel);
        CHECK(l[2] == 0.0);
        const auto s = evaluate(parse("sqrt(t - 4)"), EvalContext({0.0}, true));
        CHECK(s[0] == 2.0);

        const auto raw = evaluate(parse("sqrt(t - 4) + log(t) + 1/t"), EvalContext({0.0, 1.0}, false));
        CHECK(std::isnan(raw[0]));
        CHECK(std::isnan(raw[1]));
        const auto inf = evaluate(parse("1/t"), EvalContext({0.0}, false));
        CHECK(std::isinf(inf[0]));
    }

    TEST_CASE("EvalContext invariants")
    {
        CHECK_THROWS_AS(EvalContext({}), std::invalid_argument);
        CHECK_THROWS_AS(EvalContext({0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(EvalContext({1.0, 0.5}), std::invalid_argument);
    }

    TEST_CASE("evaluation is bitwise deterministic")
    {
        std::mt19937_64 rng(7);
        std::vector<double> grid;
        for (int i = 0; i < 50; ++i) grid.push_back(0.1 * i);
        EvalContext ctx(grid);
        for (int i = 0; i < 200; ++i) {
            const Expr e = oracle::random_expr_with_depth(rng, 6);
            const auto a = evaluate(e, ctx);
            const auto b = evaluate(e, ctx);
            CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
        }
    }

    TEST_CASE("complexity counts nodes")
    {
        CHECK(complexity(t()) == 1);
        CHECK(complexity(cos_(t())) == 2);
        CHECK(complexity(parse("0.5*cos(t+3)+100")) == 8);
        // Recursive size oracle.
        std::function<std::size_t(const Expr&)> rsize = [&](const Expr& e) -> std::size_t {
            std::size_t n = 1;
            for (int k = 0; k < arity(e.root().kind); ++k) n += rsize(e.child(static_cast<std::size_t>(k)));
            return n;
        };
        std::mt19937_64 rng(3);
        for (int i = 0; i < 200; ++i) {
            const Expr e = oracle::random_expr_with_depth(rng, 7);
            CHECK(complexity(e) == rsize(e));
        }
    }

    TEST_CASE("simplify examples")
    {
        CHECK(simplify(add(t(), c(0))) == t());
        CHECK(simplify(mul(c(2), c(3))) == c(6));
        const Expr e = add(mul(c(0), cos_(t())), t());
        CHECK(simplify(e) == t());
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-20.0, 20.0);
        for (int i = 0; i < 100; ++i) {
            Evaluator ev;
            const double tv = u(rng);
            CHECK(ev.evaluate_scalar(e, tv, false) == doctest::Approx(ev.evaluate_scalar(simplify(e), tv, false)));
        }
        CHECK(simplify(parse("t - t")) == c(0));
        CHECK(simplify(parse("cos(t) - cos(t)")) == c(0));
        CHECK(simplify(parse("cos(t) - cos(t + 0)")) == c(0));
        CHECK(simplify(parse("--t")) == t());
        CHECK(simplify(parse("cos(t + t)")) == parse("cos(2 * t)"));
        CHECK(simplify(parse("sin(t) + sin(t)")) == parse("2 * sin(t)"));
        CHECK(simplify(parse("1/0 + t")) == parse("1/0 + t")); // non-finite folds are refused
        CHECK(simplify(parse("sqrt(-4)")) == parse("sqrt(-4)"));
    }

    TEST_CASE("simplify preserves semantics and never grows")
    {
        std::mt19937_64 rng(5);
        std::vector<double> grid;
        for (int i = 0; i < 40; ++i) grid.push_back(-4.0 + 0.2 * i + 1e-3);
        EvalContext ctx(grid, false);
        for (int i = 0; i < 3000; ++i) {
            const Expr e = oracle::random_expr_with_depth(rng, 6);
            const Expr s = simplify(e);
            CHECK(complexity(s) <= complexity(e));
            CHECK(complexity(s) >= 1);
            const auto a = evaluate(e, ctx);
            const auto b = evaluate(s, ctx);
            for (std::size_t k = 0; k < a.size(); ++k) {
                if (!std::isfinite(a[k])) continue;
                CAPTURE(to_string(e));
                CAPTURE(to_string(s));
                CHECK(std::fabs(a[k] - b[k]) <= 1e-12 * (1.0 + std::fabs(a[k])));
            }
        }
    }

    TEST_CASE("tree edit distance examples")
    {
        CHECK(tree_edit_distance(cos_(t()), cos_(t())) == 0);
        CHECK(tree_edit_distance(t(), cos_(t())) == 1);
        CHECK(tree_edit_distance(add(t(), c(1)), mul(t(), c(1))) == 1);
        CHECK(tree_edit_distance(parse("2*cos(3*t)"), parse("7.5*cos(-1*t)")) == 0);
        CHECK(normalized_ted_similarity(cos_(t()), cos_(t())) == 1.0);
        CHECK(normalized_ted_similarity(t(), cos_(t())) == 0.5);
        CHECK(normalized_ted_similarity(c(1), t()) == 0.0);
    }

    TEST_CASE("tree edit distance equals exhaustive mapping enumeration (<= 6 nodes)")
    {
        std::mt19937_64 rng(2024);
        std::uniform_int_distribution<std::size_t> sz(1, 6);
        for (int i = 0; i < 400; ++i) {
            const Expr a = oracle::random_expr_with_size(rng, sz(rng));
            const Expr b = oracle::random_expr_with_size(rng, sz(rng));
            CAPTURE(to_string(a));
            CAPTURE(to_string(b));
            CHECK(tree_edit_distance(a, b) == oracle::ted_by_mapping_enumeration(a, b));
        }
    }

    TEST_CASE("tree edit distance is a metric on small trees")
    {
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<std::size_t> sz(1, 8);
        for (int i = 0; i < 500; ++i) {
            const Expr a = oracle::random_expr_with_size(rng, sz(rng));
            const Expr b = oracle::random_expr_with_size(rng, sz(rng));
            const Expr x = oracle::random_expr_with_size(rng, sz(rng));
            CHECK(tree_edit_distance(a, a) == 0);
            CHECK(tree_edit_distance(a, b) == tree_edit_distance(b, a));
            CHECK(tree_edit_distance(a, x) <= tree_edit_distance(a, b) + tree_edit_distance(b, x));
        }
    }

    TEST_CASE("commutative canonicalization")
    {
        const Expr a = parse("100 + 2*cos(3*t)");
        const Expr b = parse("cos(3*t)*2 + 100");
        CHECK(tree_edit_distance(a, b) > 0);
        CHECK(commutative_tree_edit_distance(a, b) == 0);
        CHECK(commutative_ted_similarity(a, b) == 1.0);
        CHECK(commutative_tree_edit_distance(a, b) <= tree_edit_distance(a, b));
        // Canonicalization only swaps operands of commutative nodes.
        std::mt19937_64 rng(1);
        for (int i = 0; i < 200; ++i) {
            const Expr e = oracle::random_expr_with_depth(rng, 5);
            const Expr k = canonicalize_commutative(e);
            CHECK(complexity(k) == complexity(e));
            CHECK(canonicalize_commutative(k) == k);
        }
    }
}
