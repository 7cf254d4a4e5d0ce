// SPDX-License-Identifier: MIT

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "resr/retrieval.hpp"
#include "support/oracles.hpp"

using namespace resr;

namespace {

EquationBank from_text(const std::string& text)
{
    std::istringstream in(text);
    return read_bank(in, "test");
}

std::vector<double> grid(double t0, double t1, double dt)
{
    std::vector<double> t;
    for (int i = 0; t0 + i * dt <= t1 + 1e-9; ++i) t.push_back(t0 + i * dt);
    return t;
}

std::vector<double> sample(const std::string& text, const std::vector<double>& t)
{
    return evaluate(parse(text), EvalContext(t, false));
}

std::vector<std::string> ids(const RetrievalResult& r)
{
    std::vector<std::string> out;
    for (const auto& h : r.ranked) out.push_back(h.id);
    return out;
}

} // namespace

TEST_SUITE("retrieval")
{
    TEST_CASE("rescale_to_range")
    {
        const double a[] = {0.0, 5.0, 10.0};
        CHECK(rescale_to_range(a, 0.0, 1.0) == std::vector<double>{0.0, 0.5, 1.0});
        const auto same = rescale_to_range(a, 0.0, 10.0);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(same[i] - a[i]) <= 1e-12);
        const double flat[] = {7.0, 7.0, 7.0};
        CHECK(rescale_to_range(flat, 2.0, 4.0) == std::vector<double>{3.0, 3.0, 3.0});
        CHECK(rescale_to_range(a, 4.0, 4.0) == std::vector<double>{4.0, 4.0, 4.0});
        CHECK_THROWS_AS(rescale_to_range(std::span<const double>{}, 0.0, 1.0), std::invalid_argument);
    }

    TEST_CASE("dtw examples")
    {
        const std::vector<double> x{1.0, -2.0, 3.5};
        CHECK(dtw_distance(x, x) == 0.0);
        CHECK(dtw_distance(std::vector<double>{0, 2}, std::vector<double>{0, 0}) == 2.0);
        CHECK(dtw_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 2, 3}) == 0.0);
        CHECK(dtw_distance(std::vector<double>{5}, std::vector<double>{1, 2}) == 7.0);
    }

    TEST_CASE("dtw agrees with warping-path enumeration")
    {
        std::mt19937_64 rng(99);
        std::uniform_int_distribution<int> len(1, 6);
        std::uniform_int_distribution<int> val(-4, 4);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> a(len(rng)), b(len(rng));
            for (auto& v : a) v = val(rng) * 0.5;
            for (auto& v : b) v = val(rng) * 0.5;
            CHECK(dtw_distance(a, b) == oracle::dtw_by_path_enumeration(a, b));
        }
    }

    TEST_CASE("dtw metric-like properties")
    {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> g;
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> a(3 + trial % 20), b(2 + trial % 17);
            for (auto& v : a) v = g(rng);
            for (auto& v : b) v = g(rng);
            CHECK(dtw_distance(a, a) == 0.0);
            CHECK(dtw_distance(a, b) >= 0.0);
            CHECK(dtw_distance(a, b) == doctest::Approx(dtw_distance(b, a)).epsilon(1e-12));
        }
    }

    TEST_CASE("Sakoe-Chiba band")
    {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> g;
        std::vector<double> a(30), b(30);
        for (auto& v : a) v = g(rng);
        for (auto& v : b) v = g(rng);
        double lockstep = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) lockstep += std::fabs(a[i] - b[i]);
        CHECK(dtw_distance(a, b, 0) == doctest::Approx(lockstep));
        CHECK(dtw_distance(a, b, 100) == dtw_distance(a, b));
        CHECK(dtw_distance(a, b, 3) >= dtw_distance(a, b));
        CHECK(dtw_distance(a, b, 3) <= dtw_distance(a, b, 1));
        std::vector<double> c(25);
        for (auto& v : c) v = g(rng);
        CHECK(std::isfinite(dtw_distance(a, c, 0)));
    }

    TEST_CASE("oscillation beats a constant of similar magnitude")
    {
        const auto t = grid(0.0, 8.0, 0.1);
        RetrievalQuery q{t, sample("0.5*cos(t + 3) + 100", t), 2, std::nullopt};
        const auto bank = from_text("const\tfeynman\t100\ncos\taugmented\tcos(t)\n");
        const auto r = retrieve_top_k(q, bank);
        REQUIRE(r.ranked.size() == 2);
        CHECK(r.ranked[0].id == "cos");
        CHECK(r.ranked[0].distance < r.ranked[1].distance);
        CHECK(r.ranked[0].range_min == doctest::Approx(-1.0).epsilon(1e-2));
    }

    TEST_CASE("an entry matching the observation ranks first at distance 0")
    {
        const auto& bank = load_bank(default_bank_path());
        const auto t = grid(0.0, 4.0, 0.05);
        const auto* target = bank.find("augmented.damped_sin");
        REQUIRE(target);
        RetrievalQuery q{t, materialize(*target, t), 5, std::nullopt};
        const auto r = retrieve_top_k(q, bank);
        CHECK(r.ranked[0].id == "augmented.damped_sin");
        CHECK(r.ranked[0].distance == doctest::Approx(0.0).epsilon(1e-12));
        for (std::size_t i = 1; i < r.ranked.size(); ++i) CHECK(r.ranked[i - 1].distance <= r.ranked[i].distance);
    }

    TEST_CASE("k larger than the bank returns the full ranking")
    {
        const auto bank = from_text("a\tnguyen\tt\nb\tnguyen\tsin(t)\nc\tnguyen\tt ^ 2\n");
        const auto t = grid(0.0, 3.0, 0.1);
        RetrievalQuery q{t, sample("2 * t + 1", t), 40, std::nullopt};
        const auto r = retrieve_top_k(q, bank);
        CHECK(r.ranked.size() == 3);
        CHECK(r.ranked[0].id == "a");
    }

    TEST_CASE("equal distances break ties on id")
    {
        const auto bank = from_text("z\tnguyen\t4 * t\nm\tnguyen\t2 * t\na\tnguyen\tt\n");
        const auto t = grid(0.0, 3.0, 0.1);
        RetrievalQuery q{t, sample("cos(t)", t), 3, std::nullopt};
        CHECK(ids(retrieve_top_k(q, bank)) == std::vector<std::string>{"a", "m", "z"});
    }

    TEST_CASE("ranking is invariant under positive affine transforms of the observation")
    {
        const auto& bank = load_bank(default_bank_path());
        const auto t = grid(0.0, 4.0, 0.05);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-500.0, 500.0);
        for (const char* source : {"0.5*cos(2*t + 1) + 100", "300 - 4.9 * t ^ 2 + 7 * t", "exp(-0.3 * t) * sin(3 * t)"}) {
            const auto base = sample(source, t);
            RetrievalQuery q{t, base, bank.size(), std::nullopt};
            const auto reference = ids(retrieve_top_k(q, bank));
            for (int trial = 0; trial < 5; ++trial) {
                const double a = scale(rng), b = shift(rng);
                RetrievalQuery moved = q;
                for (auto& v : moved.values) v = a * v + b;
                CHECK(ids(retrieve_top_k(moved, bank)) == reference);
            }
        }
    }

    TEST_CASE("worker count does not change the result")
    {
        const auto& bank = load_bank(default_bank_path());
        const auto t = grid(0.0, 4.0, 0.05);
        RetrievalQuery q{t, sample("100 * cos(2 * t + 0.4) + 320", t), bank.size(), std::nullopt};
        const auto one = retrieve_top_k(q, bank, 1);
        for (std::size_t w : {2u, 4u, 7u}) {
            const auto many = retrieve_top_k(q, bank, w);
            REQUIRE(many.ranked.size() == one.ranked.size());
            for (std::size_t i = 0; i < one.ranked.size(); ++i) {
                CHECK(many.ranked[i].id == one.ranked[i].id);
                CHECK(many.ranked[i].distance == one.ranked[i].distance);
            }
        }
    }

    TEST_CASE("query validation and empty bank")
    {
        RetrievalQuery q{{0.0}, {1.0}, 1, std::nullopt};
        CHECK_THROWS_AS(q.validate(), std::invalid_argument);
        q = RetrievalQuery{{0.0, 1.0}, {1.0, 2.0}, 0, std::nullopt};
        CHECK_THROWS_AS(q.validate(), std::invalid_argument);
        q.k = 1;
        CHECK_THROWS_AS(retrieve_top_k(q, EquationBank{}), BankError);
    }
}
