#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "codonflow/errors.hpp"
#include "codonflow/metrics.hpp"
#include "codonflow/oracle.hpp"
#include "oracles.hpp"

using namespace codonflow;

namespace {
const WeightVector kW{0.3, 0.3, 0.4};
}

TEST(Oracle, MetPheLys) {
    ObjectiveSettings settings;
    auto space = enumerate(Protein::from_string("MFK"), settings);
    ASSERT_EQ(space.size(), 4u);
    std::vector<std::string> got;
    for (const auto& d : space.designs) got.push_back(d.str());
    EXPECT_EQ(got, (std::vector<std::string>{"AUGUUUAAA", "AUGUUUAAG", "AUGUUCAAA", "AUGUUCAAG"}));
}

TEST(Oracle, SmallSpaces) {
    ObjectiveSettings settings;
    EXPECT_EQ(enumerate(Protein::from_string("M"), settings).size(), 1u);
    EXPECT_EQ(enumerate(Protein::from_string("LL"), settings).size(), 36u);
}

TEST(Oracle, EnumerationMatchesCartesianProduct) {
    std::mt19937_64 rng(8);
    const std::string letters = "ACDEFGHIKLMNPQRSTVWY";
    ObjectiveSettings settings;
    for (int trial = 0; trial < 20; ++trial) {
        std::string protein;
        const std::size_t len = 1 + rng() % 8;
        for (std::size_t i = 0; i < len; ++i) protein += letters[rng() % letters.size()];
        auto expect = oracle::all_designs(protein);
        if (expect.size() > 20000) continue;
        std::vector<std::string> got;
        for_each_design(Protein::from_string(protein), [&](const MrnaSequence& x) { got.push_back(x.str()); });
        EXPECT_EQ(got.size(), expect.size()) << protein;
        std::set<std::string> a(got.begin(), got.end()), b(expect.begin(), expect.end());
        EXPECT_EQ(a, b) << protein;
        for (const auto& d : got) EXPECT_EQ(translate(MrnaSequence::from_string(d)).str(), protein);
    }
}

TEST(Oracle, CapRefusesWithExactSize) {
    try {
        check_enumerable(Protein::from_string("LLLLLLLLLLLL"), 1'000'000);
        FAIL() << "expected CapExceededError";
    } catch (const CapExceededError& e) {
        EXPECT_EQ(e.exact_size(), "2176782336");
    }
    EXPECT_NO_THROW(check_enumerable(Protein::from_string("LLLLLLL"), 1'000'000));
}

TEST(Oracle, TvDistance) {
    std::map<std::string, double> p{{"a", 0.5}, {"b", 0.5}}, q{{"a", 0.25}, {"b", 0.75}};
    EXPECT_NEAR(tv_distance(p, q), 0.25, 1e-15);
    EXPECT_EQ(tv_distance(p, p), 0.0);
    std::map<std::string, double> x{{"a", 1.0}, {"b", 0.0}}, y{{"a", 0.0}, {"b", 1.0}};
    EXPECT_DOUBLE_EQ(tv_distance(x, y), 1.0);
    std::map<std::string, double> r{{"a", 0.1}, {"b", 0.9}};
    EXPECT_DOUBLE_EQ(tv_distance(p, q), tv_distance(q, p));
    EXPECT_LE(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-15);
}

TEST(Oracle, TvDistanceFromCounts) {
    std::map<std::string, double> exact{{"a", 0.25}, {"b", 0.75}};
    std::map<std::string, std::size_t> counts{{"a", 5}, {"b", 5}};
    EXPECT_NEAR(tv_distance(counts, exact), 0.25, 1e-15);
    std::map<std::string, std::size_t> only_b{{"b", 4}};
    EXPECT_NEAR(tv_distance(only_b, exact), 0.25, 1e-15);
    std::map<std::string, std::size_t> stray{{"a", 1}, {"z", 1}};
    try {
        tv_distance(stray, exact);
        FAIL() << "expected SupportMismatchError";
    } catch (const SupportMismatchError& e) {
        EXPECT_EQ(e.extra(), std::vector<std::string>{"z"});
    }
}

TEST(Oracle, ExactDistribution) {
    const std::vector<double> r{1.0, 3.0};
    auto p = exact_distribution(r);
    EXPECT_DOUBLE_EQ(p[0], 0.25);
    EXPECT_DOUBLE_EQ(p[1], 0.75);
    auto u = exact_distribution(std::vector<double>(6, 2.0));
    for (double v : u) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);

    ObjectiveSettings settings;
    auto space = enumerate(Protein::from_string("MFK"), settings);
    auto probs = exact_distribution(space, kW, settings.reward_floor);
    ASSERT_EQ(probs.size(), 4u);
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
    double z = 0.0;
    for (const auto& d : oracle::all_designs("MFK")) z += reward(MrnaSequence::from_string(d), kW, settings);
    EXPECT_NEAR(partition_function(space, kW, settings.reward_floor), z, 1e-12);
    for (std::size_t i = 0; i < space.size(); ++i)
        EXPECT_NEAR(probs[i], reward(space.designs[i], kW, settings) / z, 1e-12);
}

TEST(Oracle, ObjectivesMatchDirectEvaluation) {
    ObjectiveSettings settings;
    auto space = enumerate(Protein::from_string("MWKLC"), settings, 1'000'000, 3);
    for (std::size_t i = 0; i < space.size(); ++i) {
        auto direct = evaluate_objectives(space.designs[i], settings);
        EXPECT_EQ(space.objectives[i].phi, direct.phi);
    }
}

TEST(Oracle, ExactFrontMatchesMetrics) {
    ObjectiveSettings settings;
    for (const std::string protein : {"MFK", "LL", "LKA", "RSW"}) {
        auto space = enumerate(Protein::from_string(protein), settings);
        auto front = exact_pareto_front(space);
        auto samples = space.samples(kW, settings.reward_floor);
        std::set<std::string> a(front.begin(), front.end()), b;
        for (const auto& s : pareto_front(samples)) b.insert(s.design.str());
        EXPECT_EQ(a, b) << protein;

        std::vector<std::array<double, 3>> points;
        for (const auto& o : space.objectives) points.push_back(o.phi);
        std::set<std::string> c;
        for (auto i : brute_force_front(points)) c.insert(space.designs[i].str());
        EXPECT_EQ(a, c) << protein;
    }
}
