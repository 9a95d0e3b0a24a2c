#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "codonflow/environment.hpp"
#include "codonflow/errors.hpp"

using namespace codonflow;

namespace {

Action codon(const char* s) { return Action::codon(codon_from_string(s)); }

std::size_t allowed(const ActionMask& m) { return m.count(); }

}  // namespace

TEST(Environment, InitialState) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    auto s = env.initial_state();
    EXPECT_EQ(s.slots(), (std::vector<int>{-1, -1, -1}));
    EXPECT_EQ(s.fill_count(), 0u);
    EXPECT_EQ(CodonDesignEnv(Protein::from_string("M")).initial_state().slots(), std::vector<int>{-1});
    EXPECT_THROW(State(0), InputError);
}

TEST(Environment, ForwardMasks) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    auto s0 = env.initial_state();
    auto m0 = env.forward_mask(s0);
    EXPECT_EQ(allowed(m0), 1u);
    EXPECT_TRUE(m0.test(codon_from_string("AUG").index()));
    auto s1 = std::get<State>(env.step(s0, codon("AUG")));
    auto m1 = env.forward_mask(s1);
    EXPECT_EQ(allowed(m1), 2u);
    EXPECT_TRUE(m1.test(codon_from_string("UUU").index()));
    EXPECT_TRUE(m1.test(codon_from_string("UUC").index()));
    EXPECT_FALSE(m1.test(kExitAction));
    auto s2 = std::get<State>(env.step(s1, codon("UUU")));
    auto s3 = std::get<State>(env.step(s2, codon("AAA")));
    auto m3 = env.forward_mask(s3);
    EXPECT_EQ(allowed(m3), 1u);
    EXPECT_TRUE(m3.test(kExitAction));
}

TEST(Environment, StepAndTerminal) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    auto s = std::get<State>(env.step(env.initial_state(), codon("AUG")));
    EXPECT_EQ(s.slots(), (std::vector<int>{codon_from_string("AUG").index(), -1, -1}));
    s = std::get<State>(env.step(s, codon("UUU")));
    s = std::get<State>(env.step(s, codon("AAA")));
    auto done = env.step(s, Action::exit());
    ASSERT_TRUE(std::holds_alternative<Terminal>(done));
    EXPECT_EQ(std::get<Terminal>(done).design.str(), "AUGUUUAAA");
}

TEST(Environment, IllegalActionsAreErrors) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    EXPECT_THROW(env.step(env.initial_state(), codon("UUU")), IllegalActionError);
    EXPECT_THROW(env.step(env.initial_state(), Action::exit()), IllegalActionError);
    EXPECT_THROW(Action(65), InputError);
    EXPECT_THROW(Action(-1), InputError);
}

TEST(Environment, BackwardMaskAndBackstep) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    auto s0 = env.initial_state();
    EXPECT_THROW(env.backward_mask(s0), NoParentError);
    EXPECT_THROW(env.backstep(s0), NoParentError);
    auto s1 = std::get<State>(env.step(s0, codon("AUG")));
    auto s2 = std::get<State>(env.step(s1, codon("UUU")));
    EXPECT_EQ(env.backward_mask(s2), (BackwardMask{false, true, false}));
    EXPECT_EQ(env.backward_mask(s1), (BackwardMask{true, false, false}));
    EXPECT_EQ(env.backstep(s2), s1);
    EXPECT_EQ(env.parent_count(s0), 0u);
    EXPECT_EQ(env.parent_count(s2), 1u);
    EXPECT_TRUE(CodonDesignEnv::is_tree());
}

TEST(Environment, LongProteinBackwardMask) {
    std::string p(150, 'L');
    CodonDesignEnv env(Protein::from_string(p));
    State s = env.initial_state();
    for (int i = 0; i < 120; ++i) s = std::get<State>(env.step(s, codon("CUG")));
    auto m = env.backward_mask(s);
    EXPECT_EQ(std::count(m.begin(), m.end(), true), 1);
    EXPECT_TRUE(m[119]);
}

TEST(Environment, CheckStateRejectsInconsistentStates) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    EXPECT_THROW(env.forward_mask(State(2)), InvariantError);
    CodonDesignEnv other(Protein::from_string("LFK"));
    auto s = std::get<State>(other.step(other.initial_state(), codon("CUG")));
    EXPECT_THROW(env.forward_mask(s), InvariantError);
}

// Builds the full state graph of small proteins by forward expansion and checks in-degree,
// leaf count and mask soundness.
TEST(Environment, TreePropertyAndLeafCount) {
    std::mt19937_64 rng(2);
    const std::string letters = "ACDEFGHIKLMNPQRSTVWY";
    for (int trial = 0; trial < 25; ++trial) {
        std::string text;
        const auto len = 1 + rng() % 6;
        for (std::size_t i = 0; i < len; ++i) text += letters[rng() % letters.size()];
        const Protein p = Protein::from_string(text);
        CodonDesignEnv env(p);
        std::map<std::vector<int>, int> in_degree;
        std::vector<State> frontier{env.initial_state()};
        std::size_t leaves = 0;
        while (!frontier.empty()) {
            State s = frontier.back();
            frontier.pop_back();
            auto mask = env.forward_mask(s);
            if (s.is_complete()) {
                ++leaves;
                EXPECT_EQ(mask.count(), 1u);
                continue;
            }
            const auto syn = synonymous_codons(p[s.fill_count()]);
            EXPECT_EQ(mask.count(), syn.size());
            for (int a = 0; a < kNumCodons; ++a) {
                if (!mask.test(a)) continue;
                EXPECT_EQ(Codon(a).amino_acid(), p[s.fill_count()]);
                auto next = std::get<State>(env.step(s, Action(a)));
                EXPECT_EQ(env.backstep(next), s);
                ++in_degree[next.slots()];
                frontier.push_back(next);
            }
        }
        EXPECT_EQ(leaves, design_space_size(p));
        for (const auto& [slots, deg] : in_degree) EXPECT_EQ(deg, 1);
    }
}

TEST(Environment, RandomRolloutsAreValid) {
    std::mt19937_64 rng(9);
    const std::string letters = "ACDEFGHIKLMNPQRSTVWY";
    for (int trial = 0; trial < 40; ++trial) {
        std::string text;
        const auto len = 10 + rng() % 51;
        for (std::size_t i = 0; i < len; ++i) text += letters[rng() % letters.size()];
        const Protein p = Protein::from_string(text);
        CodonDesignEnv env(p);
        State s = env.initial_state();
        while (!s.is_complete()) {
            auto mask = env.forward_mask(s);
            std::vector<int> ok;
            for (int a = 0; a < kNumActions; ++a)
                if (mask.test(a)) ok.push_back(a);
            s = std::get<State>(env.step(s, Action(ok[rng() % ok.size()])));
        }
        auto x = std::get<Terminal>(env.step(s, Action::exit())).design;
        EXPECT_EQ(translate(x), p);
    }
}
