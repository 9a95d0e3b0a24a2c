#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "codonflow/errors.hpp"
#include "codonflow/optimizer.hpp"
#include "codonflow/policy.hpp"
#include "codonflow/training.hpp"
#include "oracles.hpp"

using namespace codonflow;

namespace {

const WeightVector kW{0.3, 0.3, 0.4};

std::map<std::string, double> reward_table(const std::string& protein, const WeightVector& w) {
    ObjectiveSettings settings;
    std::map<std::string, double> out;
    for (const auto& d : oracle::all_designs(protein))
        out[d] = reward(MrnaSequence::from_string(d), w, settings);
    return out;
}

}  // namespace

TEST(Policy, EncodeSource) {
    const auto p = Protein::from_string("MFK");
    CodonDesignEnv env(p);
    auto e = encode(env.initial_state(), p, kW, 180);
    ASSERT_EQ(e.size(), features::kWidth);
    EXPECT_EQ(e(features::kNextAa + aa_index(AminoAcid::Met)), 1.0);
    EXPECT_EQ(e.segment(features::kNextAa, 21).sum(), 1.0);
    EXPECT_EQ(e(features::kPrevCodon + features::kNoPrevSlot), 1.0);
    EXPECT_EQ(e.segment(features::kPrevCodon, 65).sum(), 1.0);
    EXPECT_DOUBLE_EQ(e(features::kPosition), 0.0);
    EXPECT_DOUBLE_EQ(e(features::kLengthScale), 3.0 / 180.0);
    EXPECT_DOUBLE_EQ(e(features::kWeights + 0), 0.3);
    EXPECT_DOUBLE_EQ(e(features::kWeights + 1), 0.3);
    EXPECT_DOUBLE_EQ(e(features::kWeights + 2), 0.4);
}

TEST(Policy, EncodeCompleteStateUsesDoneSlot) {
    const auto p = Protein::from_string("MFK");
    State s = State(3).with_codon(codon_from_string("AUG")).with_codon(codon_from_string("UUC"))
                  .with_codon(codon_from_string("AAG"));
    auto e = encode(s, p, kW, 2);
    EXPECT_EQ(e(features::kNextAa + features::kDoneSlot), 1.0);
    EXPECT_EQ(e(features::kPrevCodon + codon_from_string("AAG").index()), 1.0);
    EXPECT_DOUBLE_EQ(e(features::kPosition), 1.0);
    EXPECT_DOUBLE_EQ(e(features::kLengthScale), 1.0);
}

TEST(Policy, WeightsOnlyChangeWeightSlots) {
    const auto p = Protein::from_string("MFK");
    State s = State(3).with_codon(codon_from_string("AUG"));
    auto a = encode(s, p, WeightVector(1, 0, 0));
    auto b = encode(s, p, WeightVector(0, 0, 1));
    for (int i = 0; i < features::kWidth; ++i) {
        if (i >= features::kWeights && i < features::kWeights + 3) continue;
        EXPECT_EQ(a(i), b(i)) << i;
    }
    EXPECT_NE(a(features::kWeights), b(features::kWeights));
}

TEST(Policy, ZeroParametersGiveZeroOutputs) {
    auto policy = MlpPolicy::zeros(MlpShape{16, 180});
    const auto p = Protein::from_string("MFKW");
    CodonDesignEnv env(p);
    std::vector<State> states{env.initial_state()};
    std::vector<WeightVector> ws{kW};
    auto out = policy.evaluate(p, states, ws);
    ASSERT_EQ(out.cols(), kOutputWidth);
    EXPECT_TRUE(out.isZero());
    EXPECT_EQ(policy.params().log_z(), 0.0);
}

TEST(Policy, MlpShapesAndSeeding) {
    MlpPolicy a(MlpShape{32, 180}, 7), b(MlpShape{32, 180}, 7), c(MlpShape{32, 180}, 8);
    ASSERT_EQ(a.params().tensors.size(), 7u);
    EXPECT_EQ(a.params().tensors[MlpPolicy::kW1].rows(), features::kWidth);
    EXPECT_EQ(a.params().tensors[MlpPolicy::kW1].cols(), 32);
    EXPECT_EQ(a.params().tensors[MlpPolicy::kW3].cols(), kOutputWidth);
    EXPECT_EQ(a.params().log_z_slot, MlpPolicy::kLogZ);
    EXPECT_TRUE(a.params().tensors[MlpPolicy::kW2].isApprox(b.params().tensors[MlpPolicy::kW2]));
    EXPECT_FALSE(a.params().tensors[MlpPolicy::kW2].isApprox(c.params().tensors[MlpPolicy::kW2]));
    EXPECT_TRUE(a.params().tensors[MlpPolicy::kB1].isZero());
}

TEST(Policy, BatchForwardMatchesSingleRows) {
    MlpPolicy policy(MlpShape{16, 180}, 3);
    const auto p = Protein::from_string("MFKL");
    State s0(4);
    State s1 = s0.with_codon(codon_from_string("AUG"));
    std::vector<State> states{s0, s1};
    std::vector<WeightVector> ws{WeightVector(1, 1, 1), WeightVector(0, 1, 0)};
    auto out = policy.evaluate(p, states, ws);
    for (int r = 0; r < 2; ++r) {
        auto single = policy.forward(encode(states[r], p, ws[r]));
        for (int a = 0; a < kNumActions; ++a) EXPECT_NEAR(out(r, a), single.logits[a], 1e-12);
        EXPECT_NEAR(out(r, kLogFlowColumn), single.log_flow, 1e-12);
    }
}

TEST(Policy, SampleActionFollowsPolicy) {
    ActionMask mask;
    mask.set(5);
    mask.set(17);
    std::array<double, kNumActions> lp;
    lp.fill(ad::kMaskedLogProb);
    lp[5] = 0.0;  // probability one on action 5
    Rng rng(11);
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += sample_action(lp, mask, 0.25, rng).id() == 5;
    EXPECT_NEAR(hits / static_cast<double>(n), 0.875, 0.005);

    hits = 0;
    for (int i = 0; i < n; ++i) hits += sample_action(lp, mask, 0.0, rng).id() == 5;
    EXPECT_EQ(hits, n);
}

TEST(Policy, SampleActionUniformAtFullExploration) {
    ActionMask mask;
    const std::vector<int> allowed{0, 8, 33, 63};
    for (int a : allowed) mask.set(a);
    std::array<double, kNumActions> lp;
    lp.fill(ad::kMaskedLogProb);
    lp[8] = 0.0;
    Rng rng(12);
    std::map<int, int> counts;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        int a = sample_action(lp, mask, 1.0, rng).id();
        ASSERT_TRUE(mask.test(a));
        ++counts[a];
    }
    // chi-square with 3 degrees of freedom; 16.27 is the 0.001 critical value
    double chi2 = 0.0;
    for (int a : allowed) {
        const double e = n / 4.0;
        chi2 += (counts[a] - e) * (counts[a] - e) / e;
    }
    EXPECT_LT(chi2, 16.27);
}

TEST(Policy, SampleActionRejectsBadInput) {
    std::array<double, kNumActions> lp{};
    Rng rng(1);
    EXPECT_THROW(sample_action(lp, ActionMask{}, 0.1, rng), InvariantError);
    ActionMask m;
    m.set(1);
    EXPECT_THROW(sample_action(lp, m, 1.5, rng), ConfigError);
}

TEST(Policy, TabularCoversReachableStates) {
    CodonDesignEnv env(Protein::from_string("MFK"));
    TabularPolicy policy(env, {kW});
    EXPECT_EQ(policy.state_count(), 1u + 1u + 2u + 4u);
    EXPECT_THROW(policy.row_of(env.initial_state(), WeightVector(1, 0, 0)), InvariantError);
}

TEST(Policy, TabularProportionalHasZeroLoss) {
    for (const std::string protein : {"MFK", "LLW"}) {
        const auto p = Protein::from_string(protein);
        CodonDesignEnv env(p);
        TabularPolicy policy(env, {kW});
        auto table = reward_table(protein, kW);
        policy.set_proportional(table, kW);

        double z = 0.0;
        for (const auto& [d, r] : table) z += r;
        EXPECT_NEAR(policy.params().log_z(), std::log(z), 1e-12);

        ObjectiveSettings settings;
        std::vector<WeightVector> ws{kW};
        auto batch = rollout_batch(env, policy, ws, 32, 0.0, settings, 5, 0);
        for (auto kind : {LossKind::TrajectoryBalance, LossKind::SubTrajectoryBalance}) {
            auto lg = loss_and_gradient(policy, p, batch, ws, kind, 0.9);
            EXPECT_NEAR(lg.loss, 0.0, 1e-20) << protein;
            for (const auto& g : lg.grads) EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-9);
        }
        for (const auto& tr : batch) {
            double log_p = 0.0;
            for (double v : tr.log_pf) log_p += v;
            EXPECT_NEAR(std::exp(log_p), table.at(tr.design.str()) / z, 1e-12);
        }
    }
}

TEST(Policy, AdamFirstStepMovesByLearningRate) {
    ParameterSet params;
    params.tensors = {Matrix::Constant(2, 1, 1.0), Matrix::Constant(1, 1, 0.0)};
    params.names = {"w", "log_z"};
    params.log_z_slot = 1;
    OptimizerConfig cfg;
    AdamOptimizer adam(params, cfg);
    std::vector<Matrix> grads{Matrix::Constant(2, 1, 3.0), Matrix::Constant(1, 1, -2.0)};
    adam.step(params, grads);
    EXPECT_NEAR(params.tensors[0](0, 0), 1.0 - 5e-3, 1e-9);
    EXPECT_NEAR(params.tensors[1](0, 0), 0.1, 1e-8);
    EXPECT_EQ(adam.steps(), 1);
    // a constant gradient keeps the bias-corrected step at the learning rate
    for (int i = 0; i < 9; ++i) adam.step(params, grads);
    EXPECT_NEAR(params.tensors[0](1, 0), 1.0 - 10 * 5e-3, 1e-8);
}

TEST(Policy, AdamRejectsNonFiniteGradient) {
    ParameterSet params;
    params.tensors = {Matrix::Constant(1, 1, 1.0)};
    params.names = {"log_z"};
    params.log_z_slot = 0;
    AdamOptimizer adam(params, OptimizerConfig{});
    std::vector<Matrix> grads{Matrix::Constant(1, 1, std::nan(""))};
    EXPECT_THROW(adam.step(params, grads), NumericError);
    EXPECT_EQ(params.tensors[0](0, 0), 1.0);
    EXPECT_EQ(adam.steps(), 0);
}

TEST(Policy, PlateauSchedulerHalvesAfterPatience) {
    ParameterSet params;
    params.tensors = {Matrix::Constant(1, 1, 0.0)};
    params.names = {"log_z"};
    params.log_z_slot = 0;
    AdamOptimizer adam(params, OptimizerConfig{});
    PlateauScheduler sched(10);
    EXPECT_FALSE(sched.report(1.0, adam));
    for (int i = 0; i < 9; ++i) EXPECT_FALSE(sched.report(1.0, adam));
    EXPECT_EQ(sched.bad_reports(), 9);
    EXPECT_TRUE(sched.report(1.0, adam));
    EXPECT_DOUBLE_EQ(adam.lr(), 2.5e-3);
    EXPECT_DOUBLE_EQ(adam.lr_log_z(), 0.05);
    EXPECT_FALSE(sched.report(0.5, adam));
    EXPECT_EQ(sched.best(), 0.5);
    EXPECT_EQ(sched.bad_reports(), 0);
}
