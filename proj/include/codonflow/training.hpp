#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codonflow/autodiff.hpp"
#include "codonflow/environment.hpp"
#include "codonflow/objectives.hpp"
#include "codonflow/optimizer.hpp"
#include "codonflow/policy.hpp"

namespace codonflow {

enum class LossKind { TrajectoryBalance, SubTrajectoryBalance };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& text);

struct TrainingConfig {
    LossKind loss = LossKind::SubTrajectoryBalance;
    double subtb_lambda = 0.9;
    int batch_size = 64;
    int n_iterations = 1000;
    double epsilon = 0.25;
    std::array<double, 3> dirichlet_alpha{1.0, 1.0, 1.0};
    /// Resample w from the Dirichlet every iteration; otherwise train on `fixed_weights`.
    bool conditional = true;
    WeightVector fixed_weights{0.3, 0.3, 0.4};
    OptimizerConfig optimizer{};
    /// Iterations per plateau-scheduler report (the report is the window's mean loss).
    int scheduler_interval = 50;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

WeightVector sample_weights(const std::array<double, 3>& alpha, Rng& rng);

/// Samples `batch_size` complete trajectories in lockstep. `weights` holds one vector shared by
/// the whole batch or one per trajectory. Trajectory b draws from derive_rng(seed, {stream, b}).
/// Recorded log P_F values come from the policy without exploration.
std::vector<Trajectory> rollout_batch(const CodonDesignEnv& env, const Policy& policy,
                                      std::span<const WeightVector> weights, int batch_size, double epsilon,
                                      const ObjectiveSettings& objectives, std::uint64_t seed,
                                      std::uint64_t stream, unsigned threads = 1);

/// Recorded per-trajectory quantities: log P_F of the n codon steps and the n+1 state flows with
/// log F(s_0) = log Z + head(s_0) and log F(x) = log R(x).
struct TrajectoryTerms {
    ad::Var log_pf;
    ad::Var log_flow;
};

std::vector<TrajectoryTerms> record_terms(ad::Tape& tape, const Policy& policy, const Protein& protein,
                                          std::span<const Trajectory> trajectories,
                                          std::span<const WeightVector> weights);

ad::Var tb_loss(ad::Tape& tape, const TrajectoryTerms& terms);
ad::Var subtb_loss(ad::Tape& tape, const TrajectoryTerms& terms, double lambda,
                   ad::SubtbWeighting weighting = ad::SubtbWeighting::Lambda);
/// Mean of the configured per-trajectory loss.
ad::Var batch_loss(ad::Tape& tape, std::span<const TrajectoryTerms> terms, LossKind kind, double lambda);

/// (log F(s_0) + sum log_pf - log reward)^2, where log F(s_0) is log Z plus the source flow head.
double tb_loss_value(double log_source_flow, std::span<const double> log_pf, double reward);

/// Loss value and gradient for one batch, parameters untouched.
struct LossAndGrad {
    double loss = 0.0;
    std::vector<Matrix> grads;
};
LossAndGrad loss_and_gradient(const Policy& policy, const Protein& protein,
                              std::span<const Trajectory> trajectories, std::span<const WeightVector> weights,
                              LossKind kind, double lambda);

struct BatchResult {
    std::vector<Trajectory> trajectories;
    std::vector<WeightVector> weights;
    std::vector<double> rewards;
    double loss = 0.0;
    double grad_norm = 0.0;
};

struct IterationStats {
    long iteration = 0;
    double loss = 0.0;
    double mean_reward = 0.0;
    double log_z = 0.0;
    double grad_norm = 0.0;
    double lr = 0.0;
};

/// On-policy GFlowNet training: sample w, roll out a batch, take one optimizer step.
class Trainer {
   public:
    Trainer(Policy& policy, TrainingConfig cfg, ObjectiveSettings objectives);

    /// One iteration on `env`. `weights` overrides both the Dirichlet draw and the fixed vector.
    BatchResult step(const CodonDesignEnv& env, std::optional<WeightVector> weights = std::nullopt);
    /// cfg.n_iterations iterations; one stats row per iteration.
    std::vector<IterationStats> train(const CodonDesignEnv& env);

    long iteration() const { return iteration_; }
    const std::vector<IterationStats>& history() const { return history_; }
    AdamOptimizer& optimizer() { return optimizer_; }
    PlateauScheduler& scheduler() { return scheduler_; }
    const TrainingConfig& config() const { return cfg_; }
    const ObjectiveSettings& objectives() const { return objectives_; }
    Policy& policy() { return policy_; }
    void set_iteration(long it) { iteration_ = it; }

   private:
    Policy& policy_;
    TrainingConfig cfg_;
    ObjectiveSettings objectives_;
    AdamOptimizer optimizer_;
    PlateauScheduler scheduler_;
    long iteration_ = 0;
    double window_loss_ = 0.0;
    int window_count_ = 0;
    std::vector<IterationStats> history_;
};

/// Draws n designs with epsilon = 0 and scores them.
std::vector<Trajectory> sample_designs(const CodonDesignEnv& env, const Policy& policy, const WeightVector& w,
                                       int n, const ObjectiveSettings& objectives, std::uint64_t seed,
                                       unsigned threads = 1);

}  // namespace codonflow
