#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codonflow/genetic_code.hpp"
#include "codonflow/objectives.hpp"
#include "codonflow/policy.hpp"
#include "codonflow/rng.hpp"
#include "codonflow/training.hpp"

namespace codonflow {

/// Inclusive range of protein lengths in residues.
struct LengthInterval {
    std::size_t lo = 0;
    std::size_t hi = 0;
    bool contains(std::size_t length) const { return lo <= length && length <= hi; }
    friend bool operator==(const LengthInterval&, const LengthInterval&) = default;
};

struct Task {
    LengthInterval interval;
    std::vector<Protein> pool;
    /// Protein used for every evaluation of this task when evaluation uses a fixed protein.
    std::optional<Protein> eval_protein;
};

std::vector<LengthInterval> default_task_intervals();
/// Index of the interval containing `length`, if any.
std::optional<std::size_t> bin_length(std::span<const LengthInterval> intervals, std::size_t length);
/// Bins proteins into one task per interval. Throws ConfigError on overlapping intervals or an
/// empty pool. With `hold_out_eval` each task with two or more proteins sets one aside for
/// evaluation, chosen from `seed`.
std::vector<Task> build_tasks(std::span<const LengthInterval> intervals, std::span<const Protein> proteins,
                              bool hold_out_eval, std::uint64_t seed);

enum class LpEstimator { Online, Sampling, Linreg };
enum class AttentionKind { LearningProgress, MasteringRate };
enum class DistributionKind { GreedyProp, Prop };

std::string to_string(LpEstimator k);
std::string to_string(AttentionKind k);
std::string to_string(DistributionKind k);
LpEstimator parse_lp_estimator(const std::string& s);
AttentionKind parse_attention_kind(const std::string& s);
DistributionKind parse_distribution_kind(const std::string& s);

struct CurriculumConfig {
    LpEstimator lpe = LpEstimator::Online;
    /// Smoothing beta of the online estimator.
    double lpe_alpha = 0.05;
    /// Window K of the Sampling and Linreg estimators.
    int lpe_window = 10;

    AttentionKind acp = AttentionKind::LearningProgress;
    /// History window for the running min/max of the mastering rate.
    int mr_window = 25;
    double mr_power = 2.0;
    double mr_pot_prop = 0.4;
    double mr_att_pred = 0.1;
    double mr_att_succ = 0.05;

    DistributionKind a2d = DistributionKind::GreedyProp;
    double a2d_eps = 0.15;
    /// Additive floor before normalization.
    double floor_eps = 0.01;

    int n_iterations = 100;
    int eval_every = 5;
    int train_steps_per_task = 200;
    WeightVector w_eval{};
    int n_eval = 32;
    bool fixed_eval_protein = true;

    /// "conservative", "aggressive", or "balanced".
    static CurriculumConfig named(const std::string& name);
    void validate() const;
};

/// (1 - beta) * lp_prev + beta * delta_m.
double update_lp_online(double lp_prev, double delta_m, double beta);
/// Sampling: mean of the last K successive differences. Linreg: least-squares slope over the
/// last K points. Fewer than two points give 0.
double estimate_lp(std::span<const double> history, LpEstimator kind, int window);

/// Mastering rate from a history window: clamp((last - min) / (max - min), 0, 1), or 0 when the
/// window has no spread.
double mastering_rate(std::span<const double> history, int window);
/// pot_prop * M^power * (1 - M) + (1 - pot_prop) * max(0, LP), then neighbour terms along the
/// length-ordered chain.
std::vector<double> mastering_attention(std::span<const double> mastery, std::span<const double> lp,
                                        const CurriculumConfig& cfg);
std::vector<double> attention(std::span<const double> lp, std::span<const std::vector<double>> histories,
                              const CurriculumConfig& cfg);
std::vector<double> to_distribution(std::span<const double> attention, const CurriculumConfig& cfg);

/// Learning-progress bookkeeping and the task-sampling distribution.
class Teacher {
   public:
    Teacher(std::size_t n_tasks, CurriculumConfig cfg);

    /// Ingests one evaluation round (one metric per task) and refreshes LP and P.
    void observe(std::span<const double> metrics);
    std::size_t sample_task(Rng& rng) const;

    const std::vector<double>& lp() const { return lp_; }
    const std::vector<double>& probabilities() const { return p_; }
    const std::vector<std::vector<double>>& histories() const { return histories_; }
    const std::vector<double>& last_delta() const { return delta_; }
    int rounds() const { return rounds_; }

   private:
    CurriculumConfig cfg_;
    std::vector<double> lp_;
    std::vector<double> p_;
    std::vector<double> delta_;
    std::vector<std::vector<double>> histories_;
    int rounds_ = 0;
};

/// Mean reward of n_eval epsilon-free rollouts under w_eval for each task.
std::vector<double> evaluate_student(const Policy& policy, std::span<const Task> tasks, const CurriculumConfig& cfg,
                                     const ObjectiveSettings& objectives, std::uint64_t seed, std::uint64_t round,
                                     unsigned threads = 1);

enum class Schedule { Curriculum, ShortOnly, LongOnly, RandomOrder };
std::string to_string(Schedule s);
Schedule parse_schedule(const std::string& s);

/// Protein source for the non-adaptive schedules.
class BaselineSampler {
   public:
    /// ShortOnly keeps 30..60 residues, LongOnly 125..180, both drawn from every protein in the
    /// tasks; RandomOrder picks a task uniformly, then a protein from its pool.
    BaselineSampler(Schedule kind, std::span<const Task> tasks);
    const Protein& sample(Rng& rng) const;
    Schedule kind() const { return kind_; }

   private:
    Schedule kind_;
    std::vector<std::vector<Protein>> pools_;
};

inline constexpr LengthInterval kShortOnlyRange{30, 60};
inline constexpr LengthInterval kLongOnlyRange{125, 180};

struct EvaluationRound {
    int round = 0;
    int outer_iteration = 0;
    std::vector<double> m;
    std::vector<double> delta_m;
    std::vector<double> lp;
    std::vector<double> p;
    double mean_m() const;
};

struct CurriculumResult {
    std::vector<EvaluationRound> rounds;
    /// Task index trained at each outer iteration (-1 when the schedule draws from a merged pool).
    std::vector<int> task_sequence;
};

/// Outer loop: pick a protein by schedule, run train_steps_per_task trainer steps on it, and
/// evaluate every task each eval_every outer iterations. The teacher is updated in every
/// schedule but only drives sampling under Schedule::Curriculum.
CurriculumResult curriculum_train(std::span<const Task> tasks, Trainer& trainer, const CurriculumConfig& cfg,
                                  Schedule schedule = Schedule::Curriculum);

}  // namespace codonflow
