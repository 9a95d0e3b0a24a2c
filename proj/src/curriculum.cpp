#include "codonflow/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "codonflow/errors.hpp"

namespace codonflow {
namespace {
constexpr std::uint64_t kEvalStream = 0x6576616c;
constexpr std::uint64_t kScheduleStream = 0x73636864;
constexpr std::uint64_t kHoldOutStream = 0x686f6c64;
}  // namespace

std::vector<LengthInterval> default_task_intervals() {
    return {{25, 40}, {45, 60}, {65, 80}, {85, 120}, {125, 180}};
}

std::optional<std::size_t> bin_length(std::span<const LengthInterval> intervals, std::size_t length) {
    for (std::size_t i = 0; i < intervals.size(); ++i)
        if (intervals[i].contains(length)) return i;
    return std::nullopt;
}

std::vector<Task> build_tasks(std::span<const LengthInterval> intervals, std::span<const Protein> proteins,
                              bool hold_out_eval, std::uint64_t seed) {
    if (intervals.empty()) throw ConfigError("at least one task interval is required");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (intervals[i].lo > intervals[i].hi || intervals[i].lo == 0)
            throw ConfigError("task interval " + std::to_string(i) + " is empty or starts at 0");
        for (std::size_t j = 0; j < i; ++j)
            if (intervals[i].lo <= intervals[j].hi && intervals[j].lo <= intervals[i].hi)
                throw ConfigError("task intervals " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    }
    std::vector<Task> tasks(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) tasks[i].interval = intervals[i];
    for (const auto& p : proteins)
        if (auto k = bin_length(intervals, p.length())) tasks[*k].pool.push_back(p);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        auto& task = tasks[i];
        if (task.pool.empty())
            throw ConfigError("task [" + std::to_string(task.interval.lo) + "," + std::to_string(task.interval.hi) +
                              "] has no proteins");
        if (hold_out_eval) {
            Rng rng = derive_rng(seed, {kHoldOutStream, i});
            auto pick = std::uniform_int_distribution<std::size_t>(0, task.pool.size() - 1)(rng);
            task.eval_protein = task.pool[pick];
            if (task.pool.size() >= 2) task.pool.erase(task.pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    }
    return tasks;
}

std::string to_string(LpEstimator k) {
    switch (k) {
        case LpEstimator::Online: return "Online";
        case LpEstimator::Sampling: return "Sampling";
        case LpEstimator::Linreg: return "Linreg";
    }
    return "?";
}

std::string to_string(AttentionKind k) { return k == AttentionKind::LearningProgress ? "LP" : "MR"; }

std::string to_string(DistributionKind k) { return k == DistributionKind::GreedyProp ? "GreedyProp" : "Prop"; }

LpEstimator parse_lp_estimator(const std::string& s) {
    if (s == "Online") return LpEstimator::Online;
    if (s == "Sampling") return LpEstimator::Sampling;
    if (s == "Linreg") return LpEstimator::Linreg;
    throw ConfigError("unknown lpe '" + s + "' (expected Online, Sampling, or Linreg)");
}

AttentionKind parse_attention_kind(const std::string& s) {
    if (s == "LP") return AttentionKind::LearningProgress;
    if (s == "MR") return AttentionKind::MasteringRate;
    throw ConfigError("unknown acp '" + s + "' (expected LP or MR)");
}

DistributionKind parse_distribution_kind(const std::string& s) {
    if (s == "GreedyProp") return DistributionKind::GreedyProp;
    if (s == "Prop") return DistributionKind::Prop;
    throw ConfigError("unknown a2d '" + s + "' (expected GreedyProp or Prop)");
}

CurriculumConfig CurriculumConfig::named(const std::string& name) {
    CurriculumConfig cfg;
    if (name == "conservative") {
        cfg.lpe = LpEstimator::Online;
        cfg.lpe_alpha = 0.05;
        cfg.acp = AttentionKind::LearningProgress;
        cfg.a2d = DistributionKind::GreedyProp;
        cfg.a2d_eps = 0.15;
    } else if (name == "aggressive") {
        cfg.lpe = LpEstimator::Sampling;
        cfg.lpe_window = 10;
        cfg.acp = AttentionKind::MasteringRate;
        cfg.mr_power = 8.0;
        cfg.mr_pot_prop = 0.8;
    } else if (name == "balanced") {
        cfg.lpe = LpEstimator::Linreg;
        cfg.lpe_window = 25;
        cfg.acp = AttentionKind::MasteringRate;
        cfg.mr_power = 4.0;
        cfg.mr_pot_prop = 0.6;
        cfg.a2d = DistributionKind::Prop;
        cfg.a2d_eps = 0.0;
    } else {
        throw ConfigError("unknown curriculum config '" + name + "' (expected conservative, aggressive, or balanced)");
    }
    return cfg;
}

void CurriculumConfig::validate() const {
    if (!(lpe_alpha > 0.0 && lpe_alpha <= 1.0)) throw ConfigError("lpe_alpha must lie in (0, 1]");
    if (lpe_window < 2) throw ConfigError("lpe_window must be at least 2");
    if (mr_window < 1) throw ConfigError("mr_window must be positive");
    if (!(mr_power > 0.0)) throw ConfigError("mr_power must be positive");
    if (!(mr_pot_prop >= 0.0 && mr_pot_prop <= 1.0)) throw ConfigError("mr_pot_prop must lie in [0, 1]");
    if (mr_att_pred < 0.0 || mr_att_succ < 0.0) throw ConfigError("MR neighbour weights must be non-negative");
    if (!(a2d_eps >= 0.0 && a2d_eps <= 1.0)) throw ConfigError("a2d_eps must lie in [0, 1]");
    if (floor_eps < 0.0) throw ConfigError("floor epsilon must be non-negative");
    if (n_iterations < 0 || eval_every < 1 || train_steps_per_task < 0 || n_eval < 1)
        throw ConfigError("curriculum schedule values out of range");
}

double update_lp_online(double lp_prev, double delta_m, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
    return (1.0 - beta) * lp_prev + beta * delta_m;
}

double estimate_lp(std::span<const double> history, LpEstimator kind, int window) {
    if (history.size() < 2) return 0.0;
    if (window < 2) throw ConfigError("estimator window must be at least 2");
    const std::size_t k = std::min<std::size_t>(history.size(), static_cast<std::size_t>(window));
    auto recent = history.subspan(history.size() - k);
    switch (kind) {
        case LpEstimator::Sampling: {
            double sum = 0.0;
            for (std::size_t i = 1; i < recent.size(); ++i) sum += recent[i] - recent[i - 1];
            return sum / static_cast<double>(recent.size() - 1);
        }
        case LpEstimator::Linreg: {
            const double n = static_cast<double>(recent.size());
            const double x_mean = (n - 1.0) / 2.0;
            const double y_mean = std::accumulate(recent.begin(), recent.end(), 0.0) / n;
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t i = 0; i < recent.size(); ++i) {
                const double dx = static_cast<double>(i) - x_mean;
                sxy += dx * (recent[i] - y_mean);
                sxx += dx * dx;
            }
            return sxy / sxx;
        }
        case LpEstimator::Online:
            break;
    }
    throw ConfigError("estimate_lp handles the Sampling and Linreg estimators only");
}

double mastering_rate(std::span<const double> history, int window) {
    if (history.empty()) return 0.0;
    const std::size_t k = std::min<std::size_t>(history.size(), static_cast<std::size_t>(std::max(1, window)));
    auto recent = history.subspan(history.size() - k);
    auto [lo, hi] = std::minmax_element(recent.begin(), recent.end());
    if (!(*hi > *lo)) return 0.0;
    return std::clamp((history.back() - *lo) / (*hi - *lo), 0.0, 1.0);
}

std::vector<double> mastering_attention(std::span<const double> mastery, std::span<const double> lp,
                                        const CurriculumConfig& cfg) {
    if (mastery.size() != lp.size()) throw UsageError("mastery and LP sizes differ");
    const std::size_t n = mastery.size();
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m = mastery[i];
        base[i] = cfg.mr_pot_prop * std::pow(m, cfg.mr_power) * (1.0 - m) +
                  (1.0 - cfg.mr_pot_prop) * std::max(0.0, lp[i]);
    }
    std::vector<double> out = base;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out[i] += cfg.mr_att_pred * base[i - 1];
        if (i + 1 < n) out[i] += cfg.mr_att_succ * base[i + 1];
    }
    return out;
}

std::vector<double> attention(std::span<const double> lp, std::span<const std::vector<double>> histories,
                              const CurriculumConfig& cfg) {
    if (cfg.acp == AttentionKind::LearningProgress) {
        std::vector<double> out(lp.size());
        for (std::size_t i = 0; i < lp.size(); ++i) out[i] = std::max(0.0, lp[i]);
        return out;
    }
    if (histories.size() != lp.size()) throw UsageError("one history per task required");
    std::vector<double> mastery(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) mastery[i] = mastering_rate(histories[i], cfg.mr_window);
    return mastering_attention(mastery, lp, cfg);
}

std::vector<double> to_distribution(std::span<const double> attention, const CurriculumConfig& cfg) {
    if (attention.empty()) throw ConfigError("no tasks");
    std::vector<double> p(attention.size());
    double total = 0.0;
    for (std::size_t i = 0; i < attention.size(); ++i) {
        if (!(attention[i] >= 0.0) || !std::isfinite(attention[i]))
            throw InvariantError("attention must be finite and non-negative");
        p[i] = attention[i] + cfg.floor_eps;
        total += p[i];
    }
    if (!(total > 0.0)) throw ConfigError("all-zero attention with a zero floor has no distribution");
    for (double& v : p) v /= total;
    if (cfg.a2d == DistributionKind::GreedyProp) {
        const double uniform = 1.0 / static_cast<double>(p.size());
        for (double& v : p) v = (1.0 - cfg.a2d_eps) * v + cfg.a2d_eps * uniform;
    }
    return p;
}

Teacher::Teacher(std::size_t n_tasks, CurriculumConfig cfg)
    : cfg_(std::move(cfg)),
      lp_(n_tasks, 0.0),
      p_(n_tasks, n_tasks ? 1.0 / static_cast<double>(n_tasks) : 0.0),
      delta_(n_tasks, 0.0),
      histories_(n_tasks) {
    if (n_tasks == 0) throw ConfigError("teacher needs at least one task");
    cfg_.validate();
}

void Teacher::observe(std::span<const double> metrics) {
    if (metrics.size() != lp_.size()) throw UsageError("one metric per task required");
    for (std::size_t j = 0; j < metrics.size(); ++j) {
        const double prev = histories_[j].empty() ? 0.0 : histories_[j].back();
        delta_[j] = metrics[j] - prev;
        histories_[j].push_back(metrics[j]);
        if (cfg_.lpe == LpEstimator::Online)
            lp_[j] = update_lp_online(lp_[j], delta_[j], cfg_.lpe_alpha);
        else
            lp_[j] = estimate_lp(histories_[j], cfg_.lpe, cfg_.lpe_window);
    }
    p_ = to_distribution(attention(lp_, histories_, cfg_), cfg_);
    ++rounds_;
}

std::size_t Teacher::sample_task(Rng& rng) const {
    std::discrete_distribution<std::size_t> dist(p_.begin(), p_.end());
    return dist(rng);
}

std::vector<double> evaluate_student(const Policy& policy, std::span<const Task> tasks, const CurriculumConfig& cfg,
                                     const ObjectiveSettings& objectives, std::uint64_t seed, std::uint64_t round,
                                     unsigned threads) {
    std::vector<double> m(tasks.size());
    const std::vector<WeightVector> ws{cfg.w_eval};
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        const auto& task = tasks[j];
        if (task.pool.empty() && !task.eval_protein) throw ConfigError("task has an empty protein pool");
        Rng rng = derive_rng(seed, {kEvalStream, round, j});
        const Protein* protein = nullptr;
        if (cfg.fixed_eval_protein && task.eval_protein) {
            protein = &*task.eval_protein;
        } else {
            if (task.pool.empty()) throw ConfigError("task has an empty protein pool");
            protein = &task.pool[std::uniform_int_distribution<std::size_t>(0, task.pool.size() - 1)(rng)];
        }
        const CodonDesignEnv env(*protein);
        auto trajectories = rollout_batch(env, policy, ws, cfg.n_eval, 0.0, objectives, seed,
                                          (kEvalStream << 20) ^ (round << 8) ^ j, threads);
        double sum = 0.0;
        for (const auto& tr : trajectories) sum += tr.reward;
        m[j] = sum / static_cast<double>(trajectories.size());
    }
    return m;
}

std::string to_string(Schedule s) {
    switch (s) {
        case Schedule::Curriculum: return "curriculum";
        case Schedule::ShortOnly: return "short_only";
        case Schedule::LongOnly: return "long_only";
        case Schedule::RandomOrder: return "random_order";
    }
    return "?";
}

Schedule parse_schedule(const std::string& s) {
    if (s == "curriculum") return Schedule::Curriculum;
    if (s == "short_only") return Schedule::ShortOnly;
    if (s == "long_only") return Schedule::LongOnly;
    if (s == "random_order") return Schedule::RandomOrder;
    throw ConfigError("unknown schedule '" + s + "'");
}

BaselineSampler::BaselineSampler(Schedule kind, std::span<const Task> tasks) : kind_(kind) {
    if (tasks.empty()) throw ConfigError("no tasks");
    auto filtered = [&](LengthInterval range) {
        std::vector<Protein> pool;
        for (const auto& t : tasks)
            for (const auto& p : t.pool)
                if (range.contains(p.length())) pool.push_back(p);
        if (pool.empty())
            throw ConfigError("no proteins of length " + std::to_string(range.lo) + ".." + std::to_string(range.hi));
        return pool;
    };
    switch (kind) {
        case Schedule::ShortOnly: pools_.push_back(filtered(kShortOnlyRange)); break;
        case Schedule::LongOnly: pools_.push_back(filtered(kLongOnlyRange)); break;
        case Schedule::RandomOrder:
            for (const auto& t : tasks) {
                if (t.pool.empty()) throw ConfigError("task has an empty protein pool");
                pools_.push_back(t.pool);
            }
            break;
        case Schedule::Curriculum: throw ConfigError("the curriculum schedule is driven by the teacher");
    }
}

const Protein& BaselineSampler::sample(Rng& rng) const {
    const auto& pool = pools_[std::uniform_int_distribution<std::size_t>(0, pools_.size() - 1)(rng)];
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
}

double EvaluationRound::mean_m() const {
    return m.empty() ? 0.0 : std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
}

CurriculumResult curriculum_train(std::span<const Task> tasks, Trainer& trainer, const CurriculumConfig& cfg,
                                  Schedule schedule) {
    cfg.validate();
    if (tasks.empty()) throw ConfigError("no tasks");
    for (const auto& t : tasks)
        if (t.pool.empty()) throw ConfigError("task has an empty protein pool");
    Teacher teacher(tasks.size(), cfg);
    std::optional<BaselineSampler> baseline;
    if (schedule != Schedule::Curriculum) baseline.emplace(schedule, tasks);
    const std::uint64_t seed = trainer.config().seed;

    CurriculumResult result;
    for (int i = 1; i <= cfg.n_iterations; ++i) {
        Rng rng = derive_rng(seed, {kScheduleStream, static_cast<std::uint64_t>(i)});
        const Protein* protein = nullptr;
        if (schedule == Schedule::Curriculum) {
            const std::size_t k = teacher.sample_task(rng);
            const auto& pool = tasks[k].pool;
            protein = &pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
            result.task_sequence.push_back(static_cast<int>(k));
        } else {
            protein = &baseline->sample(rng);
            auto k = std::find_if(tasks.begin(), tasks.end(),
                                  [&](const Task& t) { return t.interval.contains(protein->length()); });
            result.task_sequence.push_back(k == tasks.end() ? -1 : static_cast<int>(k - tasks.begin()));
        }
        const CodonDesignEnv env(*protein);
        for (int s = 0; s < cfg.train_steps_per_task; ++s) trainer.step(env);

        if (i % cfg.eval_every == 0) {
            const int round = i / cfg.eval_every;
            auto m = evaluate_student(trainer.policy(), tasks, cfg, trainer.objectives(), seed,
                                      static_cast<std::uint64_t>(round), trainer.config().threads);
            teacher.observe(m);
            EvaluationRound r;
            r.round = round;
            r.outer_iteration = i;
            r.m = std::move(m);
            r.delta_m = teacher.last_delta();
            r.lp = teacher.lp();
            r.p = teacher.probabilities();
            result.rounds.push_back(std::move(r));
        }
    }
    return result;
}

}  // namespace codonflow
