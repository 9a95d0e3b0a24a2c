#include "codonflow/training.hpp"

#include <cmath>
#include <numeric>

#include "codonflow/errors.hpp"

namespace codonflow {
namespace {
constexpr std::uint64_t kWeightStream = 0x77656967;  // per-iteration Dirichlet draws
constexpr std::uint64_t kRolloutStream = 0x726f6c6c;
}  // namespace

std::string to_string(LossKind kind) {
    return kind == LossKind::TrajectoryBalance ? "tb" : "subtb";
}

LossKind parse_loss_kind(const std::string& text) {
    if (text == "tb" || text == "TB") return LossKind::TrajectoryBalance;
    if (text == "subtb" || text == "SubTB") return LossKind::SubTrajectoryBalance;
    throw ConfigError("unknown loss '" + text + "' (expected tb or subtb)");
}

void TrainingConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (n_iterations < 0) throw ConfigError("n_iterations must be non-negative");
    if (!(subtb_lambda > 0.0 && subtb_lambda <= 1.0)) throw ConfigError("subtb_lambda must lie in (0, 1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    for (double a : dirichlet_alpha)
        if (!(a > 0.0)) throw ConfigError("Dirichlet alpha components must be positive");
    if (scheduler_interval < 1) throw ConfigError("scheduler_interval must be at least 1");
}

WeightVector sample_weights(const std::array<double, 3>& alpha, Rng& rng) {
    std::array<double, 3> g{};
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (!(alpha[k] > 0.0)) throw ConfigError("Dirichlet alpha components must be positive");
        g[k] = std::gamma_distribution<double>(alpha[k], 1.0)(rng);
        sum += g[k];
    }
    if (!(sum > 0.0)) {
        // every gamma draw underflowed; only possible for tiny alphas
        g = {1.0, 1.0, 1.0};
    }
    return WeightVector(g);
}

std::vector<Trajectory> rollout_batch(const CodonDesignEnv& env, const Policy& policy,
                                      std::span<const WeightVector> weights, int batch_size, double epsilon,
                                      const ObjectiveSettings& objectives, std::uint64_t seed,
                                      std::uint64_t stream, unsigned threads) {
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (weights.size() != 1 && weights.size() != static_cast<std::size_t>(batch_size))
        throw UsageError("need one weight vector or one per trajectory");
    const auto B = static_cast<std::size_t>(batch_size);
    const std::size_t L = env.length();
    std::vector<Rng> rngs;
    rngs.reserve(B);
    for (std::size_t b = 0; b < B; ++b) rngs.push_back(derive_rng(seed, {kRolloutStream, stream, b}));

    std::vector<Trajectory> out(B);
    std::vector<State> current(B, env.initial_state());
    for (auto& tr : out) {
        tr.states.reserve(L + 1);
        tr.actions.reserve(L + 1);
        tr.log_pf.reserve(L + 1);
        tr.states.push_back(current[0]);
    }
    for (std::size_t t = 0; t < L; ++t) {
        Matrix logits = policy.evaluate(env.protein(), current, weights);
        const ActionMask mask = env.forward_mask(current[0]);  // identical for every trajectory at depth t
        std::vector<ActionMask> masks(B, mask);
        Matrix log_probs = ad::masked_log_softmax(logits, masks);
        for (std::size_t b = 0; b < B; ++b) {
            std::array<double, kNumActions> row{};
            for (int a = 0; a < kNumActions; ++a) row[a] = log_probs(static_cast<Eigen::Index>(b), a);
            Action a = sample_action(row, mask, epsilon, rngs[b]);
            auto next = env.step(current[b], a);
            current[b] = std::get<State>(next);
            out[b].actions.push_back(a);
            out[b].log_pf.push_back(row[a.id()]);
            out[b].states.push_back(current[b]);
        }
    }
    std::vector<MrnaSequence> designs;
    designs.reserve(B);
    for (std::size_t b = 0; b < B; ++b) {
        auto done = env.step(current[b], Action::exit());
        out[b].design = std::get<Terminal>(done).design;
        out[b].actions.push_back(Action::exit());
        out[b].log_pf.push_back(0.0);
        designs.push_back(out[b].design);
    }
    auto scores = evaluate_batch(designs, objectives, threads);
    for (std::size_t b = 0; b < B; ++b)
        out[b].reward = scalarize(scores[b].phi, weights.size() == 1 ? weights[0] : weights[b], objectives.reward_floor);
    return out;
}

std::vector<TrajectoryTerms> record_terms(ad::Tape& tape, const Policy& policy, const Protein& protein,
                                          std::span<const Trajectory> trajectories,
                                          std::span<const WeightVector> weights) {
    if (trajectories.empty()) throw UsageError("no trajectories to record");
    if (weights.size() != 1 && weights.size() != trajectories.size())
        throw UsageError("need one weight vector or one per trajectory");
    const std::size_t n = protein.length();
    std::vector<State> states;
    std::vector<WeightVector> ws;
    std::vector<ActionMask> masks;
    std::vector<std::pair<int, int>> chosen;
    const CodonDesignEnv env(protein);
    states.reserve(trajectories.size() * n);
    for (std::size_t b = 0; b < trajectories.size(); ++b) {
        const auto& tr = trajectories[b];
        if (tr.states.size() != n + 1 || tr.actions.size() != n + 1 || !tr.actions.back().is_exit())
            throw InvariantError("trajectory is not complete for this protein");
        if (!(tr.reward > 0.0)) throw InvariantError("trajectory reward must be positive");
        for (std::size_t t = 0; t < n; ++t) {
            masks.push_back(env.forward_mask(tr.states[t]));
            chosen.emplace_back(static_cast<int>(states.size()), tr.actions[t].id());
            states.push_back(tr.states[t]);
            ws.push_back(weights.size() == 1 ? weights[0] : weights[b]);
        }
    }
    auto out = policy.record(tape, protein, states, ws);
    auto log_probs = tape.masked_log_softmax(out, std::move(masks));
    auto picked = tape.pick(log_probs, std::move(chosen));
    auto heads = tape.column(out, kLogFlowColumn);
    auto log_z = policy.record_log_z(tape);

    std::vector<TrajectoryTerms> terms;
    terms.reserve(trajectories.size());
    const int ni = static_cast<int>(n);
    for (std::size_t b = 0; b < trajectories.size(); ++b) {
        const int base = static_cast<int>(b) * ni;
        TrajectoryTerms term;
        term.log_pf = tape.slice_rows(picked, base, ni);
        auto source = tape.add(log_z, tape.slice_rows(heads, base, 1));
        auto inner = tape.slice_rows(heads, base + 1, ni - 1);
        auto terminal = tape.scalar(std::log(trajectories[b].reward));
        term.log_flow = tape.concat_rows({source, inner, terminal});
        terms.push_back(term);
    }
    return terms;
}

ad::Var tb_loss(ad::Tape& tape, const TrajectoryTerms& terms) {
    const int n = static_cast<int>(terms.log_pf.value().rows());
    auto residual = tape.sub(tape.add(tape.slice_rows(terms.log_flow, 0, 1), tape.sum(terms.log_pf)),
                             tape.slice_rows(terms.log_flow, n, 1));
    return tape.square(residual);
}

ad::Var subtb_loss(ad::Tape& tape, const TrajectoryTerms& terms, double lambda, ad::SubtbWeighting weighting) {
    return tape.subtb(terms.log_flow, terms.log_pf, lambda, weighting);
}

ad::Var batch_loss(ad::Tape& tape, std::span<const TrajectoryTerms> terms, LossKind kind, double lambda) {
    if (terms.empty()) throw UsageError("empty batch");
    std::vector<ad::Var> parts;
    parts.reserve(terms.size());
    for (const auto& t : terms)
        parts.push_back(kind == LossKind::TrajectoryBalance ? tb_loss(tape, t) : subtb_loss(tape, t, lambda));
    return tape.scale(tape.sum(tape.concat_rows(parts)), 1.0 / static_cast<double>(parts.size()));
}

double tb_loss_value(double log_source_flow, std::span<const double> log_pf, double reward) {
    if (!(reward > 0.0)) throw InvariantError("reward must be positive");
    double r = log_source_flow + std::accumulate(log_pf.begin(), log_pf.end(), 0.0) - std::log(reward);
    return r * r;
}

LossAndGrad loss_and_gradient(const Policy& policy, const Protein& protein,
                              std::span<const Trajectory> trajectories, std::span<const WeightVector> weights,
                              LossKind kind, double lambda) {
    ad::Tape tape;
    auto terms = record_terms(tape, policy, protein, trajectories, weights);
    auto loss = batch_loss(tape, terms, kind, lambda);
    LossAndGrad out;
    out.loss = loss.scalar();
    out.grads = policy.params().zeros_like();
    tape.backward(loss, out.grads);
    return out;
}

Trainer::Trainer(Policy& policy, TrainingConfig cfg, ObjectiveSettings objectives)
    : policy_(policy),
      cfg_(std::move(cfg)),
      objectives_(std::move(objectives)),
      optimizer_(policy.params(), cfg_.optimizer),
      scheduler_(cfg_.optimizer.lr_patience) {
    cfg_.validate();
    objectives_.validate();
}

BatchResult Trainer::step(const CodonDesignEnv& env, std::optional<WeightVector> weights) {
    const long it = iteration_;
    WeightVector w = cfg_.fixed_weights;
    if (weights) {
        w = *weights;
    } else if (cfg_.conditional) {
        Rng rng = derive_rng(cfg_.seed, {kWeightStream, static_cast<std::uint64_t>(it)});
        w = sample_weights(cfg_.dirichlet_alpha, rng);
    }
    const std::vector<WeightVector> ws{w};
    BatchResult result;
    result.trajectories = rollout_batch(env, policy_, ws, cfg_.batch_size, cfg_.epsilon, objectives_, cfg_.seed,
                                        static_cast<std::uint64_t>(it), cfg_.threads);
    result.weights.assign(result.trajectories.size(), w);
    for (const auto& tr : result.trajectories) result.rewards.push_back(tr.reward);

    auto lg = loss_and_gradient(policy_, env.protein(), result.trajectories, ws, cfg_.loss, cfg_.subtb_lambda);
    if (!std::isfinite(lg.loss)) throw NumericError("non-finite loss at iteration " + std::to_string(it));
    double norm2 = 0.0;
    for (const auto& g : lg.grads) norm2 += g.squaredNorm();
    optimizer_.step(policy_.params(), lg.grads);
    result.loss = lg.loss;
    result.grad_norm = std::sqrt(norm2);

    ++iteration_;
    window_loss_ += lg.loss;
    if (++window_count_ == cfg_.scheduler_interval) {
        scheduler_.report(window_loss_ / window_count_, optimizer_);
        window_loss_ = 0.0;
        window_count_ = 0;
    }
    IterationStats stats;
    stats.iteration = it;
    stats.loss = result.loss;
    stats.mean_reward = std::accumulate(result.rewards.begin(), result.rewards.end(), 0.0) /
                        static_cast<double>(result.rewards.size());
    stats.log_z = policy_.params().log_z();
    stats.grad_norm = result.grad_norm;
    stats.lr = optimizer_.lr();
    history_.push_back(stats);
    return result;
}

std::vector<IterationStats> Trainer::train(const CodonDesignEnv& env) {
    std::vector<IterationStats> trace;
    trace.reserve(static_cast<std::size_t>(cfg_.n_iterations));
    for (int i = 0; i < cfg_.n_iterations; ++i) {
        step(env);
        trace.push_back(history_.back());
    }
    return trace;
}

std::vector<Trajectory> sample_designs(const CodonDesignEnv& env, const Policy& policy, const WeightVector& w,
                                       int n, const ObjectiveSettings& objectives, std::uint64_t seed,
                                       unsigned threads) {
    const std::vector<WeightVector> ws{w};
    return rollout_batch(env, policy, ws, n, 0.0, objectives, seed, 0x73616d70, threads);
}

}  // namespace codonflow
