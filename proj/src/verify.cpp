#include "codonflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "codonflow/errors.hpp"
#include "codonflow/oracle.hpp"

namespace codonflow {
namespace {

Protein random_protein(Rng& rng, std::size_t lo, std::size_t hi) {
    std::uniform_int_distribution<std::size_t> len(lo, hi);
    std::uniform_int_distribution<int> aa(0, kNumAminoAcids - 1);
    std::vector<AminoAcid> residues(len(rng));
    for (auto& r : residues) r = static_cast<AminoAcid>(aa(rng));
    return Protein(std::move(residues));
}

}  // namespace

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::to_json() const {
    nlohmann::ordered_json j;
    j["passed"] = passed();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"status", c.passed ? "pass" : "fail"},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"detail", c.detail}});
    j["checks"] = arr;
    return j.dump(2);
}

double loss_value(const Policy& policy, const Protein& protein, std::span<const Trajectory> trajectories,
                  std::span<const WeightVector> weights, LossKind kind, double lambda) {
    const CodonDesignEnv env(protein);
    const std::size_t n = protein.length();
    const double log_z = policy.params().log_z();
    double total = 0.0;
    for (std::size_t b = 0; b < trajectories.size(); ++b) {
        const auto& tr = trajectories[b];
        std::vector<State> states(tr.states.begin(), tr.states.begin() + static_cast<std::ptrdiff_t>(n));
        std::vector<WeightVector> ws(n, weights.size() == 1 ? weights[0] : weights[b]);
        std::vector<ActionMask> masks;
        for (const auto& s : states) masks.push_back(env.forward_mask(s));
        const Matrix out = policy.evaluate(protein, states, ws);
        const Matrix lp = ad::masked_log_softmax(out, masks);
        std::vector<double> log_pf(n), log_flow(n + 1);
        for (std::size_t t = 0; t < n; ++t) {
            log_pf[t] = lp(static_cast<Eigen::Index>(t), tr.actions[t].id());
            log_flow[t] = out(static_cast<Eigen::Index>(t), kLogFlowColumn);
        }
        log_flow[0] += log_z;
        log_flow[n] = std::log(tr.reward);
        if (kind == LossKind::TrajectoryBalance)
            total += tb_loss_value(log_flow[0], log_pf, tr.reward);
        else
            total += ad::subtb_value(log_flow, log_pf, lambda, ad::SubtbWeighting::Lambda);
    }
    return total / static_cast<double>(trajectories.size());
}

double gradient_relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / (std::abs(numeric) + 1e-8);
}

CheckResult gradient_check(LossKind kind, std::uint64_t seed, const GradientCheckOptions& opts,
                           const GradientFn& gradient) {
    CheckResult result;
    result.name = "gradient_" + to_string(kind);
    result.threshold = opts.tolerance;
    const ObjectiveSettings objectives;
    double worst = 0.0;
    for (int trial = 0; trial < opts.trials; ++trial) {
        Rng rng = derive_rng(seed, {0x67726164, static_cast<std::uint64_t>(trial)});
        const Protein protein = random_protein(rng, 2, 5);
        const CodonDesignEnv env(protein);
        MlpPolicy policy(MlpShape{opts.hidden, kDefaultMaxLength}, rng());
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& t : policy.params().tensors)
            for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += 0.1 * normal(rng);
        policy.params().tensors[MlpPolicy::kLogZ](0, 0) = normal(rng);

        const int batch = 3;
        std::vector<WeightVector> ws;
        for (int b = 0; b < batch; ++b) ws.push_back(sample_weights({1.0, 1.0, 1.0}, rng));
        auto trajectories = rollout_batch(env, policy, ws, batch, 0.5, objectives, rng(), 0);
        const double lambda = 0.9;
        const auto analytic = gradient(policy, protein, trajectories, ws, kind, lambda);

        const auto& params = policy.params();
        std::vector<std::pair<int, Eigen::Index>> entries{{params.log_z_slot, 0}};
        std::uniform_int_distribution<int> slot_dist(0, static_cast<int>(params.tensors.size()) - 1);
        while (static_cast<int>(entries.size()) < opts.entries_per_trial) {
            const int slot = slot_dist(rng);
            std::uniform_int_distribution<Eigen::Index> idx(0, params.tensors[slot].size() - 1);
            entries.emplace_back(slot, idx(rng));
        }
        for (auto [slot, idx] : entries) {
            auto plus = policy, minus = policy;
            plus.params().tensors[slot].data()[idx] += opts.step;
            minus.params().tensors[slot].data()[idx] -= opts.step;
            const double fd = (loss_value(plus, protein, trajectories, ws, kind, lambda) -
                               loss_value(minus, protein, trajectories, ws, kind, lambda)) /
                              (2.0 * opts.step);
            const double err = gradient_relative_error(analytic.grads[slot].data()[idx], fd);
            if (err > worst) {
                worst = err;
                result.detail = "worst at trial " + std::to_string(trial) + ", tensor " + params.names[slot] +
                                "[" + std::to_string(idx) + "]";
            }
        }
    }
    result.measured = worst;
    result.passed = worst <= opts.tolerance;
    return result;
}

CheckResult tv_check(const std::string& protein_text, std::uint64_t seed, int steps, int draws, double tolerance,
                     unsigned threads) {
    CheckResult result;
    result.name = "tv_" + protein_text;
    result.threshold = tolerance;
    const Protein protein = Protein::from_string(protein_text);
    const CodonDesignEnv env(protein);
    const ObjectiveSettings objectives;
    const WeightVector w{0.3, 0.3, 0.4};

    TabularPolicy policy(env, {w});
    TrainingConfig cfg;
    cfg.loss = LossKind::TrajectoryBalance;
    cfg.batch_size = 16;
    cfg.n_iterations = steps;
    cfg.conditional = false;
    cfg.fixed_weights = w;
    cfg.optimizer.lr = 0.05;
    cfg.optimizer.lr_log_z = 0.1;
    cfg.seed = seed;
    cfg.threads = threads;
    Trainer trainer(policy, cfg, objectives);
    trainer.train(env);

    const auto space = enumerate(protein, objectives);
    const auto probs = exact_distribution(space, w, objectives.reward_floor);
    std::map<std::string, double> exact;
    for (std::size_t i = 0; i < space.size(); ++i) exact[space.designs[i].str()] = probs[i];

    std::map<std::string, std::size_t> counts;
    for (const auto& tr : sample_designs(env, policy, w, draws, objectives, seed ^ 0x5a5a5a5aULL, threads))
        ++counts[tr.design.str()];
    result.measured = tv_distance(counts, exact);
    result.passed = result.measured < tolerance;
    result.detail = std::to_string(space.size()) + " designs, " + std::to_string(steps) + " steps, " +
                    std::to_string(draws) + " draws";
    return result;
}

CheckResult mask_check(std::uint64_t seed, int proteins) {
    CheckResult result;
    result.name = "masks";
    std::size_t violations = 0, states = 0;
    for (int k = 0; k < proteins; ++k) {
        Rng rng = derive_rng(seed, {0x6d61736b, static_cast<std::uint64_t>(k)});
        const Protein protein = random_protein(rng, 1, 30);
        const CodonDesignEnv env(protein);
        State s = env.initial_state();
        while (true) {
            ++states;
            const auto fwd = env.forward_mask(s);
            if (s.fill_count() > 0) {
                const auto bwd = env.backward_mask(s);
                violations += std::count(bwd.begin(), bwd.end(), true) != 1 || !bwd[s.fill_count() - 1];
            }
            if (s.is_complete()) {
                violations += !(fwd.count() == 1 && fwd.test(kExitAction));
                break;
            }
            const auto syn = synonymous_codons(protein[s.fill_count()]);
            violations += fwd.test(kExitAction) || fwd.count() != syn.size();
            for (const auto& c : syn) violations += !fwd.test(c.index());
            std::uniform_int_distribution<std::size_t> pick(0, syn.size() - 1);
            const auto next = std::get<State>(env.step(s, Action::codon(syn[pick(rng)])));
            violations += !(env.backstep(next) == s);
            s = next;
        }
        const Matrix logits = Matrix::Zero(1, kNumActions);
        const std::vector<ActionMask> one{env.forward_mask(env.initial_state())};
        const Matrix lp = ad::masked_log_softmax(logits, one);
        for (int a = 0; a < kNumActions; ++a)
            if (!one[0].test(a)) violations += std::exp(lp(0, a)) > 1e-30;
    }
    result.measured = static_cast<double>(violations);
    result.threshold = 0.0;
    result.passed = violations == 0;
    result.detail = std::to_string(states) + " states visited";
    return result;
}

VerifyReport run_verification(const VerifyOptions& opts) {
    VerifyReport report;
    report.checks.push_back(mask_check(opts.seed));
    report.checks.push_back(gradient_check(LossKind::TrajectoryBalance, opts.seed, opts.gradient, opts.gradient_fn));
    report.checks.push_back(
        gradient_check(LossKind::SubTrajectoryBalance, opts.seed, opts.gradient, opts.gradient_fn));
    report.checks.push_back(tv_check("MFK", opts.seed, opts.tv_steps, opts.tv_draws, 0.05, opts.threads));
    return report;
}

}  // namespace codonflow
