// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "codonflow/commands.hpp"
#include "codonflow/curriculum.hpp"
#include "codonflow/metrics.hpp"
#include "codonflow/oracle.hpp"
#include "codonflow/training.hpp"
#include "codonflow/verify.hpp"
#include "oracles.hpp"

using namespace codonflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string summary;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Protein random_protein(Rng& rng, std::size_t lo, std::size_t hi) {
    static const std::string letters = "ACDEFGHIKLMNPQRSTVWY";
    const auto len = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += letters[rng() % letters.size()];
    return Protein::from_string(s);
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Proportional sampling of a trained tabular policy.
Outcome proportional_sampling() {
    const std::vector<std::string> proteins{"MFK", "LL", "KYF", "CHW"};
    const int steps = 4000, draws = 50000;
    std::vector<std::future<std::pair<CheckResult, double>>> jobs;
    for (const auto& p : proteins)
        jobs.push_back(std::async(std::launch::async, [p] {
            auto start = Clock::now();
            auto r = tv_check(p, 11, steps, draws, 0.05);
            return std::make_pair(r, seconds_since(start));
        }));
    Outcome out{true, ""};
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto [r, secs] = jobs[i].get();
        const bool ok = r.passed && secs < 120.0;
        out.passed &= ok;
        out.summary += fmt("%s TV=%.4f (%s, %.1fs)%s", proteins[i].c_str(), r.measured, r.detail.c_str(), secs,
                           i + 1 < jobs.size() ? "; " : "");
    }
    out.summary += "; threshold TV < 0.05, < 120 s each";
    return out;
}

// 2. Analytic gradients against central differences.
Outcome gradient_exactness() {
    auto start = Clock::now();
    GradientCheckOptions opts;
    opts.trials = 100;
    auto tb = gradient_check(LossKind::TrajectoryBalance, 21, opts);
    auto subtb = gradient_check(LossKind::SubTrajectoryBalance, 22, opts);
    const double secs = seconds_since(start);
    return {tb.passed && subtb.passed && secs < 60.0,
            fmt("max rel err TB=%.3g SubTB=%.3g over 100 trials each (step 1e-5); threshold 1e-4; %.1fs",
                tb.measured, subtb.measured, secs)};
}

// 3. Every sampled design translates to its target protein.
Outcome validity() {
    Rng rng = derive_rng(31);
    ObjectiveSettings settings;
    std::size_t total = 0, valid = 0;
    for (int k = 0; k < 20; ++k) {
        const Protein protein = random_protein(rng, 10, 60);
        const CodonDesignEnv env(protein);
        MlpPolicy policy(MlpShape{64, kDefaultMaxLength}, 100 + k);
        const std::vector<WeightVector> ws{WeightVector(1, 1, 1)};
        for (const auto& tr : rollout_batch(env, policy, ws, 500, 0.25, settings, 7, k)) {
            ++total;
            valid += translate(tr.design) == protein;
        }
    }
    return {total == 10000 && valid == total,
            fmt("%zu / %zu designs translate to their protein (20 proteins, L in [10,60]); threshold 100%%", valid,
                total)};
}

// 4. SubTB restricted to the full trajectory equals TB.
Outcome subtb_reduces_to_tb() {
    Rng rng = derive_rng(41);
    ObjectiveSettings settings;
    double worst = 0.0;
    int count = 0;
    while (count < 1000) {
        const Protein protein = random_protein(rng, 1, 12);
        const CodonDesignEnv env(protein);
        MlpPolicy policy(MlpShape{16, kDefaultMaxLength}, rng());
        policy.params().tensors[MlpPolicy::kLogZ](0, 0) = std::normal_distribution<double>(0.0, 2.0)(rng);
        const std::vector<WeightVector> ws{sample_weights({1, 1, 1}, rng)};
        auto batch = rollout_batch(env, policy, ws, 10, 0.5, settings, rng(), 0);
        for (const auto& tr : batch) {
            std::vector<State> states(tr.states.begin(), tr.states.end() - 1);
            auto out = policy.evaluate(protein, states, ws);
            std::vector<double> flow, pf(tr.log_pf.begin(), tr.log_pf.end() - 1);
            flow.push_back(policy.params().log_z() + out(0, kLogFlowColumn));
            for (Eigen::Index t = 1; t < out.rows(); ++t) flow.push_back(out(t, kLogFlowColumn));
            flow.push_back(std::log(tr.reward));
            const double sub = ad::subtb_value(flow, pf, 0.9, ad::SubtbWeighting::FullOnly);
            const double tb = tb_loss_value(flow[0], pf, tr.reward);
            worst = std::max(worst, std::abs(sub - tb));

            ad::Tape tape;
            auto terms = record_terms(tape, policy, protein, std::span<const Trajectory>(&tr, 1), ws);
            const double taped_sub = subtb_loss(tape, terms[0], 0.9, ad::SubtbWeighting::FullOnly).scalar();
            const double taped_tb = tb_loss(tape, terms[0]).scalar();
            worst = std::max(worst, std::abs(taped_sub - taped_tb));
            worst = std::max(worst, std::abs(taped_tb - tb));
            ++count;
        }
    }
    return {worst <= 1e-12, fmt("max |SubTB_full - TB| = %.3g over %d trajectories; threshold 1e-12", worst, count)};
}

// 5. Nussinov DP against exhaustive structure enumeration.
Outcome nussinov_correctness() {
    Rng rng = derive_rng(51);
    const char bases[] = "AUGC";
    int matches = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const auto len = std::uniform_int_distribution<int>(1, 10)(rng);
        std::string s;
        for (int k = 0; k < len; ++k) s += bases[rng() % 4];
        std::vector<Base> seq;
        for (char c : s) seq.push_back(static_cast<Base>(std::string("AUGC").find(c)));
        matches += mfe_proxy(seq, 3) == oracle::max_pairs_exhaustive(s, 3);
    }
    return {matches == n, fmt("%d / %d random sequences (length <= 10) match exactly", matches, n)};
}

// 6. Teacher focuses on the only improving task.
Outcome teacher_focusing() {
    CurriculumConfig cfg;
    cfg.lpe = LpEstimator::Online;
    cfg.lpe_alpha = 1.0;
    cfg.acp = AttentionKind::LearningProgress;
    cfg.a2d = DistributionKind::Prop;
    cfg.floor_eps = 0.01;
    Teacher teacher(5, cfg);
    double after_first = 0.0, lowest = 1.0;
    for (int round = 1; round <= 5; ++round) {
        std::vector<double> m(5, 0.0);
        m[1] = 0.1 * round;
        teacher.observe(m);
        if (round == 1) after_first = teacher.probabilities()[1];
        lowest = std::min(lowest, teacher.probabilities()[1]);
    }
    return {after_first >= 0.70 && lowest >= 0.70,
            fmt("P(improving) after round 1 = %.4f, min over 5 rounds = %.4f; threshold 0.70", after_first, lowest)};
}

// 7. Curriculum reaches the random-order round-20 reward level in fewer rounds.
struct ScheduleRun {
    std::vector<double> mean_m;
};

ScheduleRun run_schedule(const std::vector<Task>& tasks, Schedule schedule, std::uint64_t seed, int rounds) {
    MlpPolicy policy(MlpShape{32, 16}, seed);
    TrainingConfig tc;
    tc.loss = LossKind::SubTrajectoryBalance;
    tc.batch_size = 16;
    tc.seed = seed;
    Trainer trainer(policy, tc, ObjectiveSettings{});
    CurriculumConfig cc;
    cc.eval_every = 2;
    cc.n_iterations = rounds * cc.eval_every;
    cc.train_steps_per_task = 10;
    cc.n_eval = 32;
    auto result = curriculum_train(tasks, trainer, cc, schedule);
    ScheduleRun run;
    for (const auto& r : result.rounds) run.mean_m.push_back(r.mean_m());
    return run;
}

int first_reaching(const std::vector<double>& series, double threshold) {
    for (std::size_t i = 0; i < series.size(); ++i)
        if (series[i] >= threshold) return static_cast<int>(i) + 1;
    return std::numeric_limits<int>::max();
}

Outcome curriculum_benefit() {
    auto start = Clock::now();
    const int rounds = 20, seeds = 10;
    std::vector<std::future<std::pair<int, int>>> jobs;
    std::vector<std::pair<int, int>> results(seeds);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<unsigned>(worker_count(), seeds); ++w)
        pool.emplace_back([&] {
            for (int s; (s = next++) < seeds;) {
                Rng rng = derive_rng(71, {static_cast<std::uint64_t>(s)});
                std::vector<Protein> proteins;
                for (int k = 0; k < 8; ++k) proteins.push_back(random_protein(rng, 3, 5));
                for (int k = 0; k < 8; ++k) proteins.push_back(random_protein(rng, 8, 12));
                const std::vector<LengthInterval> intervals{{3, 5}, {8, 12}};
                const auto tasks = build_tasks(intervals, proteins, true, s);
                const auto seed = static_cast<std::uint64_t>(1000 + s);
                auto random_run = run_schedule(tasks, Schedule::RandomOrder, seed, rounds);
                auto curriculum_run = run_schedule(tasks, Schedule::Curriculum, seed, rounds);
                const double threshold = random_run.mean_m[rounds - 1];
                results[s] = {first_reaching(curriculum_run.mean_m, threshold),
                              first_reaching(random_run.mean_m, threshold)};
            }
        });
    for (auto& t : pool) t.join();
    int wins = 0;
    std::string detail;
    for (int s = 0; s < seeds; ++s) {
        auto [c, r] = results[s];
        wins += c < r;
        detail += fmt("%s%d/%d", s ? " " : "", c == std::numeric_limits<int>::max() ? -1 : c, r);
    }
    const double secs = seconds_since(start);
    return {wins >= 7 && secs < 900.0,
            fmt("curriculum faster in %d / %d seeds (rounds curriculum/random, -1 = not reached: %s); threshold >= 7; "
                "%.0fs",
                wins, seeds, detail.c_str(), secs)};
}

// 8. Trained sampler is diverse and beats uniform sampling on top-50 reward.
Outcome uniqueness_and_reward() {
    const Protein protein = Protein::from_string("MALWMRLLPLLALLALWGPDPAAAFVNQHLCGSHL");
    const CodonDesignEnv env(protein);
    ObjectiveSettings settings;
    const WeightVector w{0.3, 0.3, 0.4};
    MlpPolicy policy(MlpShape{64, kDefaultMaxLength}, 81);
    TrainingConfig tc;
    tc.batch_size = 32;
    tc.n_iterations = 1500;
    tc.seed = 81;
    tc.threads = worker_count();
    Trainer trainer(policy, tc, settings);
    trainer.train(env);

    auto to_samples = [&](const std::vector<Trajectory>& trs) {
        std::vector<Sample> out;
        for (const auto& tr : trs) out.push_back({tr.design, evaluate_objectives(tr.design, settings), tr.reward});
        return out;
    };
    auto trained = to_samples(sample_designs(env, policy, w, 100, settings, 82));
    const std::vector<WeightVector> ws{w};
    auto uniform = to_samples(rollout_batch(env, policy, ws, 100, 1.0, settings, 83, 0));
    const auto unique = uniqueness(trained);
    const double top_trained = topk_reward(trained, std::min<std::size_t>(50, unique));
    const double top_uniform = topk_reward(uniform, std::min<std::size_t>(50, uniqueness(uniform)));
    return {unique >= 95 && top_trained > top_uniform,
            fmt("%zu / 100 unique (threshold 95); top-50 reward trained %.4f vs uniform %.4f", unique, top_trained,
                top_uniform)};
}

// 9. Pareto front against the brute-force filter.
Outcome pareto_equivalence() {
    Rng rng = derive_rng(91);
    static const auto designs = oracle::all_designs("LLL");
    int matches = 0;
    const int sets = 100;
    for (int k = 0; k < sets; ++k) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
        const bool coarse = k % 2 == 0;  // half the sets on a coarse grid to force ties
        std::vector<Sample> samples;
        std::vector<std::array<double, 3>> points;
        for (std::size_t i = 0; i < n; ++i) {
            Sample s;
            s.design = MrnaSequence::from_string(designs[i]);
            for (auto& v : s.objectives.phi)
                v = coarse ? std::uniform_int_distribution<int>(0, 3)(rng) / 3.0 : uniform01(rng);
            points.push_back(s.objectives.phi);
            samples.push_back(s);
        }
        std::set<std::string> expect, got;
        for (std::size_t i = 0; i < n; ++i) {
            bool dominated = false;
            for (std::size_t j = 0; j < n && !dominated; ++j) dominated = oracle::dominated_by(points[i], points[j]);
            if (!dominated) expect.insert(designs[i]);
        }
        for (const auto& s : pareto_front(samples)) got.insert(s.design.str());
        matches += got == expect;
    }
    return {matches == sets, fmt("%d / %d random sample sets (n <= 200) give identical fronts", matches, sets)};
}

// 10. Byte-identical train and sample outputs across two runs.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[entry.path().filename().string()] = ss.str();
    }
    return files;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "codonflow_acceptance_determinism";
    RunConfig cfg;
    cfg.output_dir = dir.string();
    cfg.protein = "MALWMRLLPLLALLAL";
    cfg.seed = 101;
    cfg.threads = 1;
    cfg.policy.hidden = 32;
    cfg.training.batch_size = 16;
    cfg.training.n_iterations = 50;
    cfg.checkpoint = (dir / "checkpoint.json").string();
    std::vector<std::map<std::string, std::string>> runs;
    std::ostringstream log;
    for (int run = 0; run < 2; ++run) {
        fs::remove_all(dir);
        if (run_command("train", cfg, "", log) != kExitOk || run_command("sample", cfg, "", log) != kExitOk)
            return {false, "command failed: " + log.str()};
        runs.push_back(snapshot(dir));
    }
    fs::remove_all(dir);
    std::vector<std::string> differing;
    for (const auto& [name, body] : runs[0])
        if (!runs[1].count(name) || runs[1].at(name) != body) differing.push_back(name);
    std::string names;
    for (const auto& [name, body] : runs[0]) names += (names.empty() ? "" : ",") + name;
    return {differing.empty() && runs[0].size() == runs[1].size(),
            fmt("%zu files compared (%s), %zu differ", runs[0].size(), names.c_str(), differing.size())};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"proportional sampling", proportional_sampling},
        {"gradient exactness", gradient_exactness},
        {"validity invariant", validity},
        {"SubTB to TB reduction", subtb_reduces_to_tb},
        {"Nussinov correctness", nussinov_correctness},
        {"teacher focusing", teacher_focusing},
        {"curriculum benefit", curriculum_benefit},
        {"uniqueness and reward", uniqueness_and_reward},
        {"Pareto equivalence", pareto_equivalence},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        all &= o.passed;
        std::printf("%s %d %s: %s\n", o.passed ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.summary.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
