#include "codonflow/commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "codonflow/checkpoint.hpp"
#include "codonflow/errors.hpp"
#include "codonflow/io.hpp"
#include "codonflow/oracle.hpp"
#include "codonflow/verify.hpp"

namespace codonflow {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

fs::path output_path(const RunConfig& cfg, const std::string& file) {
    fs::create_directories(cfg.output_dir);
    return fs::path(cfg.output_dir) / file;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

json weights_json(const WeightVector& w) { return json::array({w[0], w[1], w[2]}); }

TrainingConfig training_config(const RunConfig& cfg) {
    TrainingConfig t = cfg.training;
    t.seed = cfg.seed;
    t.threads = cfg.threads;
    return t;
}

std::vector<Sample> to_samples(std::span<const Trajectory> trajectories, const WeightVector& w,
                               const ObjectiveSettings& objectives) {
    std::vector<MrnaSequence> designs;
    for (const auto& tr : trajectories) designs.push_back(tr.design);
    auto scored = evaluate_batch(designs, objectives, 1);
    std::vector<Sample> out;
    for (std::size_t i = 0; i < designs.size(); ++i)
        out.push_back(Sample{designs[i], scored[i], scalarize(scored[i].phi, w, objectives.reward_floor)});
    return out;
}

}  // namespace

Protein resolve_protein(const RunConfig& cfg) {
    if (!cfg.protein.empty()) return Protein::from_string(cfg.protein);
    if (cfg.proteins.empty()) throw InputError("no protein given (set 'protein' or 'proteins')");
    auto pool = load_proteins(cfg.proteins, parse_input_format(cfg.input_format));
    if (pool.empty()) throw InputError("protein file '" + cfg.proteins + "' has no records");
    return pool.entries().front().protein;
}

int cmd_enumerate(const RunConfig& cfg, std::ostream& log) {
    const Protein protein = resolve_protein(cfg);
    const auto objectives = cfg.objectives.resolve();
    const WeightVector& w = cfg.sampling.weights;
    const auto space = enumerate(protein, objectives, cfg.enumeration_cap, cfg.threads);
    auto csv = open_output(output_path(cfg, "enumerate.csv"));
    write_enumeration_csv(csv, space, w, objectives.reward_floor);

    json summary;
    summary["protein"] = protein.str();
    summary["size"] = space.size();
    summary["Z"] = partition_function(space, w, objectives.reward_floor);
    summary["front_size"] = exact_pareto_front(space).size();
    summary["weights"] = weights_json(w);
    auto out = open_output(output_path(cfg, "summary.json"));
    out << summary.dump(2) << '\n';
    log << summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& log) {
    const auto objectives = cfg.objectives.resolve();
    MlpPolicy policy(cfg.policy, cfg.seed);
    Trainer trainer(policy, training_config(cfg), objectives);
    const std::string config_json = cfg.to_json();
    {
        auto out = open_output(output_path(cfg, "run_config.json"));
        out << config_json << '\n';
    }
    const auto ckpt_path = output_path(cfg, "checkpoint.json");
    auto save = [&] { save_checkpoint(ckpt_path.string(), make_checkpoint(policy, trainer, cfg.seed, config_json)); };

    std::optional<CurriculumResult> curriculum;
    try {
        if (cfg.curriculum.schedule == "none") {
            const CodonDesignEnv env(resolve_protein(cfg));
            log << "training on " << env.length() << " residues for " << cfg.training.n_iterations
                << " iterations\n";
            trainer.train(env);
        } else {
            const Schedule schedule = parse_schedule(cfg.curriculum.schedule);
            if (cfg.proteins.empty()) throw InputError("a curriculum schedule needs a 'proteins' file");
            const auto pool = load_proteins(cfg.proteins, parse_input_format(cfg.input_format));
            const auto proteins = pool.proteins();
            const auto tasks = build_tasks(cfg.curriculum.tasks, proteins, cfg.curriculum.hold_out_eval, cfg.seed);
            const auto& cc = cfg.curriculum.config;
            log << "schedule=" << to_string(schedule) << " lpe=" << to_string(cc.lpe)
                << " lpe_alpha=" << format_number(cc.lpe_alpha) << " acp=" << to_string(cc.acp)
                << " a2d=" << to_string(cc.a2d) << " a2d_eps=" << format_number(cc.a2d_eps) << '\n';
            curriculum = curriculum_train(tasks, trainer, cc, schedule);
        }
    } catch (const NumericError& e) {
        save();
        log << "numeric abort: " << e.what() << "\ncheckpoint: " << ckpt_path.string() << '\n';
        return kExitNumeric;
    }
    save();
    {
        auto out = open_output(output_path(cfg, "loss_trace.csv"));
        write_loss_trace_csv(out, trainer.history());
    }
    if (curriculum) {
        auto out = open_output(output_path(cfg, "teacher_trace.csv"));
        write_teacher_trace_csv(out, curriculum->rounds, cfg.curriculum.config);
    }
    if (!trainer.history().empty()) {
        const auto& last = trainer.history().back();
        log << "iterations=" << trainer.iteration() << " loss=" << format_number(last.loss)
            << " mean_reward=" << format_number(last.mean_reward) << '\n';
    }
    log << "checkpoint: " << ckpt_path.string() << '\n';
    return kExitOk;
}

int cmd_sample(const RunConfig& cfg, std::ostream& log) {
    const std::string path =
        cfg.checkpoint.empty() ? (fs::path(cfg.output_dir) / "checkpoint.json").string() : cfg.checkpoint;
    const auto ckpt = load_checkpoint(path);
    const MlpPolicy policy = ckpt.policy();
    const Protein protein = resolve_protein(cfg);
    if (!ckpt.config_json.empty()) {
        try {
            const auto trained = RunConfig::from_json(ckpt.config_json);
            if (!trained.protein.empty() && trained.protein != protein.str())
                log << "note: checkpoint was trained on " << trained.protein << ", sampling " << protein.str()
                    << '\n';
        } catch (const Error&) {
        }
    }
    const auto objectives = cfg.objectives.resolve();
    const WeightVector& w = cfg.sampling.weights;
    const CodonDesignEnv env(protein);
    const auto trajectories = sample_designs(env, policy, w, cfg.sampling.n_samples, objectives, cfg.seed, cfg.threads);
    const auto samples = to_samples(trajectories, w, objectives);
    {
        auto out = open_output(output_path(cfg, "samples.csv"));
        write_samples_csv(out, samples);
    }
    {
        auto out = open_output(output_path(cfg, "histogram.csv"));
        write_histogram_csv(out, samples);
    }
    const auto report = compute_metrics(samples, static_cast<std::size_t>(cfg.sampling.top_n));
    json meta;
    meta["protein"] = protein.str();
    meta["weights"] = weights_json(w);
    meta["n_samples"] = cfg.sampling.n_samples;
    meta["top_n"] = cfg.sampling.top_n;
    meta["seed"] = cfg.seed;
    meta["metrics"] = json::parse(report.to_json());
    auto out = open_output(output_path(cfg, "metrics.json"));
    out << meta.dump(2) << '\n';
    log << meta.dump(2) << '\n';
    return kExitOk;
}

int cmd_score(const RunConfig& cfg, const std::string& input, std::ostream& log) {
    if (input.empty()) throw InputError("score needs an input file of nucleotide sequences");
    const auto records = load_designs(input, parse_input_format(cfg.input_format));
    const auto objectives = cfg.objectives.resolve();
    const WeightVector& w = cfg.sampling.weights;
    std::vector<MrnaSequence> designs;
    for (const auto& [name, x] : records) designs.push_back(x);
    const auto scored = evaluate_batch(designs, objectives, cfg.threads);
    auto out = open_output(output_path(cfg, "scores.csv"));
    out << "# codonflow scores v1\n";
    out << "name,protein,sequence,gc_raw,mfe_raw,cai,phi_gc,phi_mfe,phi_cai,reward\n";
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const auto& o = scored[i];
        out << records[i].first << ',' << translate(designs[i]).str() << ',' << designs[i].str() << ','
            << format_number(o.gc_raw) << ',' << format_number(o.mfe_raw) << ',' << format_number(o.cai_raw) << ','
            << format_number(o.phi[0]) << ',' << format_number(o.phi[1]) << ',' << format_number(o.phi[2]) << ','
            << format_number(scalarize(o.phi, w, objectives.reward_floor)) << '\n';
    }
    log << "scored " << designs.size() << " sequences\n";
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
    VerifyOptions opts;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    const auto report = run_verification(opts);
    const auto text = report.to_json();
    auto out = open_output(output_path(cfg, "verify.json"));
    out << text << '\n';
    log << text << '\n';
    return report.passed() ? kExitOk : kExitVerifyFailed;
}

int run_command(const std::string& name, const RunConfig& cfg, const std::string& input, std::ostream& log) {
    try {
        if (name == "enumerate") return cmd_enumerate(cfg, log);
        if (name == "train") return cmd_train(cfg, log);
        if (name == "sample") return cmd_sample(cfg, log);
        if (name == "score") return cmd_score(cfg, input, log);
        if (name == "verify") return cmd_verify(cfg, log);
        throw UsageError("unknown command '" + name + "'");
    } catch (const CapExceededError& e) {
        log << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const NumericError& e) {
        log << "numeric abort: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const InputError& e) {
        log << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const ConfigError& e) {
        log << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const UsageError& e) {
        log << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const fs::filesystem_error& e) {
        log << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kExitVerifyFailed;
    }
}

}  // namespace codonflow
