#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "codonflow/commands.hpp"
#include "codonflow/errors.hpp"

using namespace codonflow;

int main(int argc, char** argv) {
    CLI::App app{"Codon sequence design with a multi-objective GFlowNet"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, format, protein, proteins, out_dir, checkpoint, input;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<int> n_samples;
    std::vector<double> weights;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--threads", threads, "Worker threads (1 is deterministic)");
    app.add_option("--format", format, "Input format")->check(CLI::IsMember({"fasta", "csv"}));
    app.add_option("--protein", protein, "Protein sequence (one-letter codes)");
    app.add_option("--proteins", proteins, "Protein file (FASTA or CSV)");
    app.add_option("--out", out_dir, "Output directory");

    auto* enumerate = app.add_subcommand("enumerate", "Enumerate every design of a small protein");
    auto* train = app.add_subcommand("train", "Train a policy");
    auto* sample = app.add_subcommand("sample", "Sample designs from a checkpoint");
    sample->add_option("--checkpoint", checkpoint, "Checkpoint file");
    sample->add_option("-n,--n-samples", n_samples, "Number of samples");
    sample->add_option("--weights", weights, "Objective weights gc mfe cai")->expected(3);
    auto* score = app.add_subcommand("score", "Score nucleotide sequences");
    score->add_option("input", input, "Sequence file (FASTA or CSV)")->required();
    score->add_option("--weights", weights, "Objective weights gc mfe cai")->expected(3);
    auto* verify = app.add_subcommand("verify", "Run the built-in property checks");
    (void)enumerate;
    (void)train;
    (void)verify;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitRefused;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        if (!format.empty()) cfg.input_format = format;
        if (!protein.empty()) cfg.protein = protein;
        if (!proteins.empty()) cfg.proteins = proteins;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
        if (n_samples) cfg.sampling.n_samples = *n_samples;
        if (!weights.empty()) cfg.sampling.weights = WeightVector(weights[0], weights[1], weights[2]);
        cfg.validate();
    } catch (const Error& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return kExitRefused;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    return run_command(name, cfg, input, std::cerr);
}
