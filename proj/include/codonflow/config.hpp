#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codonflow/curriculum.hpp"
#include "codonflow/io.hpp"
#include "codonflow/objectives.hpp"
#include "codonflow/training.hpp"

namespace codonflow {

struct ObjectiveOptions {
    /// Codon usage file; empty selects the bundled human table.
    std::string codon_usage;
    double gc_lo = 0.35;
    double gc_hi = 0.65;
    int min_loop = 3;
    double reward_floor = 1e-6;
    /// Shell command for an external folding scorer; empty uses the pair-count proxy.
    std::string external_scorer;
    double external_per_nt_min = -0.5;

    ObjectiveSettings resolve() const;
};

struct CurriculumOptions {
    /// "none" trains on a single protein; otherwise curriculum, short_only, long_only, random_order.
    std::string schedule = "none";
    /// Named preset applied before the explicit keys; empty for none.
    std::string preset;
    std::vector<LengthInterval> tasks = default_task_intervals();
    bool hold_out_eval = true;
    CurriculumConfig config{};
};

struct SamplingOptions {
    int n_samples = 100;
    int top_n = 50;
    WeightVector weights{0.3, 0.3, 0.4};
};

/// Everything one CLI run needs. Parsed from JSON; unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string input_format = "fasta";
    /// Protein file (FASTA or CSV) and/or a literal protein sequence.
    std::string proteins;
    std::string protein;
    std::string output_dir = "out";
    std::string checkpoint;
    std::uint64_t enumeration_cap = 1'000'000;

    ObjectiveOptions objectives{};
    TrainingConfig training{};
    MlpShape policy{};
    CurriculumOptions curriculum{};
    SamplingOptions sampling{};

    void validate() const;
    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
    static RunConfig from_file(const std::string& path);
};

}  // namespace codonflow
