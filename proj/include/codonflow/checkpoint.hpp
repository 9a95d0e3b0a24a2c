#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codonflow/policy.hpp"
#include "codonflow/training.hpp"

namespace codonflow {

/// Policy parameters plus the optimizer, scheduler and counters needed to resume training.
struct Checkpoint {
    MlpShape shape{};
    std::vector<Matrix> tensors;
    std::vector<Matrix> adam_m, adam_v;
    long adam_steps = 0;
    double lr = 0.0;
    double lr_log_z = 0.0;
    /// Best reported loss; absent before the first scheduler report.
    std::optional<double> scheduler_best;
    int scheduler_bad = 0;
    long iteration = 0;
    std::uint64_t seed = 0;
    /// Run configuration the checkpoint was produced with, as JSON text.
    std::string config_json;

    MlpPolicy policy() const;
};

Checkpoint make_checkpoint(const MlpPolicy& policy, Trainer& trainer, std::uint64_t seed,
                           const std::string& config_json);
/// Writes JSON; doubles round-trip exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
/// Restores optimizer, scheduler and iteration counter. The trainer's policy must already hold
/// the checkpoint's parameters.
void restore_trainer(Trainer& trainer, const Checkpoint& ckpt);

}  // namespace codonflow
