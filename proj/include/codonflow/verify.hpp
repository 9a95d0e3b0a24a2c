#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "codonflow/policy.hpp"
#include "codonflow/training.hpp"

namespace codonflow {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const;
    std::string to_json() const;
};

using GradientFn = std::function<LossAndGrad(const Policy&, const Protein&, std::span<const Trajectory>,
                                             std::span<const WeightVector>, LossKind, double)>;

/// Batch loss recomputed from untaped policy outputs; used as the finite-difference reference.
double loss_value(const Policy& policy, const Protein& protein, std::span<const Trajectory> trajectories,
                  std::span<const WeightVector> weights, LossKind kind, double lambda);

/// |a - f| / (|f| + 1e-8) for an analytic value a and finite difference f.
double gradient_relative_error(double analytic, double numeric);

struct GradientCheckOptions {
    int trials = 100;
    int entries_per_trial = 24;
    double step = 1e-5;
    double tolerance = 1e-4;
    int hidden = 8;
};

/// Central differences against `gradient` on random small policies, proteins and batches.
CheckResult gradient_check(LossKind kind, std::uint64_t seed, const GradientCheckOptions& opts = {},
                           const GradientFn& gradient = loss_and_gradient);

/// Tabular TB on a tiny protein, then TV distance of `draws` samples from the exact R/Z.
CheckResult tv_check(const std::string& protein, std::uint64_t seed, int steps = 4000, int draws = 50000,
                     double tolerance = 0.05, unsigned threads = 1);

/// Forward/backward mask properties along random rollouts of random proteins.
CheckResult mask_check(std::uint64_t seed, int proteins = 20);

struct VerifyOptions {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    GradientCheckOptions gradient{};
    int tv_steps = 4000;
    int tv_draws = 50000;
    GradientFn gradient_fn = loss_and_gradient;
};

VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace codonflow
