#pragma once

#include <limits>
#include <vector>

#include "codonflow/policy.hpp"

namespace codonflow {

struct OptimizerConfig {
    double lr = 5e-3;
    double lr_log_z = 1e-1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// Evaluations without improvement before both learning rates are halved.
    int lr_patience = 10;
    double lr_factor = 0.5;
    double min_lr = 1e-6;
};

/// Adam with a separate learning rate for the log-partition parameter.
class AdamOptimizer {
   public:
    AdamOptimizer() = default;
    AdamOptimizer(const ParameterSet& params, OptimizerConfig cfg);

    /// One update. Throws NumericError, leaving parameters untouched, on a non-finite gradient.
    void step(ParameterSet& params, const std::vector<Matrix>& grads);

    double lr() const { return lr_; }
    double lr_log_z() const { return lr_log_z_; }
    void scale_learning_rates(double factor, double floor);
    long steps() const { return t_; }
    const OptimizerConfig& config() const { return cfg_; }

    // exposed for checkpointing
    std::vector<Matrix>& first_moments() { return m_; }
    std::vector<Matrix>& second_moments() { return v_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }
    void restore(long steps, double lr, double lr_log_z) {
        t_ = steps;
        lr_ = lr;
        lr_log_z_ = lr_log_z;
    }

   private:
    OptimizerConfig cfg_;
    std::vector<Matrix> m_, v_;
    long t_ = 0;
    double lr_ = 0.0;
    double lr_log_z_ = 0.0;
};

/// Halves the learning rates after `patience` reports without a new best (lower) metric.
class PlateauScheduler {
   public:
    explicit PlateauScheduler(int patience = 10, double threshold = 1e-4)
        : patience_(patience), threshold_(threshold) {}

    /// Returns true when this report triggered a reduction.
    bool report(double metric, AdamOptimizer& optimizer);

    double best() const { return best_; }
    int bad_reports() const { return bad_; }
    void restore(double best, int bad) {
        best_ = best;
        bad_ = bad;
    }

   private:
    int patience_;
    double threshold_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
};

}  // namespace codonflow
