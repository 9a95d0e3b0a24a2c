#include "codonflow/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "codonflow/errors.hpp"

namespace codonflow {

AdamOptimizer::AdamOptimizer(const ParameterSet& params, OptimizerConfig cfg)
    : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()), lr_(cfg.lr), lr_log_z_(cfg.lr_log_z) {
    if (!(cfg.lr > 0.0) || !(cfg.lr_log_z > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
}

void AdamOptimizer::step(ParameterSet& params, const std::vector<Matrix>& grads) {
    if (grads.size() != params.tensors.size() || m_.size() != grads.size())
        throw UsageError("gradient count does not match the parameter set");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!grads[i].allFinite()) {
            std::ostringstream msg;
            msg << "non-finite gradient in '" << params.names[i] << "' at optimizer step " << t_ + 1
                << " (max |g| over finite entries: "
                << grads[i].unaryExpr([](double g) { return std::isfinite(g) ? std::abs(g) : 0.0; }).maxCoeff()
                << ")";
            throw NumericError(msg.str());
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        const double lr = static_cast<int>(i) == params.log_z_slot ? lr_log_z_ : lr_;
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i].cwiseProduct(grads[i]);
        params.tensors[i].array() -=
            lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
    }
}

void AdamOptimizer::scale_learning_rates(double factor, double floor) {
    lr_ = std::max(floor, lr_ * factor);
    lr_log_z_ = std::max(floor, lr_log_z_ * factor);
}

bool PlateauScheduler::report(double metric, AdamOptimizer& optimizer) {
    if (metric < best_ - threshold_ * std::abs(best_) || !std::isfinite(best_)) {
        best_ = metric;
        bad_ = 0;
        return false;
    }
    if (++bad_ >= patience_) {
        optimizer.scale_learning_rates(optimizer.config().lr_factor, optimizer.config().min_lr);
        bad_ = 0;
        return true;
    }
    return false;
}

}  // namespace codonflow
