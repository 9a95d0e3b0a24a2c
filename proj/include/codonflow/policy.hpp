#pragma once

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "codonflow/autodiff.hpp"
#include "codonflow/environment.hpp"
#include "codonflow/objectives.hpp"
#include "codonflow/rng.hpp"

namespace codonflow {

using ad::Matrix;

/// Feature layout of an encoded state.
namespace features {
inline constexpr int kNextAa = 0;        // 21 slots: 20 residues + "done"
inline constexpr int kDoneSlot = 20;
inline constexpr int kPrevCodon = 21;    // 65 slots: 64 codons + "none"
inline constexpr int kNoPrevSlot = 64;
inline constexpr int kPosition = 86;     // t / L
inline constexpr int kLengthScale = 87;  // L / L_max, clamped to 1
inline constexpr int kWeights = 88;      // 3 slots
inline constexpr int kWidth = 91;
}  // namespace features

inline constexpr int kOutputWidth = kNumActions + 1;
inline constexpr int kLogFlowColumn = kNumActions;
inline constexpr std::size_t kDefaultMaxLength = 180;

using EncodedState = Eigen::RowVectorXd;

EncodedState encode(const State& s, const Protein& p, const WeightVector& w,
                    std::size_t max_length = kDefaultMaxLength);
/// One encoded row per state.
Matrix encode_batch(std::span<const State> states, const Protein& p, std::span<const WeightVector> ws,
                    std::size_t max_length = kDefaultMaxLength);

/// Named tensors; one of them is the 1x1 log-partition parameter.
struct ParameterSet {
    std::vector<Matrix> tensors;
    std::vector<std::string> names;
    int log_z_slot = -1;

    std::vector<Matrix> zeros_like() const;
    bool all_finite() const;
    std::size_t count() const;
    double log_z() const { return tensors.at(log_z_slot)(0, 0); }
};

struct PolicyOutput {
    std::array<double, kNumActions> logits{};
    double log_flow = 0.0;
};

/// Conditional forward policy with a state-flow head and a learned log Z.
///
/// Every row of an output matrix holds the 65 action logits followed by log F(s). The flow of
/// the source state is log Z plus the flow head at s_0, which lets Z depend on the protein and
/// the weights.
class Policy {
   public:
    virtual ~Policy() = default;

    virtual std::string kind() const = 0;
    virtual std::unique_ptr<Policy> clone() const = 0;

    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }

    /// n x 66 outputs without recording.
    virtual Matrix evaluate(const Protein& p, std::span<const State> states,
                            std::span<const WeightVector> ws) const = 0;
    /// Same computation recorded on a tape.
    virtual ad::Var record(ad::Tape& tape, const Protein& p, std::span<const State> states,
                           std::span<const WeightVector> ws) const = 0;

    ad::Var record_log_z(ad::Tape& tape) const {
        return tape.parameter(params_.log_z_slot, params_.tensors[params_.log_z_slot]);
    }

   protected:
    ParameterSet params_;
};

struct MlpShape {
    int hidden = 256;
    std::size_t max_length = kDefaultMaxLength;
};

/// 91 -> hidden -> hidden -> 66 with tanh between the affine layers.
class MlpPolicy final : public Policy {
   public:
    /// Glorot-uniform weights from `seed`, zero biases, zero log Z.
    MlpPolicy(MlpShape shape, std::uint64_t seed);
    /// All parameters zero.
    static MlpPolicy zeros(MlpShape shape);

    std::string kind() const override { return "mlp"; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<MlpPolicy>(*this); }
    const MlpShape& shape() const { return shape_; }

    PolicyOutput forward(const EncodedState& e) const;
    Matrix forward_batch(const Matrix& encoded) const;

    Matrix evaluate(const Protein& p, std::span<const State> states,
                    std::span<const WeightVector> ws) const override;
    ad::Var record(ad::Tape& tape, const Protein& p, std::span<const State> states,
                   std::span<const WeightVector> ws) const override;

    enum Slot { kW1 = 0, kB1, kW2, kB2, kW3, kB3, kLogZ };

   private:
    explicit MlpPolicy(MlpShape shape);
    MlpShape shape_;
};

/// One row of free parameters per (reachable state, weight key) of a single small environment.
class TabularPolicy final : public Policy {
   public:
    /// `weights` lists the preference vectors the table covers; lookups round each component to
    /// a grid of 1/quantization.
    TabularPolicy(const CodonDesignEnv& env, std::vector<WeightVector> weights, int quantization = 1000);

    std::string kind() const override { return "tabular"; }
    std::unique_ptr<Policy> clone() const override { return std::make_unique<TabularPolicy>(*this); }

    std::size_t state_count() const { return state_index_.size(); }
    int row_of(const State& s, const WeightVector& w) const;

    /// Exact proportional policy for the given terminal rewards (one per design, keyed by the
    /// design string, all under `w`): logits log F(child), flows log F(s), log Z = log sum R.
    void set_proportional(const std::map<std::string, double>& rewards, const WeightVector& w);

    Matrix evaluate(const Protein& p, std::span<const State> states,
                    std::span<const WeightVector> ws) const override;
    ad::Var record(ad::Tape& tape, const Protein& p, std::span<const State> states,
                   std::span<const WeightVector> ws) const override;

    enum Slot { kTable = 0, kLogZ };

   private:
    std::vector<int> rows_for(const Protein& p, std::span<const State> states,
                              std::span<const WeightVector> ws) const;
    std::string weight_key(const WeightVector& w) const;

    Protein protein_;
    int quantization_;
    std::map<std::vector<int>, int> state_index_;
    std::map<std::string, int> weight_index_;
    std::vector<State> states_;
};

/// Draws an allowed action: uniform over the mask with probability epsilon, otherwise from
/// exp(log_probs). Never returns a masked action.
Action sample_action(std::span<const double> log_probs, const ActionMask& mask, double epsilon, Rng& rng);

}  // namespace codonflow
