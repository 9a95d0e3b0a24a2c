#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "codonflow/environment.hpp"

namespace codonflow::ad {

using Matrix = Eigen::MatrixXd;

/// Log-probability assigned to masked actions. exp() of it is exactly 0.
inline constexpr double kMaskedLogProb = -1e9;

class Tape;

/// Handle to a node on a Tape.
class Var {
   public:
    Var() = default;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    int id() const { return id_; }
    Tape* tape() const { return tape_; }
    const Matrix& value() const;
    /// Value of a 1x1 node.
    double scalar() const;

   private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

/// How sub-trajectories are weighted in the sub-trajectory balance op.
enum class SubtbWeighting {
    /// Every (i, j) pair weighted by lambda^(j - i), normalized by the total weight.
    Lambda,
    /// Only the full trajectory (0, n); the value equals trajectory balance.
    FullOnly,
};

/// Records a computation on dense matrices and replays it backwards once.
///
/// Nodes are appended in evaluation order, so reverse creation order is a valid topological
/// order for the backward sweep. Leaves created with `parameter` route their gradient into the
/// caller's gradient buffer at the given slot.
class Tape {
   public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var parameter(int slot, const Matrix& value);
    Var constant(Matrix value);
    Var scalar(double value);

    Var matmul(Var a, Var b);
    /// a (n x m) plus a broadcast 1 x m row.
    Var add_row(Var a, Var row);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scale(Var a, double factor);
    Var tanh(Var a);
    Var square(Var a);
    /// Sum of all entries, as 1x1.
    Var sum(Var a);
    /// Rows of `table` in the given order.
    Var gather_rows(Var table, std::vector<int> rows);
    /// Rows [start, start + count) of a.
    Var slice_rows(Var a, int start, int count);
    /// Single column c of a, as n x 1.
    Var column(Var a, int c);
    /// Column vectors stacked vertically.
    Var concat_rows(const std::vector<Var>& parts);
    /// Entries a(r, c) as a k x 1 column.
    Var pick(Var a, std::vector<std::pair<int, int>> entries);
    /// Row-wise log-softmax over the first kNumActions columns restricted to each row's mask.
    /// Masked entries hold kMaskedLogProb and receive no gradient.
    Var masked_log_softmax(Var logits, std::vector<ActionMask> masks);
    /// Sub-trajectory balance over one trajectory: log_flow is (n+1) x 1 with the boundary
    /// flows in place, log_pf is n x 1.
    Var subtb(Var log_flow, Var log_pf, double lambda, SubtbWeighting weighting);

    /// Reverse sweep from a 1x1 node. Parameter gradients are added into grads[slot], which
    /// must already have the parameter's shape. A tape can be swept only once.
    void backward(Var loss, std::vector<Matrix>& grads);

    bool consumed() const { return consumed_; }
    std::size_t size() const { return nodes_.size(); }
    const Matrix& value(int id) const { return nodes_[id].value; }

   private:
    struct Node {
        Matrix value;
        Matrix grad;
        int slot = -1;
        std::function<void(Tape&, int)> backward;
    };

    Var push(Matrix value, std::function<void(Tape&, int)> backward = {});
    Matrix& grad_of(int id);
    void check(Var v) const;

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

/// Row-wise masked log-softmax without recording.
Matrix masked_log_softmax(const Matrix& logits, std::span<const ActionMask> masks);

/// Value of the sub-trajectory balance op without recording.
double subtb_value(std::span<const double> log_flow, std::span<const double> log_pf, double lambda,
                   SubtbWeighting weighting);

}  // namespace codonflow::ad
