#include "codonflow/autodiff.hpp"

#include <cmath>
#include <limits>

#include "codonflow/errors.hpp"

namespace codonflow::ad {

const Matrix& Var::value() const {
    if (!tape_) throw UsageError("unbound variable");
    return tape_->value(id_);
}

double Var::scalar() const {
    const auto& v = value();
    if (v.rows() != 1 || v.cols() != 1) throw UsageError("scalar() on a non-scalar node");
    return v(0, 0);
}

Var Tape::push(Matrix value, std::function<void(Tape&, int)> backward) {
    if (consumed_) throw UsageError("tape already consumed by backward()");
    nodes_.push_back(Node{std::move(value), Matrix(), -1, std::move(backward)});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix& Tape::grad_of(int id) {
    auto& node = nodes_[id];
    if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    return node.grad;
}

void Tape::check(Var v) const {
    if (v.tape() != this || v.id() < 0 || v.id() >= static_cast<int>(nodes_.size()))
        throw UsageError("variable belongs to a different tape");
}

Var Tape::parameter(int slot, const Matrix& value) {
    auto v = push(value);
    nodes_[v.id()].slot = slot;
    return v;
}

Var Tape::constant(Matrix value) { return push(std::move(value)); }

Var Tape::scalar(double value) { return push(Matrix::Constant(1, 1, value)); }

Var Tape::matmul(Var a, Var b) {
    check(a);
    check(b);
    const int ia = a.id(), ib = b.id();
    if (a.value().cols() != b.value().rows()) throw UsageError("matmul shape mismatch");
    return push(a.value() * b.value(), [ia, ib](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_of(ia).noalias() += g * t.nodes_[ib].value.transpose();
        t.grad_of(ib).noalias() += t.nodes_[ia].value.transpose() * g;
    });
}

Var Tape::add_row(Var a, Var row) {
    check(a);
    check(row);
    const int ia = a.id(), ir = row.id();
    if (row.value().rows() != 1 || row.value().cols() != a.value().cols())
        throw UsageError("add_row shape mismatch");
    Matrix out = a.value().rowwise() + row.value().row(0);
    return push(std::move(out), [ia, ir](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_of(ia) += g;
        t.grad_of(ir) += g.colwise().sum();
    });
}

Var Tape::add(Var a, Var b) {
    check(a);
    check(b);
    const int ia = a.id(), ib = b.id();
    if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
        throw UsageError("add shape mismatch");
    return push(a.value() + b.value(), [ia, ib](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_of(ia) += g;
        t.grad_of(ib) += g;
    });
}

Var Tape::sub(Var a, Var b) {
    check(a);
    check(b);
    const int ia = a.id(), ib = b.id();
    if (a.value().rows() != b.value().rows() || a.value().cols() != b.value().cols())
        throw UsageError("sub shape mismatch");
    return push(a.value() - b.value(), [ia, ib](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        t.grad_of(ia) += g;
        t.grad_of(ib) -= g;
    });
}

Var Tape::scale(Var a, double factor) {
    check(a);
    const int ia = a.id();
    return push(a.value() * factor, [ia, factor](Tape& t, int self) {
        t.grad_of(ia) += t.nodes_[self].grad * factor;
    });
}

Var Tape::tanh(Var a) {
    check(a);
    const int ia = a.id();
    return push(a.value().array().tanh().matrix(), [ia](Tape& t, int self) {
        const Matrix& y = t.nodes_[self].value;
        t.grad_of(ia).array() += t.nodes_[self].grad.array() * (1.0 - y.array().square());
    });
}

Var Tape::square(Var a) {
    check(a);
    const int ia = a.id();
    return push(a.value().array().square().matrix(), [ia](Tape& t, int self) {
        t.grad_of(ia).array() += 2.0 * t.nodes_[self].grad.array() * t.nodes_[ia].value.array();
    });
}

Var Tape::sum(Var a) {
    check(a);
    const int ia = a.id();
    return push(Matrix::Constant(1, 1, a.value().sum()), [ia](Tape& t, int self) {
        t.grad_of(ia).array() += t.nodes_[self].grad(0, 0);
    });
}

Var Tape::gather_rows(Var table, std::vector<int> rows) {
    check(table);
    const int it = table.id();
    const Matrix& src = table.value();
    Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0 || rows[r] >= src.rows()) throw UsageError("gather_rows index out of range");
        out.row(static_cast<Eigen::Index>(r)) = src.row(rows[r]);
    }
    return push(std::move(out), [it, rows = std::move(rows)](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        Matrix& dst = t.grad_of(it);
        for (std::size_t r = 0; r < rows.size(); ++r) dst.row(rows[r]) += g.row(static_cast<Eigen::Index>(r));
    });
}

Var Tape::slice_rows(Var a, int start, int count) {
    check(a);
    const int ia = a.id();
    if (start < 0 || count < 0 || start + count > a.value().rows())
        throw UsageError("slice_rows out of range");
    return push(a.value().middleRows(start, count), [ia, start, count](Tape& t, int self) {
        t.grad_of(ia).middleRows(start, count) += t.nodes_[self].grad;
    });
}

Var Tape::column(Var a, int c) {
    check(a);
    const int ia = a.id();
    if (c < 0 || c >= a.value().cols()) throw UsageError("column out of range");
    return push(a.value().col(c), [ia, c](Tape& t, int self) {
        t.grad_of(ia).col(c) += t.nodes_[self].grad;
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    Eigen::Index rows = 0;
    std::vector<int> ids;
    std::vector<Eigen::Index> offsets;
    for (auto p : parts) {
        check(p);
        if (p.value().cols() != 1) throw UsageError("concat_rows expects column vectors");
        offsets.push_back(rows);
        ids.push_back(p.id());
        rows += p.value().rows();
    }
    Matrix out(rows, 1);
    for (std::size_t k = 0; k < parts.size(); ++k)
        out.middleRows(offsets[k], parts[k].value().rows()) = parts[k].value();
    return push(std::move(out), [ids = std::move(ids), offsets = std::move(offsets)](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            Matrix& dst = t.grad_of(ids[k]);
            dst += g.middleRows(offsets[k], dst.rows());
        }
    });
}

Var Tape::pick(Var a, std::vector<std::pair<int, int>> entries) {
    check(a);
    const int ia = a.id();
    const Matrix& src = a.value();
    Matrix out(static_cast<Eigen::Index>(entries.size()), 1);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        auto [r, c] = entries[k];
        if (r < 0 || r >= src.rows() || c < 0 || c >= src.cols()) throw UsageError("pick out of range");
        out(static_cast<Eigen::Index>(k), 0) = src(r, c);
    }
    return push(std::move(out), [ia, entries = std::move(entries)](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        Matrix& dst = t.grad_of(ia);
        for (std::size_t k = 0; k < entries.size(); ++k)
            dst(entries[k].first, entries[k].second) += g(static_cast<Eigen::Index>(k), 0);
    });
}

Matrix masked_log_softmax(const Matrix& logits, std::span<const ActionMask> masks) {
    if (logits.cols() < kNumActions) throw UsageError("logits need at least 65 columns");
    if (static_cast<std::size_t>(logits.rows()) != masks.size()) throw UsageError("one mask per row required");
    Matrix out = Matrix::Constant(logits.rows(), kNumActions, kMaskedLogProb);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const auto& mask = masks[static_cast<std::size_t>(r)];
        if (mask.none()) throw InvariantError("mask allows no action");
        double top = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < kNumActions; ++a)
            if (mask.test(a)) top = std::max(top, logits(r, a));
        double total = 0.0;
        for (int a = 0; a < kNumActions; ++a)
            if (mask.test(a)) total += std::exp(logits(r, a) - top);
        const double lse = top + std::log(total);
        for (int a = 0; a < kNumActions; ++a)
            if (mask.test(a)) out(r, a) = logits(r, a) - lse;
    }
    return out;
}

Var Tape::masked_log_softmax(Var logits, std::vector<ActionMask> masks) {
    check(logits);
    const int il = logits.id();
    Matrix out = ad::masked_log_softmax(logits.value(), masks);
    return push(std::move(out), [il, masks = std::move(masks)](Tape& t, int self) {
        const Matrix& y = t.nodes_[self].value;
        const Matrix& g = t.nodes_[self].grad;
        Matrix& dst = t.grad_of(il);
        for (Eigen::Index r = 0; r < y.rows(); ++r) {
            const auto& mask = masks[static_cast<std::size_t>(r)];
            double gsum = 0.0;
            for (int a = 0; a < kNumActions; ++a)
                if (mask.test(a)) gsum += g(r, a);
            for (int a = 0; a < kNumActions; ++a)
                if (mask.test(a)) dst(r, a) += g(r, a) - std::exp(y(r, a)) * gsum;
        }
    });
}

namespace {

template <typename Visit>
double for_each_subtrajectory(int n, double lambda, SubtbWeighting weighting, Visit&& visit) {
    double total = 0.0;
    if (weighting == SubtbWeighting::FullOnly) {
        visit(0, n, 1.0);
        return 1.0;
    }
    for (int i = 0; i < n; ++i) {
        double w = 1.0;
        for (int j = i + 1; j <= n; ++j) {
            w *= lambda;
            visit(i, j, w);
            total += w;
        }
    }
    return total;
}

// prefix[k] = sum of log_pf[0..k)
std::vector<double> prefix_sums(const double* log_pf, int n) {
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + log_pf[k];
    return prefix;
}

void check_subtb_args(std::size_t flows, std::size_t steps, double lambda) {
    if (flows != steps + 1) throw UsageError("subtb needs n+1 flows for n steps");
    if (steps == 0) throw UsageError("subtb needs at least one step");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("subtb lambda must lie in (0, 1]");
}

}  // namespace

double subtb_value(std::span<const double> log_flow, std::span<const double> log_pf, double lambda,
                   SubtbWeighting weighting) {
    check_subtb_args(log_flow.size(), log_pf.size(), lambda);
    const int n = static_cast<int>(log_pf.size());
    auto prefix = prefix_sums(log_pf.data(), n);
    double acc = 0.0;
    double total = for_each_subtrajectory(n, lambda, weighting, [&](int i, int j, double w) {
        double r = log_flow[i] + prefix[j] - prefix[i] - log_flow[j];
        acc += w * r * r;
    });
    return acc / total;
}

Var Tape::subtb(Var log_flow, Var log_pf, double lambda, SubtbWeighting weighting) {
    check(log_flow);
    check(log_pf);
    const Matrix& f = log_flow.value();
    const Matrix& pf = log_pf.value();
    if (f.cols() != 1 || pf.cols() != 1) throw UsageError("subtb expects column vectors");
    check_subtb_args(static_cast<std::size_t>(f.rows()), static_cast<std::size_t>(pf.rows()), lambda);
    double value = subtb_value(std::span<const double>(f.data(), static_cast<std::size_t>(f.rows())),
                               std::span<const double>(pf.data(), static_cast<std::size_t>(pf.rows())),
                               lambda, weighting);
    const int iflow = log_flow.id(), ipf = log_pf.id();
    return push(Matrix::Constant(1, 1, value), [iflow, ipf, lambda, weighting](Tape& t, int self) {
        const double g = t.nodes_[self].grad(0, 0);
        const Matrix& f = t.nodes_[iflow].value;
        const Matrix& pf = t.nodes_[ipf].value;
        const int n = static_cast<int>(pf.rows());
        auto prefix = prefix_sums(pf.data(), n);
        Matrix df = Matrix::Zero(n + 1, 1);
        std::vector<double> range_add(static_cast<std::size_t>(n) + 1, 0.0);
        double total = for_each_subtrajectory(n, lambda, weighting, [&](int i, int j, double w) {
            double r = f(i, 0) + prefix[j] - prefix[i] - f(j, 0);
            double c = 2.0 * w * r;
            df(i, 0) += c;
            df(j, 0) -= c;
            range_add[i] += c;
            range_add[j] -= c;
        });
        const double k = g / total;
        t.grad_of(iflow) += df * k;
        Matrix& dpf = t.grad_of(ipf);
        double running = 0.0;
        for (int s = 0; s < n; ++s) {
            running += range_add[s];
            dpf(s, 0) += running * k;
        }
    });
}

void Tape::backward(Var loss, std::vector<Matrix>& grads) {
    check(loss);
    if (consumed_) throw UsageError("tape already consumed by backward()");
    if (loss.value().size() != 1) throw UsageError("backward() needs a scalar loss");
    consumed_ = true;
    grad_of(loss.id())(0, 0) = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
        auto& node = nodes_[id];
        if (node.grad.size() == 0) continue;
        if (node.backward) node.backward(*this, id);
        if (node.slot >= 0) {
            if (node.slot >= static_cast<int>(grads.size()) || grads[node.slot].rows() != node.grad.rows() ||
                grads[node.slot].cols() != node.grad.cols())
                throw UsageError("gradient buffer shape mismatch for parameter slot " +
                                 std::to_string(node.slot));
            grads[node.slot] += node.grad;
        }
    }
}

}  // namespace codonflow::ad
