#include "codonflow/policy.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "codonflow/errors.hpp"

namespace codonflow {

EncodedState encode(const State& s, const Protein& p, const WeightVector& w, std::size_t max_length) {
    EncodedState e = EncodedState::Zero(features::kWidth);
    const std::size_t t = s.fill_count();
    const std::size_t length = p.length();
    e(features::kNextAa + (t < length ? aa_index(p[t]) : features::kDoneSlot)) = 1.0;
    const int prev = s.last_codon();
    e(features::kPrevCodon + (prev < 0 ? features::kNoPrevSlot : prev)) = 1.0;
    e(features::kPosition) = static_cast<double>(t) / static_cast<double>(length);
    e(features::kLengthScale) =
        std::min(1.0, static_cast<double>(length) / static_cast<double>(std::max<std::size_t>(1, max_length)));
    for (int k = 0; k < kNumObjectives; ++k) e(features::kWeights + k) = w[k];
    return e;
}

Matrix encode_batch(std::span<const State> states, const Protein& p, std::span<const WeightVector> ws,
                    std::size_t max_length) {
    if (ws.size() != states.size() && ws.size() != 1)
        throw UsageError("need one weight vector per state or a single shared one");
    Matrix x(static_cast<Eigen::Index>(states.size()), features::kWidth);
    for (std::size_t i = 0; i < states.size(); ++i)
        x.row(static_cast<Eigen::Index>(i)) = encode(states[i], p, ws.size() == 1 ? ws[0] : ws[i], max_length);
    return x;
}

std::vector<Matrix> ParameterSet::zeros_like() const {
    std::vector<Matrix> out;
    out.reserve(tensors.size());
    for (const auto& t : tensors) out.push_back(Matrix::Zero(t.rows(), t.cols()));
    return out;
}

bool ParameterSet::all_finite() const {
    for (const auto& t : tensors)
        if (!t.allFinite()) return false;
    return true;
}

std::size_t ParameterSet::count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
    return n;
}

// --- MLP -------------------------------------------------------------------

MlpPolicy::MlpPolicy(MlpShape shape) : shape_(shape) {
    if (shape.hidden < 1) throw ConfigError("hidden width must be positive");
    const int h = shape.hidden;
    params_.tensors = {Matrix::Zero(features::kWidth, h), Matrix::Zero(1, h),
                       Matrix::Zero(h, h),                Matrix::Zero(1, h),
                       Matrix::Zero(h, kOutputWidth),     Matrix::Zero(1, kOutputWidth),
                       Matrix::Zero(1, 1)};
    params_.names = {"w1", "b1", "w2", "b2", "w3", "b3", "log_z"};
    params_.log_z_slot = kLogZ;
}

MlpPolicy MlpPolicy::zeros(MlpShape shape) { return MlpPolicy(shape); }

MlpPolicy::MlpPolicy(MlpShape shape, std::uint64_t seed) : MlpPolicy(shape) {
    Rng rng = derive_rng(seed, {0x6d6c70});
    for (int slot : {kW1, kW2, kW3}) {
        Matrix& w = params_.tensors[slot];
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
    }
}

PolicyOutput MlpPolicy::forward(const EncodedState& e) const {
    Matrix out = forward_batch(e);
    PolicyOutput o;
    for (int a = 0; a < kNumActions; ++a) o.logits[a] = out(0, a);
    o.log_flow = out(0, kLogFlowColumn);
    return o;
}

Matrix MlpPolicy::forward_batch(const Matrix& x) const {
    if (!params_.all_finite()) throw NumericError("policy parameters contain non-finite values");
    if (x.cols() != features::kWidth) throw UsageError("encoded state width mismatch");
    const auto& t = params_.tensors;
    Matrix h1 = ((x * t[kW1]).rowwise() + t[kB1].row(0)).array().tanh().matrix();
    Matrix h2 = ((h1 * t[kW2]).rowwise() + t[kB2].row(0)).array().tanh().matrix();
    Matrix out = (h2 * t[kW3]).rowwise() + t[kB3].row(0);
    return out;
}

Matrix MlpPolicy::evaluate(const Protein& p, std::span<const State> states,
                           std::span<const WeightVector> ws) const {
    return forward_batch(encode_batch(states, p, ws, shape_.max_length));
}

ad::Var MlpPolicy::record(ad::Tape& tape, const Protein& p, std::span<const State> states,
                          std::span<const WeightVector> ws) const {
    if (!params_.all_finite()) throw NumericError("policy parameters contain non-finite values");
    const auto& t = params_.tensors;
    auto x = tape.constant(encode_batch(states, p, ws, shape_.max_length));
    auto h1 = tape.tanh(tape.add_row(tape.matmul(x, tape.parameter(kW1, t[kW1])), tape.parameter(kB1, t[kB1])));
    auto h2 = tape.tanh(tape.add_row(tape.matmul(h1, tape.parameter(kW2, t[kW2])), tape.parameter(kB2, t[kB2])));
    return tape.add_row(tape.matmul(h2, tape.parameter(kW3, t[kW3])), tape.parameter(kB3, t[kB3]));
}

// --- Tabular ---------------------------------------------------------------

TabularPolicy::TabularPolicy(const CodonDesignEnv& env, std::vector<WeightVector> weights, int quantization)
    : protein_(env.protein()), quantization_(quantization) {
    if (weights.empty()) throw ConfigError("tabular policy needs at least one weight vector");
    if (quantization < 1) throw ConfigError("quantization must be positive");
    std::function<void(const State&)> visit = [&](const State& s) {
        state_index_.emplace(s.slots(), static_cast<int>(states_.size()));
        states_.push_back(s);
        if (s.is_complete()) return;
        for (Codon c : synonymous_codons(protein_[s.fill_count()])) visit(s.with_codon(c));
    };
    visit(env.initial_state());
    for (const auto& w : weights) {
        auto key = weight_key(w);
        if (!weight_index_.count(key)) weight_index_.emplace(key, static_cast<int>(weight_index_.size()));
    }
    const auto rows = static_cast<Eigen::Index>(states_.size() * weight_index_.size());
    params_.tensors = {Matrix::Zero(rows, kOutputWidth), Matrix::Zero(1, 1)};
    params_.names = {"table", "log_z"};
    params_.log_z_slot = kLogZ;
}

std::string TabularPolicy::weight_key(const WeightVector& w) const {
    std::ostringstream key;
    for (int k = 0; k < kNumObjectives; ++k) key << std::lround(w[k] * quantization_) << ',';
    return key.str();
}

int TabularPolicy::row_of(const State& s, const WeightVector& w) const {
    auto si = state_index_.find(s.slots());
    if (si == state_index_.end() || s.length() != protein_.length())
        throw InvariantError("state is not covered by the tabular policy");
    auto wi = weight_index_.find(weight_key(w));
    if (wi == weight_index_.end()) throw InvariantError("weight vector is not covered by the tabular policy");
    return wi->second * static_cast<int>(states_.size()) + si->second;
}

std::vector<int> TabularPolicy::rows_for(const Protein& p, std::span<const State> states,
                                         std::span<const WeightVector> ws) const {
    if (!(p == protein_)) throw InvariantError("tabular policy queried for a different protein");
    if (ws.size() != states.size() && ws.size() != 1)
        throw UsageError("need one weight vector per state or a single shared one");
    std::vector<int> rows;
    rows.reserve(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) rows.push_back(row_of(states[i], ws.size() == 1 ? ws[0] : ws[i]));
    return rows;
}

Matrix TabularPolicy::evaluate(const Protein& p, std::span<const State> states,
                               std::span<const WeightVector> ws) const {
    auto rows = rows_for(p, states, ws);
    const Matrix& table = params_.tensors[kTable];
    Matrix out(static_cast<Eigen::Index>(rows.size()), kOutputWidth);
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = table.row(rows[r]);
    return out;
}

ad::Var TabularPolicy::record(ad::Tape& tape, const Protein& p, std::span<const State> states,
                              std::span<const WeightVector> ws) const {
    auto rows = rows_for(p, states, ws);
    return tape.gather_rows(tape.parameter(kTable, params_.tensors[kTable]), std::move(rows));
}

void TabularPolicy::set_proportional(const std::map<std::string, double>& rewards, const WeightVector& w) {
    std::map<std::vector<int>, double> flow;
    std::function<double(const State&)> total = [&](const State& s) -> double {
        double f = 0.0;
        if (s.is_complete()) {
            auto it = rewards.find(s.design().str());
            if (it == rewards.end() || !(it->second > 0.0))
                throw InvariantError("missing or non-positive reward for " + s.design().str());
            f = it->second;
        } else {
            for (Codon c : synonymous_codons(protein_[s.fill_count()])) f += total(s.with_codon(c));
        }
        flow[s.slots()] = f;
        return f;
    };
    const State source(protein_.length());
    const double z = total(source);
    Matrix& table = params_.tensors[kTable];
    for (const auto& s : states_) {
        const int row = row_of(s, w);
        table.row(row).setZero();
        if (!s.is_complete())
            for (Codon c : synonymous_codons(protein_[s.fill_count()]))
                table(row, c.index()) = std::log(flow.at(s.with_codon(c).slots()));
        table(row, kLogFlowColumn) = s.fill_count() == 0 ? 0.0 : std::log(flow.at(s.slots()));
    }
    params_.tensors[kLogZ](0, 0) = std::log(z);
}

// --- sampling ----------------------------------------------------------------

Action sample_action(std::span<const double> log_probs, const ActionMask& mask, double epsilon, Rng& rng) {
    if (mask.none()) throw InvariantError("mask allows no action");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    if (log_probs.size() < static_cast<std::size_t>(kNumActions)) throw UsageError("need 65 log-probabilities");
    const double u = uniform01(rng);
    if (epsilon > 0.0 && u < epsilon) {
        auto pick = std::uniform_int_distribution<std::size_t>(0, mask.count() - 1)(rng);
        for (int a = 0; a < kNumActions; ++a)
            if (mask.test(a) && pick-- == 0) return Action(a);
    }
    const double v = uniform01(rng);
    double acc = 0.0;
    int last = -1;
    for (int a = 0; a < kNumActions; ++a) {
        if (!mask.test(a)) continue;
        last = a;
        acc += std::exp(log_probs[a]);
        if (v < acc) return Action(a);
    }
    return Action(last);
}

}  // namespace codonflow
