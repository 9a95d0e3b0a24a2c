#include "codonflow/metrics.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "codonflow/errors.hpp"

namespace codonflow {

void SampleSet::validate() const {
    if (samples.empty()) return;
    const Protein reference = protein ? *protein : translate(samples.front().design);
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!(translate(samples[i].design) == reference))
            throw InvariantError("sample " + std::to_string(i) + " does not encode the set's protein");
}

std::vector<Sample> unique_samples(std::span<const Sample> samples) {
    std::set<std::vector<Codon>> seen;
    std::vector<Sample> out;
    for (const auto& s : samples)
        if (seen.insert(s.design.codons()).second) out.push_back(s);
    return out;
}

std::size_t uniqueness(std::span<const Sample> samples) { return unique_samples(samples).size(); }

std::vector<Sample> top_k(std::span<const Sample> samples, std::size_t k) {
    auto unique = unique_samples(samples);
    if (k > unique.size())
        throw PartialResultError("top-" + std::to_string(k) + " requested but only " +
                                     std::to_string(unique.size()) + " unique samples exist",
                                 unique.size());
    std::sort(unique.begin(), unique.end(), [](const Sample& a, const Sample& b) {
        if (a.reward != b.reward) return a.reward > b.reward;
        return a.design.str() < b.design.str();
    });
    unique.resize(k);
    return unique;
}

double topk_reward(std::span<const Sample> samples, std::size_t k) {
    if (k == 0) throw UndefinedMetricError("top-K reward needs K >= 1");
    auto top = top_k(samples, k);
    double sum = 0.0;
    for (const auto& s : top) sum += s.reward;
    return sum / static_cast<double>(k);
}

std::size_t hamming(const MrnaSequence& a, const MrnaSequence& b) {
    if (a.length() != b.length()) throw InvariantError("Hamming distance needs equal-length designs");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.length(); ++i) d += a[i] != b[i];
    return d;
}

double topk_diversity(std::span<const Sample> samples, std::size_t k) {
    if (k < 2) throw UndefinedMetricError("top-K diversity needs K >= 2");
    auto top = top_k(samples, k);
    double total = 0.0;
    for (std::size_t i = 0; i < top.size(); ++i)
        for (std::size_t j = i + 1; j < top.size(); ++j) total += static_cast<double>(hamming(top[i].design, top[j].design));
    return total / (static_cast<double>(k) * static_cast<double>(k - 1) / 2.0);
}

bool dominates(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    bool strictly = false;
    for (int i = 0; i < 3; ++i) {
        if (a[i] < b[i]) return false;
        strictly |= a[i] > b[i];
    }
    return strictly;
}

std::vector<Sample> pareto_front(std::span<const Sample> samples) {
    auto unique = unique_samples(samples);
    // After a lexicographic descending sort no sample can be dominated by a later one, so each
    // candidate only needs checking against the front built so far.
    std::stable_sort(unique.begin(), unique.end(),
                     [](const Sample& a, const Sample& b) { return a.objectives.phi > b.objectives.phi; });
    std::vector<Sample> front;
    for (auto& s : unique) {
        bool dominated = std::any_of(front.begin(), front.end(),
                                     [&](const Sample& f) { return dominates(f.objectives.phi, s.objectives.phi); });
        if (!dominated) front.push_back(std::move(s));
    }
    return front;
}

double pareto_performance(std::span<const Sample> samples) {
    const auto unique = uniqueness(samples);
    if (unique == 0) throw UndefinedMetricError("Pareto performance of an empty sample set");
    return static_cast<double>(pareto_front(samples).size()) / static_cast<double>(unique);
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["uniqueness"] = uniqueness;
    j["topk_reward"] = topk_reward;
    j["topk_diversity"] = topk_diversity;
    j["pareto_performance"] = pareto_performance;
    j["front_size"] = front_size;
    j["K"] = k;
    return j.dump(2);
}

MetricsReport compute_metrics(std::span<const Sample> samples, std::size_t k) {
    MetricsReport r;
    r.uniqueness = uniqueness(samples);
    if (r.uniqueness == 0) throw UndefinedMetricError("metrics of an empty sample set");
    r.k = std::min(k, r.uniqueness);
    r.topk_reward = topk_reward(samples, r.k);
    r.topk_diversity = r.k >= 2 ? topk_diversity(samples, r.k) : 0.0;
    r.front_size = pareto_front(samples).size();
    r.pareto_performance = static_cast<double>(r.front_size) / static_cast<double>(r.uniqueness);
    return r;
}

}  // namespace codonflow
