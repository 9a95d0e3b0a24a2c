#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codonflow/genetic_code.hpp"
#include "codonflow/objectives.hpp"

namespace codonflow {

struct Sample {
    MrnaSequence design;
    ObjectiveVector objectives;
    double reward = 0.0;
};

struct SampleSet {
    std::vector<Sample> samples;
    std::optional<Protein> protein;
    WeightVector weights{};
    std::uint64_t seed = 0;

    /// Throws InvariantError unless every design translates to the same protein.
    void validate() const;
};

class UndefinedMetricError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Distinct designs, first occurrence kept, in input order.
std::vector<Sample> unique_samples(std::span<const Sample> samples);
std::size_t uniqueness(std::span<const Sample> samples);

/// Unique samples ordered by reward descending, ties by sequence text ascending, first K kept.
/// Throws PartialResultError when fewer than K unique samples exist.
std::vector<Sample> top_k(std::span<const Sample> samples, std::size_t k);
double topk_reward(std::span<const Sample> samples, std::size_t k);
/// Mean codon-level Hamming distance over all pairs of the top K. Requires K >= 2.
double topk_diversity(std::span<const Sample> samples, std::size_t k);
std::size_t hamming(const MrnaSequence& a, const MrnaSequence& b);

/// True when a is at least b in every phi component and larger in one.
bool dominates(const std::array<double, 3>& a, const std::array<double, 3>& b);
/// Non-dominated unique samples under maximization of phi. Output ordered by phi descending.
std::vector<Sample> pareto_front(std::span<const Sample> samples);
/// Front size over unique sample count.
double pareto_performance(std::span<const Sample> samples);

struct MetricsReport {
    std::size_t uniqueness = 0;
    double topk_reward = 0.0;
    double topk_diversity = 0.0;
    double pareto_performance = 0.0;
    std::size_t front_size = 0;
    /// K actually used: min(requested, unique count).
    std::size_t k = 0;

    std::string to_json() const;
};

/// All metrics at once; K is reduced to the unique count when fewer samples exist.
MetricsReport compute_metrics(std::span<const Sample> samples, std::size_t k);

}  // namespace codonflow
