#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "codonflow/genetic_code.hpp"
#include "codonflow/metrics.hpp"
#include "codonflow/objectives.hpp"

namespace codonflow {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Visits every design of p in lexicographic order (codon index ascending per position, last
/// position fastest) without materializing the space.
void for_each_design(const Protein& p, const std::function<void(const MrnaSequence&)>& visit);

/// Throws CapExceededError (carrying the exact size) when the space is larger than `cap`.
void check_enumerable(const Protein& p, std::uint64_t cap);

/// Every design of a small protein with its objectives.
struct DesignSpace {
    Protein protein;
    std::vector<MrnaSequence> designs;
    std::vector<ObjectiveVector> objectives;

    std::size_t size() const { return designs.size(); }
    std::vector<Sample> samples(const WeightVector& w, double reward_floor) const;
};

DesignSpace enumerate(const Protein& p, const ObjectiveSettings& settings,
                      std::uint64_t cap = kDefaultEnumerationCap, unsigned threads = 1);

/// R(x|w) for every design, in enumeration order.
std::vector<double> rewards(const DesignSpace& space, const WeightVector& w, double reward_floor);
/// Z(w) = sum of rewards.
double partition_function(const DesignSpace& space, const WeightVector& w, double reward_floor);
/// R(x|w) / Z(w), in enumeration order.
std::vector<double> exact_distribution(const DesignSpace& space, const WeightVector& w, double reward_floor);
/// Normalizes arbitrary positive rewards.
std::vector<double> exact_distribution(std::span<const double> rewards);

class SupportMismatchError : public std::runtime_error {
   public:
    SupportMismatchError(const std::string& what, std::vector<std::string> extra, std::vector<std::string> missing)
        : std::runtime_error(what), extra_(std::move(extra)), missing_(std::move(missing)) {}
    const std::vector<std::string>& extra() const { return extra_; }
    const std::vector<std::string>& missing() const { return missing_; }

   private:
    std::vector<std::string> extra_, missing_;
};

/// Half the L1 distance between two distributions over the same keys.
double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q);
/// Empirical counts against exact probabilities. Counts may omit zero-count designs; keys outside
/// the exact support raise SupportMismatchError.
double tv_distance(const std::map<std::string, std::size_t>& counts, const std::map<std::string, double>& exact);

/// O(n^2) pairwise dominance filter; indices of non-dominated points in input order.
std::vector<std::size_t> brute_force_front(std::span<const std::array<double, 3>> points);
/// Exact Pareto front of the whole space (design strings, enumeration order).
std::vector<std::string> exact_pareto_front(const DesignSpace& space);

}  // namespace codonflow
