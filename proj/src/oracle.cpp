#include "codonflow/oracle.hpp"

#include <cmath>
#include <numeric>

#include "codonflow/errors.hpp"

namespace codonflow {

void for_each_design(const Protein& p, const std::function<void(const MrnaSequence&)>& visit) {
    const std::size_t n = p.length();
    std::vector<std::span<const Codon>> choices(n);
    for (std::size_t i = 0; i < n; ++i) choices[i] = synonymous_codons(p[i]);
    std::vector<std::size_t> digit(n, 0);
    std::vector<Codon> codons(n);
    for (std::size_t i = 0; i < n; ++i) codons[i] = choices[i][0];
    while (true) {
        visit(MrnaSequence(codons));
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++digit[pos] < choices[pos].size()) {
                codons[pos] = choices[pos][digit[pos]];
                break;
            }
            digit[pos] = 0;
            codons[pos] = choices[pos][0];
            if (pos == 0) return;
        }
    }
}

void check_enumerable(const Protein& p, std::uint64_t cap) {
    const BigInt size = design_space_size(p);
    if (size > cap)
        throw CapExceededError("design space has " + size.str() + " designs, above the enumeration cap of " +
                                   std::to_string(cap),
                               size.str());
}

DesignSpace enumerate(const Protein& p, const ObjectiveSettings& settings, std::uint64_t cap, unsigned threads) {
    check_enumerable(p, cap);
    DesignSpace space{p, {}, {}};
    space.designs.reserve(static_cast<std::size_t>(design_space_size(p)));
    for_each_design(p, [&](const MrnaSequence& x) { space.designs.push_back(x); });
    space.objectives = evaluate_batch(space.designs, settings, threads);
    return space;
}

std::vector<Sample> DesignSpace::samples(const WeightVector& w, double reward_floor) const {
    std::vector<Sample> out;
    out.reserve(designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i)
        out.push_back(Sample{designs[i], objectives[i], scalarize(objectives[i].phi, w, reward_floor)});
    return out;
}

std::vector<double> rewards(const DesignSpace& space, const WeightVector& w, double reward_floor) {
    std::vector<double> r(space.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = scalarize(space.objectives[i].phi, w, reward_floor);
    return r;
}

double partition_function(const DesignSpace& space, const WeightVector& w, double reward_floor) {
    auto r = rewards(space, w, reward_floor);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

std::vector<double> exact_distribution(std::span<const double> rewards) {
    double z = 0.0;
    for (double r : rewards) {
        if (!(r > 0.0)) throw InvariantError("rewards must be positive");
        z += r;
    }
    std::vector<double> p(rewards.begin(), rewards.end());
    for (double& v : p) v /= z;
    return p;
}

std::vector<double> exact_distribution(const DesignSpace& space, const WeightVector& w, double reward_floor) {
    return exact_distribution(rewards(space, w, reward_floor));
}

namespace {

template <typename A, typename B>
void require_same_support(const std::map<std::string, A>& a, const std::map<std::string, B>& b, bool allow_missing) {
    std::vector<std::string> extra, missing;
    for (const auto& [k, v] : a)
        if (!b.count(k)) extra.push_back(k);
    if (!allow_missing)
        for (const auto& [k, v] : b)
            if (!a.count(k)) missing.push_back(k);
    if (extra.empty() && missing.empty()) return;
    std::string msg = "support mismatch:";
    for (const auto& e : extra) msg += " extra " + e;
    for (const auto& m : missing) msg += " missing " + m;
    throw SupportMismatchError(msg, std::move(extra), std::move(missing));
}

}  // namespace

double tv_distance(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
    require_same_support(p, q, false);
    double total = 0.0;
    for (const auto& [k, v] : p) total += std::abs(v - q.at(k));
    return 0.5 * total;
}

double tv_distance(const std::map<std::string, std::size_t>& counts, const std::map<std::string, double>& exact) {
    require_same_support(counts, exact, true);
    std::size_t n = 0;
    for (const auto& [k, c] : counts) n += c;
    if (n == 0) throw InputError("no samples to compare");
    double total = 0.0;
    for (const auto& [k, p] : exact) {
        auto it = counts.find(k);
        const double phat = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
        total += std::abs(phat - p);
    }
    return 0.5 * total;
}

std::vector<std::size_t> brute_force_front(std::span<const std::array<double, 3>> points) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
            if (i == j) continue;
            bool ge = true, gt = false;
            for (int k = 0; k < 3; ++k) {
                ge &= points[j][k] >= points[i][k];
                gt |= points[j][k] > points[i][k];
            }
            dominated = ge && gt;
        }
        if (!dominated) front.push_back(i);
    }
    return front;
}

std::vector<std::string> exact_pareto_front(const DesignSpace& space) {
    std::vector<std::array<double, 3>> phis;
    phis.reserve(space.size());
    for (const auto& o : space.objectives) phis.push_back(o.phi);
    std::vector<std::string> out;
    for (auto i : brute_force_front(phis)) out.push_back(space.designs[i].str());
    return out;
}

}  // namespace codonflow
