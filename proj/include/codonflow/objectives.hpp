#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codonflow/genetic_code.hpp"

namespace codonflow {

/// Objective order used by every phi and weight vector.
enum class Objective : int { Gc = 0, Mfe = 1, Cai = 2 };
inline constexpr int kNumObjectives = 3;

/// Preference weights on the probability simplex. Normalized on construction.
class WeightVector {
   public:
    WeightVector() : w_{1.0 / 3, 1.0 / 3, 1.0 / 3} {}
    WeightVector(double gc, double mfe, double cai);
    explicit WeightVector(const std::array<double, 3>& w) : WeightVector(w[0], w[1], w[2]) {}

    double operator[](int i) const { return w_[i]; }
    const std::array<double, 3>& values() const { return w_; }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;

   private:
    std::array<double, 3> w_;
};

/// Per-codon usage frequencies and the derived relative adaptiveness weights.
class CodonUsageTable {
   public:
    CodonUsageTable() = default;
    /// Reads "CODON frequency" records; '#' begins a comment.
    static CodonUsageTable parse(std::istream& in);
    static CodonUsageTable from_file(const std::string& path);
    /// Bundled human usage table.
    static const CodonUsageTable& human();

    void set_frequency(Codon c, double frequency);
    std::optional<double> frequency(Codon c) const { return freq_[c.index()]; }
    /// freq(c) / max freq over the synonymous codons. Throws ConfigError when the codon or
    /// all of its synonyms are missing or zero.
    double weight(Codon c) const;

   private:
    std::array<std::optional<double>, kNumCodons> freq_{};
};

struct GcBand {
    double lo = 0.35;
    double hi = 0.65;
};

/// Optional thermodynamic scorer run as a shell command. The nucleotide string is fed on
/// standard input and one decimal number (kcal/mol) is read back.
struct ExternalScorer {
    std::string command;
    /// Energies are scaled against [per_nt_min * n, 0].
    double per_nt_min = -0.5;

    double score(std::string_view nucleotides) const;
};

struct ObjectiveSettings {
    CodonUsageTable usage = CodonUsageTable::human();
    GcBand gc_band{};
    int min_loop = 3;
    double reward_floor = 1e-6;
    std::optional<ExternalScorer> external;

    void validate() const;
};

struct ObjectiveVector {
    double gc_raw = 0.0;
    /// Nussinov pair count, or the external energy when an external scorer is configured.
    double mfe_raw = 0.0;
    double cai_raw = 1.0;
    std::array<double, 3> phi{};
};

double gc_content(const MrnaSequence& x);
double cai(const MrnaSequence& x, const CodonUsageTable& table);

/// Maximum number of nested AU/GC/GU pairs with at least `min_loop` unpaired bases in each
/// hairpin.
int mfe_proxy(std::span<const Base> seq, int min_loop = 3);
int mfe_proxy(const MrnaSequence& x, int min_loop = 3);
/// One optimal structure in dot-bracket notation.
std::string nussinov_structure(std::span<const Base> seq, int min_loop = 3);
bool can_pair(Base a, Base b);

double phi_gc(double gc_raw, const GcBand& band);
double phi_mfe_pairs(double pairs, std::size_t length);
double phi_mfe_energy(double energy, std::size_t nucleotides, double per_nt_min);

/// Raw objectives plus phi for one design.
ObjectiveVector evaluate_objectives(const MrnaSequence& x, const ObjectiveSettings& settings);

/// w . phi plus the floor, clamped to at most 1.
double scalarize(const std::array<double, 3>& phi, const WeightVector& w, double reward_floor);
double reward(const MrnaSequence& x, const WeightVector& w, const ObjectiveSettings& settings);

/// Scores many designs, in parallel when threads > 1. Output order matches input order.
std::vector<ObjectiveVector> evaluate_batch(std::span<const MrnaSequence> xs,
                                            const ObjectiveSettings& settings,
                                            unsigned threads = 1);

}  // namespace codonflow
