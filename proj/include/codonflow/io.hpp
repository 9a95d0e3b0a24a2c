#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codonflow/curriculum.hpp"
#include "codonflow/genetic_code.hpp"
#include "codonflow/metrics.hpp"
#include "codonflow/oracle.hpp"
#include "codonflow/training.hpp"

namespace codonflow {

enum class InputFormat { Fasta, Csv };
InputFormat parse_input_format(const std::string& text);

struct NamedProtein {
    std::string name;
    Protein protein;
};

/// Parsed protein file plus a length index used for task binning.
class ProteinPool {
   public:
    ProteinPool() = default;
    explicit ProteinPool(std::vector<NamedProtein> entries) : entries_(std::move(entries)) {}

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<NamedProtein>& entries() const { return entries_; }
    std::vector<Protein> proteins() const;
    /// Proteins whose length lies in [lo, hi].
    std::vector<Protein> with_length(std::size_t lo, std::size_t hi) const;

   private:
    std::vector<NamedProtein> entries_;
};

/// FASTA: '>' header lines followed by sequence lines. CSV: a header row with a "protein"
/// column, optionally "name" and a nucleotide column ("dna", "mrna", or "cds") that is
/// translated and cross-checked against the protein. Errors name the line.
ProteinPool parse_fasta(std::istream& in);
ProteinPool parse_protein_csv(std::istream& in);
ProteinPool load_proteins(const std::string& path, InputFormat format);

/// Nucleotide records for scoring: FASTA records or a CSV with a "sequence" column.
std::vector<std::pair<std::string, MrnaSequence>> load_designs(const std::string& path, InputFormat format);

/// Splits one CSV line, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Fixed-precision number formatting used by every CSV writer.
std::string format_number(double v);

void write_enumeration_csv(std::ostream& out, const DesignSpace& space, const WeightVector& w,
                           double reward_floor);
void write_samples_csv(std::ostream& out, std::span<const Sample> samples);
void write_loss_trace_csv(std::ostream& out, std::span<const IterationStats> stats);
void write_teacher_trace_csv(std::ostream& out, std::span<const EvaluationRound> rounds,
                             const CurriculumConfig& cfg);
/// Histogram of reward and each phi component over [0, 1].
void write_histogram_csv(std::ostream& out, std::span<const Sample> samples, int bins = 20);

}  // namespace codonflow
