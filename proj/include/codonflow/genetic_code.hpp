#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace codonflow {

/// RNA base with a stable 0..3 encoding.
enum class Base : std::uint8_t { A = 0, U = 1, G = 2, C = 3 };

char base_letter(Base b);

inline constexpr int kNumCodons = 64;
/// Amino acids 0..19 in one-letter alphabetical order, then STOP.
inline constexpr int kNumAminoAcids = 20;

enum class AminoAcid : std::uint8_t {
    Ala, Cys, Asp, Glu, Phe, Gly, His, Ile, Lys, Leu,
    Met, Asn, Pro, Gln, Arg, Ser, Thr, Val, Trp, Tyr,
    Stop
};

inline int aa_index(AminoAcid aa) { return static_cast<int>(aa); }
char aa_letter(AminoAcid aa);
std::string_view aa_three_letter(AminoAcid aa);

/// One-letter ('L', 'm', '*') or three-letter ("Leu", "STOP") code. Throws InputError otherwise.
AminoAcid parse_amino_acid(std::string_view code);

/// A codon as its index 16*b1 + 4*b2 + b3.
class Codon {
   public:
    constexpr Codon() = default;
    explicit Codon(int index);
    Codon(Base b1, Base b2, Base b3);

    int index() const { return index_; }
    std::array<Base, 3> bases() const;
    std::string str() const;
    AminoAcid amino_acid() const;

    friend bool operator==(Codon, Codon) = default;
    friend auto operator<=>(Codon, Codon) = default;

   private:
    std::uint8_t index_ = 0;
};

/// Parses three letters over {A,U,G,C}; case-insensitive, T is read as U.
Codon codon_from_string(std::string_view text);

/// Synonymous codons of `aa` in ascending index order.
std::span<const Codon> synonymous_codons(AminoAcid aa);

/// A non-empty chain of coding residues.
class Protein {
   public:
    explicit Protein(std::vector<AminoAcid> residues);
    /// One-letter sequence, whitespace ignored, case-insensitive. A single trailing '*' is dropped.
    static Protein from_string(std::string_view letters);

    std::size_t length() const { return residues_.size(); }
    AminoAcid operator[](std::size_t i) const { return residues_[i]; }
    const std::vector<AminoAcid>& residues() const { return residues_; }
    std::string str() const;

    friend bool operator==(const Protein&, const Protein&) = default;

   private:
    std::vector<AminoAcid> residues_;
};

/// Coding sequence of sense codons.
class MrnaSequence {
   public:
    MrnaSequence() = default;
    explicit MrnaSequence(std::vector<Codon> codons) : codons_(std::move(codons)) {}
    /// Nucleotide text (length a multiple of 3; T read as U).
    static MrnaSequence from_string(std::string_view nucleotides);

    std::size_t length() const { return codons_.size(); }
    bool empty() const { return codons_.empty(); }
    Codon operator[](std::size_t i) const { return codons_[i]; }
    const std::vector<Codon>& codons() const { return codons_; }
    std::vector<Base> nucleotides() const;
    std::string str() const;

    friend bool operator==(const MrnaSequence&, const MrnaSequence&) = default;
    friend auto operator<=>(const MrnaSequence& a, const MrnaSequence& b) {
        return a.codons_ <=> b.codons_;
    }

   private:
    std::vector<Codon> codons_;
};

/// Translates a design. Throws InputError on an empty sequence or an internal STOP codon.
Protein translate(const MrnaSequence& x);

using BigInt = boost::multiprecision::cpp_int;

/// Exact product of synonymous-set sizes over the residues.
BigInt design_space_size(const Protein& p);
/// log10 of design_space_size, computed from the per-residue sizes.
double log10_design_space_size(const Protein& p);

}  // namespace codonflow
