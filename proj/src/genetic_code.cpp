#include "codonflow/genetic_code.hpp"

#include <cctype>
#include <cmath>

#include "codonflow/errors.hpp"

namespace codonflow {
namespace {

constexpr std::array<char, 4> kBaseLetters = {'A', 'U', 'G', 'C'};
constexpr std::string_view kAaLetters = "ACDEFGHIKLMNPQRSTVWY*";
constexpr std::array<std::string_view, 21> kAaThree = {
    "Ala", "Cys", "Asp", "Glu", "Phe", "Gly", "His", "Ile", "Lys", "Leu", "Met",
    "Asn", "Pro", "Gln", "Arg", "Ser", "Thr", "Val", "Trp", "Tyr", "STOP"};

// NCBI translation table 1, codons enumerated in TCAG order.
constexpr std::string_view kNcbiTable1 =
    "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";

int base_from_letter(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'A': return 0;
        case 'U':
        case 'T': return 1;
        case 'G': return 2;
        case 'C': return 3;
        default: return -1;
    }
}

struct CodeTables {
    std::array<AminoAcid, kNumCodons> codon_to_aa{};
    std::array<std::vector<Codon>, kNumAminoAcids + 1> synonyms;

    CodeTables() {
        constexpr std::string_view tcag = "TCAG";
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    char letter = kNcbiTable1[16 * i + 4 * j + k];
                    int index = 16 * base_from_letter(tcag[i]) + 4 * base_from_letter(tcag[j]) +
                                base_from_letter(tcag[k]);
                    auto aa = static_cast<AminoAcid>(kAaLetters.find(letter));
                    codon_to_aa[index] = aa;
                }
        for (int c = 0; c < kNumCodons; ++c) synonyms[aa_index(codon_to_aa[c])].push_back(Codon(c));
    }
};

const CodeTables& tables() {
    static const CodeTables t;
    return t;
}

}  // namespace

char base_letter(Base b) { return kBaseLetters[static_cast<int>(b)]; }

char aa_letter(AminoAcid aa) { return kAaLetters[aa_index(aa)]; }

std::string_view aa_three_letter(AminoAcid aa) { return kAaThree[aa_index(aa)]; }

AminoAcid parse_amino_acid(std::string_view code) {
    if (code.size() == 1) {
        char c = static_cast<char>(std::toupper(static_cast<unsigned char>(code[0])));
        auto pos = kAaLetters.find(c);
        if (pos != std::string_view::npos) return static_cast<AminoAcid>(pos);
    } else {
        for (std::size_t i = 0; i < kAaThree.size(); ++i) {
            const auto& name = kAaThree[i];
            if (name.size() != code.size()) continue;
            bool same = true;
            for (std::size_t k = 0; k < name.size(); ++k)
                same &= std::tolower(static_cast<unsigned char>(name[k])) ==
                        std::tolower(static_cast<unsigned char>(code[k]));
            if (same) return static_cast<AminoAcid>(i);
        }
    }
    throw InputError("unknown amino-acid code '" + std::string(code) + "'");
}

Codon::Codon(int index) {
    if (index < 0 || index >= kNumCodons)
        throw InputError("codon index out of range: " + std::to_string(index));
    index_ = static_cast<std::uint8_t>(index);
}

Codon::Codon(Base b1, Base b2, Base b3)
    : index_(static_cast<std::uint8_t>(16 * static_cast<int>(b1) + 4 * static_cast<int>(b2) +
                                       static_cast<int>(b3))) {}

std::array<Base, 3> Codon::bases() const {
    return {static_cast<Base>(index_ >> 4), static_cast<Base>((index_ >> 2) & 3),
            static_cast<Base>(index_ & 3)};
}

std::string Codon::str() const {
    auto b = bases();
    return {base_letter(b[0]), base_letter(b[1]), base_letter(b[2])};
}

AminoAcid Codon::amino_acid() const { return tables().codon_to_aa[index_]; }

Codon codon_from_string(std::string_view text) {
    if (text.size() != 3)
        throw ParseError("codon must have exactly 3 letters, got '" + std::string(text) + "'",
                         text.size() < 3 ? text.size() : 3);
    int index = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        int b = base_from_letter(text[i]);
        if (b < 0) throw ParseError("invalid nucleotide '" + std::string(1, text[i]) + "'", i);
        index = 4 * index + b;
    }
    return Codon(index);
}

std::span<const Codon> synonymous_codons(AminoAcid aa) {
    int i = aa_index(aa);
    if (i < 0 || i > kNumAminoAcids) throw InputError("unknown amino acid");
    return tables().synonyms[i];
}

Protein::Protein(std::vector<AminoAcid> residues) : residues_(std::move(residues)) {
    if (residues_.empty()) throw InputError("protein must have at least one residue");
    for (std::size_t i = 0; i < residues_.size(); ++i)
        if (residues_[i] == AminoAcid::Stop || aa_index(residues_[i]) > kNumAminoAcids)
            throw InputError("protein residue " + std::to_string(i) + " is not a coding amino acid");
}

Protein Protein::from_string(std::string_view letters) {
    std::vector<AminoAcid> residues;
    residues.reserve(letters.size());
    std::size_t pos = 0;
    for (char c : letters) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        auto idx = kAaLetters.find(up);
        if (idx == std::string_view::npos || up == '*') {
            if (up == '*' && letters.find_first_not_of(" \t\r\n", pos + 1) == std::string_view::npos)
                break;
            throw ParseError("invalid residue letter '" + std::string(1, c) + "'", pos);
        }
        residues.push_back(static_cast<AminoAcid>(idx));
        ++pos;
    }
    return Protein(std::move(residues));
}

std::string Protein::str() const {
    std::string s;
    s.reserve(residues_.size());
    for (auto aa : residues_) s.push_back(aa_letter(aa));
    return s;
}

MrnaSequence MrnaSequence::from_string(std::string_view nucleotides) {
    std::string clean;
    clean.reserve(nucleotides.size());
    for (char c : nucleotides)
        if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    if (clean.size() % 3 != 0)
        throw ParseError("nucleotide length " + std::to_string(clean.size()) +
                             " is not a multiple of 3",
                         clean.size());
    std::vector<Codon> codons;
    codons.reserve(clean.size() / 3);
    for (std::size_t i = 0; i < clean.size(); i += 3) {
        try {
            codons.push_back(codon_from_string(std::string_view(clean).substr(i, 3)));
        } catch (const ParseError& e) {
            throw ParseError("invalid nucleotide '" + std::string(1, clean[i + e.position()]) + "'",
                             i + e.position());
        }
    }
    return MrnaSequence(std::move(codons));
}

std::vector<Base> MrnaSequence::nucleotides() const {
    std::vector<Base> out;
    out.reserve(3 * codons_.size());
    for (auto c : codons_)
        for (auto b : c.bases()) out.push_back(b);
    return out;
}

std::string MrnaSequence::str() const {
    std::string s;
    s.reserve(3 * codons_.size());
    for (auto c : codons_) s += c.str();
    return s;
}

Protein translate(const MrnaSequence& x) {
    if (x.empty()) throw InputError("cannot translate an empty sequence");
    std::vector<AminoAcid> residues;
    residues.reserve(x.length());
    for (std::size_t i = 0; i < x.length(); ++i) {
        auto aa = x[i].amino_acid();
        if (aa == AminoAcid::Stop)
            throw InputError("STOP codon " + x[i].str() + " at codon position " + std::to_string(i) +
                             " makes the design invalid");
        residues.push_back(aa);
    }
    return Protein(std::move(residues));
}

BigInt design_space_size(const Protein& p) {
    BigInt size = 1;
    for (auto aa : p.residues()) size *= static_cast<unsigned>(synonymous_codons(aa).size());
    return size;
}

double log10_design_space_size(const Protein& p) {
    double total = 0.0;
    for (auto aa : p.residues()) total += std::log10(static_cast<double>(synonymous_codons(aa).size()));
    return total;
}

}  // namespace codonflow
