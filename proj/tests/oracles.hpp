#pragma once

// Reference implementations used only by the tests. They are deliberately naive and share no
// code with the library routines they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Standard genetic code written out per amino acid (one-letter code, '*' for stop).
inline const std::map<char, std::vector<std::string>>& standard_code() {
    static const std::map<char, std::vector<std::string>> table{
        {'A', {"GCU", "GCC", "GCA", "GCG"}},
        {'C', {"UGU", "UGC"}},
        {'D', {"GAU", "GAC"}},
        {'E', {"GAA", "GAG"}},
        {'F', {"UUU", "UUC"}},
        {'G', {"GGU", "GGC", "GGA", "GGG"}},
        {'H', {"CAU", "CAC"}},
        {'I', {"AUU", "AUC", "AUA"}},
        {'K', {"AAA", "AAG"}},
        {'L', {"UUA", "UUG", "CUU", "CUC", "CUA", "CUG"}},
        {'M', {"AUG"}},
        {'N', {"AAU", "AAC"}},
        {'P', {"CCU", "CCC", "CCA", "CCG"}},
        {'Q', {"CAA", "CAG"}},
        {'R', {"CGU", "CGC", "CGA", "CGG", "AGA", "AGG"}},
        {'S', {"UCU", "UCC", "UCA", "UCG", "AGU", "AGC"}},
        {'T', {"ACU", "ACC", "ACA", "ACG"}},
        {'V', {"GUU", "GUC", "GUA", "GUG"}},
        {'W', {"UGG"}},
        {'Y', {"UAU", "UAC"}},
        {'*', {"UAA", "UAG", "UGA"}},
    };
    return table;
}

inline char amino_acid_of(const std::string& codon) {
    for (const auto& [aa, codons] : standard_code())
        if (std::find(codons.begin(), codons.end(), codon) != codons.end()) return aa;
    return '?';
}

// Every design of a protein by recursive cartesian product, as nucleotide strings.
inline void designs_rec(const std::string& protein, std::size_t i, std::string& prefix, std::vector<std::string>& out) {
    if (i == protein.size()) {
        out.push_back(prefix);
        return;
    }
    for (const auto& c : standard_code().at(protein[i])) {
        prefix += c;
        designs_rec(protein, i + 1, prefix, out);
        prefix.resize(prefix.size() - 3);
    }
}

inline std::vector<std::string> all_designs(const std::string& protein) {
    std::vector<std::string> out;
    std::string prefix;
    designs_rec(protein, 0, prefix, out);
    std::sort(out.begin(), out.end());
    return out;
}

inline bool pairs_ok(char a, char b) {
    const std::string s{a, b};
    return s == "AU" || s == "UA" || s == "GC" || s == "CG" || s == "GU" || s == "UG";
}

using Structure = std::vector<std::pair<int, int>>;

// Every secondary structure on [lo, hi] (non-crossing, loops of at least min_loop), listed
// explicitly.
inline std::vector<Structure> structures(const std::string& s, int lo, int hi, int min_loop) {
    if (lo > hi) return {Structure{}};
    std::vector<Structure> out = structures(s, lo + 1, hi, min_loop);  // lo unpaired
    for (int k = lo + min_loop + 1; k <= hi; ++k) {
        if (!pairs_ok(s[lo], s[k])) continue;
        for (const auto& inner : structures(s, lo + 1, k - 1, min_loop))
            for (const auto& outer : structures(s, k + 1, hi, min_loop)) {
                Structure st{{lo, k}};
                st.insert(st.end(), inner.begin(), inner.end());
                st.insert(st.end(), outer.begin(), outer.end());
                out.push_back(std::move(st));
            }
    }
    return out;
}

inline bool valid_structure(const std::string& s, const Structure& st, int min_loop) {
    std::vector<int> used(s.size(), 0);
    for (auto [i, j] : st) {
        if (!(i < j) || j - i - 1 < min_loop || !pairs_ok(s[i], s[j])) return false;
        if (used[i]++ || used[j]++) return false;
    }
    for (auto [i, j] : st)
        for (auto [k, l] : st)
            if (i < k && k < j && j < l) return false;
    return true;
}

inline int max_pairs_exhaustive(const std::string& s, int min_loop) {
    int best = 0;
    if (s.empty()) return 0;
    for (const auto& st : structures(s, 0, static_cast<int>(s.size()) - 1, min_loop))
        if (valid_structure(s, st, min_loop)) best = std::max(best, static_cast<int>(st.size()));
    return best;
}

inline bool dominated_by(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return b[0] >= a[0] && b[1] >= a[1] && b[2] >= a[2] && (b[0] > a[0] || b[1] > a[1] || b[2] > a[2]);
}

}  // namespace oracle
