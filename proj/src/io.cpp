#include "codonflow/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "codonflow/errors.hpp"

namespace codonflow {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Protein protein_at_line(const std::string& letters, std::size_t line_no) {
    try {
        return Protein::from_string(letters);
    } catch (const InputError& e) {
        throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
}

// Translates a coding sequence, dropping one trailing stop codon.
Protein translate_cds(const std::string& nucleotides, std::size_t line_no) {
    try {
        auto x = MrnaSequence::from_string(nucleotides);
        if (!x.empty() && x[x.length() - 1].amino_acid() == AminoAcid::Stop) {
            auto codons = x.codons();
            codons.pop_back();
            x = MrnaSequence(std::move(codons));
        }
        return translate(x);
    } catch (const InputError& e) {
        throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)

    int column(std::initializer_list<const char*> names) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            for (const char* n : names)
                if (lower(trim(header[i])) == n) return static_cast<int>(i);
        return -1;
    }
};

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        table.rows.emplace_back(line_no, std::move(fields));
    }
    if (table.header.empty()) throw InputError("CSV input has no header row");
    return table;
}

struct FastaRecord {
    std::string name;
    std::string body;
    std::size_t header_line;
    /// (offset into body, file line) for each sequence line.
    std::vector<std::pair<std::size_t, std::size_t>> segments;

    std::size_t line_of(std::size_t offset) const {
        std::size_t line = header_line;
        for (auto [start, no] : segments)
            if (start <= offset) line = no;
        return line;
    }
};

// Parses a record body, reporting the file line that holds the offending character.
template <typename Parse>
auto parse_record(const FastaRecord& rec, Parse parse) {
    try {
        return parse(rec.body);
    } catch (const ParseError& e) {
        throw InputError("line " + std::to_string(rec.line_of(e.position())) + ": " + e.what());
    } catch (const InputError& e) {
        throw InputError("line " + std::to_string(rec.header_line) + ": " + e.what());
    }
}

std::vector<FastaRecord> read_fasta(std::istream& in) {
    std::vector<FastaRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim(line);
        if (text.empty() || text[0] == ';') continue;
        if (text[0] == '>') {
            if (!records.empty() && records.back().body.empty())
                throw InputError("line " + std::to_string(records.back().header_line) + ": empty FASTA record '" +
                                 records.back().name + "'");
            records.push_back({trim(text.substr(1)), {}, line_no, {}});
            continue;
        }
        if (records.empty()) throw InputError("line " + std::to_string(line_no) + ": sequence data before any '>' header");
        records.back().segments.emplace_back(records.back().body.size(), line_no);
        records.back().body += text;
    }
    if (!records.empty() && records.back().body.empty())
        throw InputError("line " + std::to_string(records.back().header_line) + ": empty FASTA record '" +
                         records.back().name + "'");
    return records;
}

}  // namespace

InputFormat parse_input_format(const std::string& text) {
    if (text == "fasta") return InputFormat::Fasta;
    if (text == "csv") return InputFormat::Csv;
    throw ConfigError("unknown format '" + text + "' (expected fasta or csv)");
}

std::vector<Protein> ProteinPool::proteins() const {
    std::vector<Protein> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.protein);
    return out;
}

std::vector<Protein> ProteinPool::with_length(std::size_t lo, std::size_t hi) const {
    std::vector<Protein> out;
    for (const auto& e : entries_)
        if (e.protein.length() >= lo && e.protein.length() <= hi) out.push_back(e.protein);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

ProteinPool parse_fasta(std::istream& in) {
    std::vector<NamedProtein> entries;
    for (auto& rec : read_fasta(in))
        entries.push_back({rec.name, parse_record(rec, [](const std::string& b) { return Protein::from_string(b); })});
    return ProteinPool(std::move(entries));
}

ProteinPool parse_protein_csv(std::istream& in) {
    auto table = read_csv(in);
    const int protein_col = table.column({"protein"});
    if (protein_col < 0) throw InputError("CSV input needs a 'protein' column");
    const int name_col = table.column({"name"});
    const int dna_col = table.column({"dna", "mrna", "cds"});
    std::vector<NamedProtein> entries;
    for (auto& [line_no, fields] : table.rows) {
        auto letters = trim(fields[protein_col]);
        if (letters.empty()) throw InputError("line " + std::to_string(line_no) + ": empty protein record");
        Protein p = protein_at_line(letters, line_no);
        if (dna_col >= 0 && !trim(fields[dna_col]).empty()) {
            Protein from_dna = translate_cds(trim(fields[dna_col]), line_no);
            if (!(from_dna == p))
                throw InputError("line " + std::to_string(line_no) + ": nucleotide column translates to " +
                                 from_dna.str() + " but the protein column is " + p.str());
        }
        std::string name = name_col >= 0 ? trim(fields[name_col]) : "record_" + std::to_string(entries.size() + 1);
        entries.push_back({std::move(name), std::move(p)});
    }
    return ProteinPool(std::move(entries));
}

ProteinPool load_proteins(const std::string& path, InputFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open protein file '" + path + "'");
    return format == InputFormat::Fasta ? parse_fasta(in) : parse_protein_csv(in);
}

std::vector<std::pair<std::string, MrnaSequence>> load_designs(const std::string& path, InputFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open sequence file '" + path + "'");
    std::vector<std::pair<std::string, MrnaSequence>> out;
    auto parse = [](const std::string& text, std::size_t line_no) {
        try {
            return MrnaSequence::from_string(text);
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }
    };
    if (format == InputFormat::Fasta) {
        for (auto& rec : read_fasta(in))
            out.emplace_back(rec.name,
                             parse_record(rec, [](const std::string& b) { return MrnaSequence::from_string(b); }));
    } else {
        auto table = read_csv(in);
        const int seq_col = table.column({"sequence", "mrna", "dna", "cds"});
        if (seq_col < 0) throw InputError("CSV input needs a 'sequence' column");
        const int name_col = table.column({"name"});
        for (auto& [line_no, fields] : table.rows)
            out.emplace_back(name_col >= 0 ? trim(fields[name_col]) : "record_" + std::to_string(out.size() + 1),
                             parse(trim(fields[seq_col]), line_no));
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_enumeration_csv(std::ostream& out, const DesignSpace& space, const WeightVector& w, double reward_floor) {
    auto r = rewards(space, w, reward_floor);
    auto p = exact_distribution(r);
    out << "# codonflow enumerate v1\n";
    out << "sequence,gc_raw,mfe_pairs,cai,phi_gc,phi_mfe,phi_cai,reward,exact_prob\n";
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& o = space.objectives[i];
        out << space.designs[i].str() << ',' << format_number(o.gc_raw) << ',' << format_number(o.mfe_raw) << ','
            << format_number(o.cai_raw) << ',' << format_number(o.phi[0]) << ',' << format_number(o.phi[1]) << ','
            << format_number(o.phi[2]) << ',' << format_number(r[i]) << ',' << format_number(p[i]) << '\n';
    }
}

void write_samples_csv(std::ostream& out, std::span<const Sample> samples) {
    out << "# codonflow samples v1\n";
    out << "index,sequence,gc_raw,mfe_raw,cai,phi_gc,phi_mfe,phi_cai,reward\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const auto& o = s.objectives;
        out << i << ',' << s.design.str() << ',' << format_number(o.gc_raw) << ',' << format_number(o.mfe_raw)
            << ',' << format_number(o.cai_raw) << ',' << format_number(o.phi[0]) << ',' << format_number(o.phi[1])
            << ',' << format_number(o.phi[2]) << ',' << format_number(s.reward) << '\n';
    }
}

void write_loss_trace_csv(std::ostream& out, std::span<const IterationStats> stats) {
    out << "# codonflow loss_trace v1\n";
    out << "iteration,loss,mean_reward,logZ\n";
    for (const auto& s : stats)
        out << s.iteration << ',' << format_number(s.loss) << ',' << format_number(s.mean_reward) << ','
            << format_number(s.log_z) << '\n';
}

void write_teacher_trace_csv(std::ostream& out, std::span<const EvaluationRound> rounds,
                             const CurriculumConfig& cfg) {
    out << "# codonflow teacher_trace v1 lpe=" << to_string(cfg.lpe) << " lpe_alpha=" << format_number(cfg.lpe_alpha)
        << " acp=" << to_string(cfg.acp) << " a2d=" << to_string(cfg.a2d) << " a2d_eps=" << format_number(cfg.a2d_eps)
        << '\n';
    out << "round,task_id,m,delta_m,LP,P\n";
    for (const auto& r : rounds)
        for (std::size_t j = 0; j < r.m.size(); ++j)
            out << r.round << ',' << j << ',' << format_number(r.m[j]) << ',' << format_number(r.delta_m[j]) << ','
                << format_number(r.lp[j]) << ',' << format_number(r.p[j]) << '\n';
}

void write_histogram_csv(std::ostream& out, std::span<const Sample> samples, int bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    std::vector<std::array<std::size_t, 4>> counts(static_cast<std::size_t>(bins), {0, 0, 0, 0});
    auto bin_of = [&](double v) {
        auto b = static_cast<int>(std::clamp(v, 0.0, 1.0) * bins);
        return static_cast<std::size_t>(std::min(b, bins - 1));
    };
    for (const auto& s : samples) {
        ++counts[bin_of(s.reward)][0];
        for (int k = 0; k < 3; ++k) ++counts[bin_of(s.objectives.phi[k])][k + 1];
    }
    out << "# codonflow histogram v1\n";
    out << "bin_lo,bin_hi,reward,phi_gc,phi_mfe,phi_cai\n";
    for (int b = 0; b < bins; ++b) {
        const auto& c = counts[static_cast<std::size_t>(b)];
        out << format_number(static_cast<double>(b) / bins) << ',' << format_number(static_cast<double>(b + 1) / bins)
            << ',' << c[0] << ',' << c[1] << ',' << c[2] << ',' << c[3] << '\n';
    }
}

}  // namespace codonflow
