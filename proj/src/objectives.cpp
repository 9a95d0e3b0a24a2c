#include "codonflow/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "codonflow/errors.hpp"

namespace codonflow {

extern const char* const kHumanCodonUsageText;

WeightVector::WeightVector(double gc, double mfe, double cai) : w_{gc, mfe, cai} {
    double sum = 0.0;
    for (double v : w_) {
        if (!std::isfinite(v) || v < 0.0) throw InputError("weights must be finite and non-negative");
        sum += v;
    }
    if (sum <= 0.0) throw InputError("weights must not all be zero");
    for (double& v : w_) v /= sum;
}

CodonUsageTable CodonUsageTable::parse(std::istream& in) {
    CodonUsageTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string codon_text;
        if (!(fields >> codon_text)) continue;
        double frequency = 0.0;
        if (!(fields >> frequency) || frequency < 0.0 || !std::isfinite(frequency))
            throw ConfigError("codon usage line " + std::to_string(line_no) +
                              ": expected 'CODON frequency'");
        std::string extra;
        if (fields >> extra)
            throw ConfigError("codon usage line " + std::to_string(line_no) + ": trailing text");
        Codon c;
        try {
            c = codon_from_string(codon_text);
        } catch (const InputError& e) {
            throw ConfigError("codon usage line " + std::to_string(line_no) + ": " + e.what());
        }
        table.set_frequency(c, frequency);
    }
    return table;
}

CodonUsageTable CodonUsageTable::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open codon usage table '" + path + "'");
    return parse(in);
}

const CodonUsageTable& CodonUsageTable::human() {
    static const CodonUsageTable table = [] {
        std::istringstream in(kHumanCodonUsageText);
        return parse(in);
    }();
    return table;
}

void CodonUsageTable::set_frequency(Codon c, double frequency) { freq_[c.index()] = frequency; }

double CodonUsageTable::weight(Codon c) const {
    const auto& f = freq_[c.index()];
    if (!f || *f <= 0.0)
        throw ConfigError("codon usage table has no positive frequency for " + c.str());
    double best = 0.0;
    for (Codon s : synonymous_codons(c.amino_acid()))
        if (freq_[s.index()]) best = std::max(best, *freq_[s.index()]);
    return *f / best;
}

void ObjectiveSettings::validate() const {
    if (!(gc_band.lo >= 0.0 && gc_band.lo < gc_band.hi && gc_band.hi <= 1.0))
        throw ConfigError("GC band must satisfy 0 <= lo < hi <= 1");
    if (min_loop < 0) throw ConfigError("min_loop must be non-negative");
    if (!(reward_floor > 0.0 && reward_floor < 1.0))
        throw ConfigError("reward_floor must lie in (0, 1)");
    if (external && !(external->per_nt_min < 0.0))
        throw ConfigError("external scorer per_nt_min must be negative");
}

double gc_content(const MrnaSequence& x) {
    if (x.empty()) throw InputError("GC content of an empty sequence");
    std::size_t strong = 0;
    for (auto b : x.nucleotides()) strong += (b == Base::G || b == Base::C);
    return static_cast<double>(strong) / static_cast<double>(3 * x.length());
}

double cai(const MrnaSequence& x, const CodonUsageTable& table) {
    if (x.empty()) throw InputError("CAI of an empty sequence");
    double log_sum = 0.0;
    for (auto c : x.codons()) log_sum += std::log(table.weight(c));
    return std::exp(log_sum / static_cast<double>(x.length()));
}

bool can_pair(Base a, Base b) {
    auto key = [](Base x, Base y) { return 4 * static_cast<int>(x) + static_cast<int>(y); };
    switch (key(a, b)) {
        case 4 * 0 + 1:  // AU
        case 4 * 1 + 0:  // UA
        case 4 * 2 + 3:  // GC
        case 4 * 3 + 2:  // CG
        case 4 * 2 + 1:  // GU
        case 4 * 1 + 2:  // UG
            return true;
        default:
            return false;
    }
}

namespace {

// best[i][j] = max pairs on seq[i..j]; j is paired with some k in [i, j - min_loop - 1] or
// left unpaired.
std::vector<int> nussinov_table(std::span<const Base> seq, int min_loop) {
    const int n = static_cast<int>(seq.size());
    std::vector<int> best(static_cast<std::size_t>(n) * n, 0);
    auto at = [&](int i, int j) -> int& { return best[static_cast<std::size_t>(i) * n + j]; };
    for (int span = min_loop + 1; span < n; ++span) {
        for (int i = 0; i + span < n; ++i) {
            int j = i + span;
            int value = at(i, j - 1);
            for (int k = i; k < j - min_loop; ++k) {
                if (!can_pair(seq[k], seq[j])) continue;
                int left = k > i ? at(i, k - 1) : 0;
                int inner = k + 1 <= j - 1 ? at(k + 1, j - 1) : 0;
                value = std::max(value, left + 1 + inner);
            }
            at(i, j) = value;
        }
    }
    return best;
}

}  // namespace

int mfe_proxy(std::span<const Base> seq, int min_loop) {
    if (min_loop < 0) throw ConfigError("min_loop must be non-negative");
    const int n = static_cast<int>(seq.size());
    if (n <= min_loop + 1) return 0;
    auto best = nussinov_table(seq, min_loop);
    return best[n - 1];
}

int mfe_proxy(const MrnaSequence& x, int min_loop) {
    auto nt = x.nucleotides();
    return mfe_proxy(nt, min_loop);
}

std::string nussinov_structure(std::span<const Base> seq, int min_loop) {
    const int n = static_cast<int>(seq.size());
    std::string dots(seq.size(), '.');
    if (n <= min_loop + 1) return dots;
    auto best = nussinov_table(seq, min_loop);
    auto at = [&](int i, int j) { return i > j ? 0 : best[static_cast<std::size_t>(i) * n + j]; };
    std::vector<std::pair<int, int>> stack{{0, n - 1}};
    while (!stack.empty()) {
        auto [i, j] = stack.back();
        stack.pop_back();
        if (j - i <= min_loop) continue;
        if (at(i, j) == at(i, j - 1)) {
            stack.emplace_back(i, j - 1);
            continue;
        }
        for (int k = i; k < j - min_loop; ++k) {
            if (!can_pair(seq[k], seq[j])) continue;
            if (at(i, k - 1) + 1 + at(k + 1, j - 1) == at(i, j)) {
                dots[k] = '(';
                dots[j] = ')';
                stack.emplace_back(i, k - 1);
                stack.emplace_back(k + 1, j - 1);
                break;
            }
        }
    }
    return dots;
}

double phi_gc(double gc_raw, const GcBand& band) {
    if (!(band.lo >= 0.0 && band.lo < band.hi && band.hi <= 1.0))
        throw ConfigError("GC band must satisfy 0 <= lo < hi <= 1");
    if (gc_raw < band.lo) return band.lo > 0.0 ? std::clamp(gc_raw / band.lo, 0.0, 1.0) : 1.0;
    if (gc_raw > band.hi) return band.hi < 1.0 ? std::clamp((1.0 - gc_raw) / (1.0 - band.hi), 0.0, 1.0) : 1.0;
    return 1.0;
}

double phi_mfe_pairs(double pairs, std::size_t length) {
    const double max_pairs = std::floor(3.0 * static_cast<double>(length) / 2.0);
    if (max_pairs <= 0.0) return 0.0;
    return std::clamp(pairs / max_pairs, 0.0, 1.0);
}

double phi_mfe_energy(double energy, std::size_t nucleotides, double per_nt_min) {
    const double lowest = per_nt_min * static_cast<double>(nucleotides);
    if (lowest >= 0.0) return 0.0;
    return std::clamp(energy / lowest, 0.0, 1.0);
}

double ExternalScorer::score(std::string_view nucleotides) const {
    char path[] = "/tmp/codonflow_scoreXXXXXX";
    int fd = ::mkstemp(path);
    if (fd < 0) throw ConfigError("external scorer: cannot create temporary input file");
    {
        std::string body(nucleotides);
        body.push_back('\n');
        auto written = ::write(fd, body.data(), body.size());
        ::close(fd);
        if (written != static_cast<ssize_t>(body.size())) {
            ::unlink(path);
            throw ConfigError("external scorer: cannot write input");
        }
    }
    std::string full = "( " + command + " ) < " + path;
    FILE* pipe = ::popen(full.c_str(), "r");
    if (!pipe) {
        ::unlink(path);
        throw ConfigError("external scorer: cannot run '" + command + "'");
    }
    std::string output;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) output += buf;
    int status = ::pclose(pipe);
    ::unlink(path);
    if (status != 0) throw ConfigError("external scorer exited with status " + std::to_string(status));
    std::istringstream parsed(output);
    double value = 0.0;
    if (!(parsed >> value) || !std::isfinite(value))
        throw ConfigError("external scorer did not print a number: '" + output + "'");
    return value;
}

ObjectiveVector evaluate_objectives(const MrnaSequence& x, const ObjectiveSettings& settings) {
    ObjectiveVector v;
    v.gc_raw = gc_content(x);
    v.cai_raw = cai(x, settings.usage);
    if (settings.external) {
        v.mfe_raw = settings.external->score(x.str());
        v.phi[1] = phi_mfe_energy(v.mfe_raw, 3 * x.length(), settings.external->per_nt_min);
    } else {
        v.mfe_raw = mfe_proxy(x, settings.min_loop);
        v.phi[1] = phi_mfe_pairs(v.mfe_raw, x.length());
    }
    v.phi[0] = phi_gc(v.gc_raw, settings.gc_band);
    v.phi[2] = std::clamp(v.cai_raw, 0.0, 1.0);
    return v;
}

double scalarize(const std::array<double, 3>& phi, const WeightVector& w, double reward_floor) {
    double r = 0.0;
    for (int i = 0; i < kNumObjectives; ++i) r += w[i] * phi[i];
    return std::min(1.0, r + reward_floor);
}

double reward(const MrnaSequence& x, const WeightVector& w, const ObjectiveSettings& settings) {
    return scalarize(evaluate_objectives(x, settings).phi, w, settings.reward_floor);
}

std::vector<ObjectiveVector> evaluate_batch(std::span<const MrnaSequence> xs,
                                            const ObjectiveSettings& settings, unsigned threads) {
    std::vector<ObjectiveVector> out(xs.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(xs.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate_objectives(xs[i], settings);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < xs.size(); i += threads)
                    out[i] = evaluate_objectives(xs[i], settings);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace codonflow
