#include "codonflow/environment.hpp"

#include "codonflow/errors.hpp"

namespace codonflow {

Action::Action(int id) : id_(id) {
    if (id < 0 || id >= kNumActions) throw InputError("action id out of range: " + std::to_string(id));
}

Codon Action::codon() const {
    if (is_exit()) throw UsageError("exit action has no codon");
    return Codon(id_);
}

State::State(std::size_t length) : slots_(length, kUnassigned) {
    if (length == 0) throw InputError("state length must be positive");
}

MrnaSequence State::design() const {
    if (!is_complete()) throw InvariantError("design requested from an incomplete state");
    std::vector<Codon> codons;
    codons.reserve(slots_.size());
    for (int c : slots_) codons.emplace_back(c);
    return MrnaSequence(std::move(codons));
}

State State::with_codon(Codon c) const {
    if (is_complete()) throw InvariantError("state is already complete");
    State next = *this;
    next.slots_[t_] = c.index();
    ++next.t_;
    return next;
}

State State::without_last() const {
    if (t_ == 0) throw NoParentError("the source state has no parent");
    State prev = *this;
    --prev.t_;
    prev.slots_[prev.t_] = kUnassigned;
    return prev;
}

void CodonDesignEnv::check_state(const State& s) const {
    if (s.length() != protein_.length())
        throw InvariantError("state length " + std::to_string(s.length()) + " does not match protein length " +
                             std::to_string(protein_.length()));
    const auto& slots = s.slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i < s.fill_count()) {
            if (slots[i] < 0 || slots[i] >= kNumCodons || Codon(slots[i]).amino_acid() != protein_[i])
                throw InvariantError("slot " + std::to_string(i) + " does not encode residue " +
                                     std::string(1, aa_letter(protein_[i])));
        } else if (slots[i] != State::kUnassigned) {
            throw InvariantError("slot " + std::to_string(i) + " is assigned beyond the fill pointer");
        }
    }
}

ActionMask CodonDesignEnv::forward_mask(const State& s) const {
    check_state(s);
    ActionMask mask;
    if (s.is_complete()) {
        mask.set(kExitAction);
        return mask;
    }
    for (Codon c : synonymous_codons(protein_[s.fill_count()])) mask.set(c.index());
    return mask;
}

BackwardMask CodonDesignEnv::backward_mask(const State& s) const {
    check_state(s);
    if (s.fill_count() == 0) throw NoParentError("the source state has no parent");
    BackwardMask mask(s.length(), false);
    mask[s.fill_count() - 1] = true;
    return mask;
}

StepResult CodonDesignEnv::step(const State& s, Action a) const {
    auto mask = forward_mask(s);
    if (!mask.test(a.id()))
        throw IllegalActionError("action " + std::to_string(a.id()) + " is masked at position " +
                                 std::to_string(s.fill_count()));
    if (a.is_exit()) return Terminal{s.design()};
    return s.with_codon(a.codon());
}

State CodonDesignEnv::backstep(const State& s) const {
    check_state(s);
    return s.without_last();
}

}  // namespace codonflow
