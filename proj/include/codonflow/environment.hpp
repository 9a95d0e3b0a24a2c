#pragma once

#include <bitset>
#include <cstdint>
#include <variant>
#include <vector>

#include "codonflow/genetic_code.hpp"

namespace codonflow {

inline constexpr int kNumActions = 65;
inline constexpr int kExitAction = 64;

/// 0..63 selects a codon, 64 terminates.
class Action {
   public:
    explicit Action(int id);
    static Action exit() { return Action(kExitAction); }
    static Action codon(Codon c) { return Action(c.index()); }

    int id() const { return id_; }
    bool is_exit() const { return id_ == kExitAction; }
    Codon codon() const;

    friend bool operator==(Action, Action) = default;

   private:
    int id_;
};

using ActionMask = std::bitset<kNumActions>;
/// One entry per slot; true where removing that slot is an allowed backward action.
using BackwardMask = std::vector<bool>;

/// Prefix-filled slot vector: slots [0, t) hold codon indices, the rest hold -1.
class State {
   public:
    static constexpr int kUnassigned = -1;

    explicit State(std::size_t length);

    std::size_t length() const { return slots_.size(); }
    std::size_t fill_count() const { return t_; }
    bool is_complete() const { return t_ == slots_.size(); }
    const std::vector<int>& slots() const { return slots_; }
    /// Codon in the last filled slot, or -1 at the source.
    int last_codon() const { return t_ == 0 ? kUnassigned : slots_[t_ - 1]; }
    MrnaSequence design() const;

    State with_codon(Codon c) const;
    State without_last() const;

    friend bool operator==(const State&, const State&) = default;

   private:
    std::vector<int> slots_;
    std::size_t t_ = 0;
};

/// Marks the sink state reached by the exit action; carries the finished design.
struct Terminal {
    MrnaSequence design;
};

using StepResult = std::variant<State, Terminal>;

/// The codon design environment for one target protein. Transitions form a tree rooted at the
/// all-unassigned state, so every non-source state has exactly one parent.
class CodonDesignEnv {
   public:
    explicit CodonDesignEnv(Protein protein) : protein_(std::move(protein)) {}

    const Protein& protein() const { return protein_; }
    std::size_t length() const { return protein_.length(); }

    State initial_state() const { return State(protein_.length()); }
    /// Synonymous codons of the next residue, or only exit once every slot is filled.
    ActionMask forward_mask(const State& s) const;
    /// Only the most recently filled slot may be cleared. Throws NoParentError at the source.
    BackwardMask backward_mask(const State& s) const;
    StepResult step(const State& s, Action a) const;
    State backstep(const State& s) const;

    static constexpr bool is_tree() { return true; }
    std::size_t parent_count(const State& s) const { return s.fill_count() == 0 ? 0 : 1; }

    /// Throws InvariantError if the state is not reachable for this protein.
    void check_state(const State& s) const;

   private:
    Protein protein_;
};

/// A complete rollout: states s_0..s_L, the L codon actions followed by exit.
struct Trajectory {
    std::vector<State> states;
    std::vector<Action> actions;
    MrnaSequence design;
    /// log P_F of each action under the non-exploratory policy, filled by the sampler.
    std::vector<double> log_pf;
    double reward = 0.0;
};

}  // namespace codonflow
