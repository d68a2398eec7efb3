#pragma once

#include "dmdp/automaton.hpp"
#include "dmdp/mdp.hpp"

namespace dmdp {

/// Product of a labeled MDP with a deterministic automaton, restricted to the
/// states reachable from the initial distribution. The automaton consumes the
/// label of the state being entered; the initial automaton component of a
/// state s is T(I, L(s)).
struct ProductMdp {
    Mdp mdp; // u0 of this MDP is the product initial distribution
    DeterministicAutomaton::Kind kind = DeterministicAutomaton::Kind::Rabin;
    std::vector<std::pair<StateId, int>> source; // product state -> (mdp state, automaton state)
    std::vector<std::pair<std::vector<StateId>, std::vector<StateId>>> rabin_pairs; // lifted (J,H)
    std::vector<StateId> buchi_accepting; // lifted F
};

ProductMdp product_rabin(const Mdp& mdp, const DeterministicAutomaton& dra);
ProductMdp product_buchi(const Mdp& mdp, const DeterministicAutomaton& dba);

/// Sub-MDP closed under the retained choices and strongly connected.
struct EndComponent {
    std::vector<StateId> states;
    std::vector<std::vector<int>> choices; // per member state: retained choice indices
    int witness_pair = -1;                 // Rabin pair certifying acceptance, when relevant
};

/// Maximal end components, pairwise disjoint.
std::vector<EndComponent> mec_decomposition(const Mdp& mdp);

/// Accepting end components of a Rabin product: for each pair i, the MECs of
/// the sub-MDP restricted to V \ J_i that intersect H_i. accepting_states is
/// the union of their state sets.
struct AecResult {
    std::vector<EndComponent> components;
    std::vector<StateId> accepting_states;
};
AecResult accepting_end_components(const ProductMdp& p);

/// Collapses the accepting end states into one absorbing sink whose entry
/// probability becomes the reward. States that cannot reach the sink at all
/// get value 0; they are removed and their transitions redirected to the sink
/// with no reward, which leaves every remaining value unchanged.
///
/// The sink itself has value 0, so the satisfaction probability of the
/// original product is (value at u0) + sink_initial_mass.
struct SinkifyResult {
    Mdp mdp;
    RewardFn rewards;
    int sink_state = 0;
    double sink_initial_mass = 0.0;   // initial mass of the accepting states
    double pruned_initial_mass = 0.0; // initial mass of value-0 states
    std::vector<StateId> pruned;      // product states with value 0
    std::vector<StateId> kept;        // product state per non-sink result state
    bool degenerate = false;          // no accepting states at all
};
SinkifyResult sinkify(const ProductMdp& p, const std::vector<StateId>& accepting_states);

/// One-step probability of entering the Buchi acceptance set.
RewardFn buchi_frequency_reward(const ProductMdp& p);

} // namespace dmdp
