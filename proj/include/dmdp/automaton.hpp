#pragma once

#include <string>
#include <vector>

namespace dmdp {

/// Deterministic Rabin or Buchi automaton over the alphabet 2^AP. Letters are
/// bitmasks over the ordered `ap` list; delta[q][letter] is total.
struct DeterministicAutomaton {
    enum class Kind { Rabin, Buchi };

    Kind kind = Kind::Rabin;
    std::vector<std::string> state_names;
    int initial = 0;
    std::vector<std::string> ap;
    std::vector<std::vector<int>> delta; // [state][letter mask] -> state
    std::vector<std::pair<std::vector<int>, std::vector<int>>> rabin_pairs; // (J_i, H_i)
    std::vector<int> buchi_accepting; // F

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_letters() const { return 1 << ap.size(); }
    int step(int q, int letter) const { return delta[q][letter]; }
};

/// Throws std::invalid_argument on partial transition tables, out-of-range
/// acceptance sets, or a Rabin automaton without acceptance pairs.
void validate_automaton(const DeterministicAutomaton& a);

/// Letter bitmask of a set of proposition names; throws naming any
/// proposition outside the automaton alphabet.
int letter_of(const DeterministicAutomaton& a, const std::vector<std::string>& props);

} // namespace dmdp
