#include "dmdp/automaton.hpp"

#include <algorithm>
#include <stdexcept>

namespace dmdp {

void validate_automaton(const DeterministicAutomaton& a) {
    const int nq = a.num_states();
    const int nl = a.num_letters();
    if (nq == 0) throw std::invalid_argument("automaton has no states");
    if (a.initial < 0 || a.initial >= nq) throw std::invalid_argument("automaton initial state out of range");
    if (static_cast<int>(a.delta.size()) != nq)
        throw std::invalid_argument("transition table does not cover every state");
    for (int q = 0; q < nq; ++q) {
        if (static_cast<int>(a.delta[q].size()) != nl)
            throw std::invalid_argument("transition table of " + a.state_names[q] + " is not total");
        for (int l = 0; l < nl; ++l)
            if (a.delta[q][l] < 0 || a.delta[q][l] >= nq)
                throw std::invalid_argument("transition of " + a.state_names[q] + " leaves the state set");
    }

    auto check_set = [&](const std::vector<int>& set, const char* what) {
        for (int q : set)
            if (q < 0 || q >= nq) throw std::invalid_argument(std::string(what) + " set out of range");
    };
    if (a.kind == DeterministicAutomaton::Kind::Rabin) {
        if (a.rabin_pairs.empty()) throw std::invalid_argument("Rabin automaton needs at least one acceptance pair");
        for (const auto& [j, h] : a.rabin_pairs) {
            check_set(j, "J");
            check_set(h, "H");
        }
    } else {
        check_set(a.buchi_accepting, "accepting");
    }
}

int letter_of(const DeterministicAutomaton& a, const std::vector<std::string>& props) {
    int mask = 0;
    for (const auto& p : props) {
        auto it = std::find(a.ap.begin(), a.ap.end(), p);
        if (it == a.ap.end())
            throw std::invalid_argument("proposition \"" + p + "\" is not in the automaton alphabet");
        mask |= 1 << static_cast<int>(it - a.ap.begin());
    }
    return mask;
}

} // namespace dmdp
