#pragma once

// Exhaustive end-component oracle for tiny MDPs: every nonempty state subset
// is tested with the maximal staying-action map for closedness and strong
// connectivity. Only usable for |S| small enough to enumerate subsets.

#include "dmdp/mdp.hpp"
#include "dmdp/product.hpp"

#include <algorithm>
#include <vector>

namespace dmdp::testing {

inline bool strongly_connected(const std::vector<StateId>& members,
                               const std::vector<std::vector<StateId>>& adj) {
    if (members.empty()) return false;
    std::vector<std::vector<StateId>> radj(adj.size());
    for (StateId s = 0; s < static_cast<StateId>(adj.size()); ++s)
        for (StateId t : adj[s]) radj[t].push_back(s);

    auto covers = [&](const std::vector<std::vector<StateId>>& edges) {
        std::vector<bool> inside(adj.size(), false), seen(adj.size(), false);
        for (StateId s : members) inside[s] = true;
        std::vector<StateId> stack{members[0]};
        seen[members[0]] = true;
        size_t count = 1;
        while (!stack.empty()) {
            StateId s = stack.back();
            stack.pop_back();
            for (StateId t : edges[s])
                if (inside[t] && !seen[t]) {
                    seen[t] = true;
                    ++count;
                    stack.push_back(t);
                }
        }
        return count == members.size();
    };
    return covers(adj) && covers(radj);
}

/// The maximal staying-choice map of a subset, or empty if some member state
/// has no choice whose support stays inside.
inline std::vector<std::vector<int>> staying_choices(const Mdp& mdp, const std::vector<StateId>& w) {
    std::vector<bool> inside(mdp.num_states(), false);
    for (StateId s : w) inside[s] = true;
    std::vector<std::vector<int>> choices;
    for (StateId s : w) {
        std::vector<int> keep;
        for (int k = 0; k < mdp.num_choices(s); ++k) {
            bool stays = true;
            for (const Outcome& o : mdp.choices[s][k].outcomes)
                if (!inside[o.to]) {
                    stays = false;
                    break;
                }
            if (stays) keep.push_back(k);
        }
        if (keep.empty()) return {};
        choices.push_back(std::move(keep));
    }
    return choices;
}

/// True iff (w, maximal staying map) is an end component.
inline bool is_end_component(const Mdp& mdp, const std::vector<StateId>& w,
                             std::vector<std::vector<int>>* choices_out = nullptr) {
    auto choices = staying_choices(mdp, w);
    if (choices.empty() && !w.empty()) return false;
    std::vector<std::vector<StateId>> adj(mdp.num_states());
    for (size_t i = 0; i < w.size(); ++i)
        for (int k : choices[i])
            for (const Outcome& o : mdp.choices[w[i]][k].outcomes) adj[w[i]].push_back(o.to);
    if (!strongly_connected(w, adj)) return false;
    if (choices_out) *choices_out = std::move(choices);
    return true;
}

/// Maximal end components by subset enumeration; |S| must be at most ~16.
inline std::vector<EndComponent> brute_force_mecs(const Mdp& mdp) {
    const int n = mdp.num_states();
    std::vector<std::vector<StateId>> valid;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<StateId> w;
        for (int s = 0; s < n; ++s)
            if (mask & (1u << s)) w.push_back(s);
        if (is_end_component(mdp, w)) valid.push_back(std::move(w));
    }

    std::vector<EndComponent> out;
    for (const auto& w : valid) {
        bool maximal = true;
        for (const auto& other : valid)
            if (other.size() > w.size() && std::includes(other.begin(), other.end(), w.begin(), w.end())) {
                maximal = false;
                break;
            }
        if (!maximal) continue;
        EndComponent ec;
        ec.states = w;
        is_end_component(mdp, w, &ec.choices);
        out.push_back(std::move(ec));
    }
    std::sort(out.begin(), out.end(),
              [](const EndComponent& a, const EndComponent& b) { return a.states < b.states; });
    return out;
}

/// Accepting end states by enumeration: a state is accepting iff it lies in
/// some end component avoiding J_i and touching H_i for some pair i.
inline std::vector<StateId> brute_force_accepting_states(const ProductMdp& p) {
    const int n = p.mdp.num_states();
    std::vector<bool> acc(n, false);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<StateId> w;
        for (int s = 0; s < n; ++s)
            if (mask & (1u << s)) w.push_back(s);
        if (!is_end_component(p.mdp, w)) continue;
        for (const auto& [j, h] : p.rabin_pairs) {
            bool hits_j = std::any_of(w.begin(), w.end(), [&](StateId v) {
                return std::find(j.begin(), j.end(), v) != j.end();
            });
            bool hits_h = std::any_of(w.begin(), w.end(), [&](StateId v) {
                return std::find(h.begin(), h.end(), v) != h.end();
            });
            if (!hits_j && hits_h) {
                for (StateId v : w) acc[v] = true;
                break;
            }
        }
    }
    std::vector<StateId> out;
    for (int s = 0; s < n; ++s)
        if (acc[s]) out.push_back(s);
    return out;
}

} // namespace dmdp::testing
