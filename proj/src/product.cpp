#include "dmdp/product.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace dmdp {

namespace {

std::vector<int> state_letters(const Mdp& mdp, const DeterministicAutomaton& aut) {
    std::vector<int> letters(mdp.num_states(), 0);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        int mask = 0;
        if (mdp.has_labels) {
            for (const auto& p : mdp.labels[s]) {
                auto it = std::find(aut.ap.begin(), aut.ap.end(), p);
                if (it == aut.ap.end())
                    throw std::invalid_argument("label \"" + p + "\" of state " + mdp.state_names[s] +
                                                " is not in the automaton alphabet");
                mask |= 1 << static_cast<int>(it - aut.ap.begin());
            }
        }
        letters[s] = mask;
    }
    return letters;
}

ProductMdp build_product(const Mdp& mdp, const DeterministicAutomaton& aut) {
    validate_automaton(aut);
    std::vector<int> letters = state_letters(mdp, aut);

    ProductMdp p;
    p.kind = aut.kind;
    std::map<std::pair<StateId, int>, StateId> id_of;
    std::deque<std::pair<StateId, int>> frontier;
    auto intern = [&](StateId s, int q) {
        auto [it, inserted] = id_of.try_emplace({s, q}, static_cast<StateId>(p.source.size()));
        if (inserted) {
            p.source.emplace_back(s, q);
            frontier.emplace_back(s, q);
        }
        return it->second;
    };

    // The automaton consumes the label of the entered state, starting with
    // the label of the initial state itself.
    std::vector<std::pair<StateId, double>> initial_mass;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (mdp.initial(s) > 0.0)
            initial_mass.emplace_back(intern(s, aut.step(aut.initial, letters[s])), mdp.initial(s));

    std::vector<std::vector<Choice>> choices;
    while (!frontier.empty()) {
        auto [s, q] = frontier.front();
        frontier.pop_front();
        StateId v = id_of.at({s, q});
        if (static_cast<StateId>(choices.size()) <= v) choices.resize(v + 1);
        for (const Choice& ch : mdp.choices[s]) {
            Choice pc;
            pc.action = ch.action;
            for (const Outcome& o : ch.outcomes)
                pc.outcomes.push_back({intern(o.to, aut.step(q, letters[o.to])), o.prob});
            choices[v].push_back(std::move(pc));
        }
    }

    Mdp& pm = p.mdp;
    pm.action_names = mdp.action_names;
    pm.choices = std::move(choices);
    pm.choices.resize(p.source.size());
    pm.labels.resize(p.source.size());
    for (const auto& [s, q] : p.source)
        pm.state_names.push_back(mdp.state_names[s] + "|" + aut.state_names[q]);
    pm.initial = Eigen::VectorXd::Zero(static_cast<int>(p.source.size()));
    for (auto [v, mass] : initial_mass) pm.initial(v) = mass;

    if (aut.kind == DeterministicAutomaton::Kind::Rabin) {
        for (const auto& [j, h] : aut.rabin_pairs) {
            std::vector<StateId> lifted_j, lifted_h;
            std::set<int> js(j.begin(), j.end()), hs(h.begin(), h.end());
            for (StateId v = 0; v < pm.num_states(); ++v) {
                if (js.count(p.source[v].second)) lifted_j.push_back(v);
                if (hs.count(p.source[v].second)) lifted_h.push_back(v);
            }
            p.rabin_pairs.emplace_back(std::move(lifted_j), std::move(lifted_h));
        }
    } else {
        std::set<int> fs(aut.buchi_accepting.begin(), aut.buchi_accepting.end());
        for (StateId v = 0; v < pm.num_states(); ++v)
            if (fs.count(p.source[v].second)) p.buchi_accepting.push_back(v);
    }
    return p;
}

/// Strongly connected components of the digraph spanned by `members` with the
/// given adjacency; Kosaraju over the subgraph.
std::vector<std::vector<StateId>> sccs_within(const std::vector<StateId>& members,
                                              const std::vector<std::vector<StateId>>& adj) {
    std::set<StateId> inside(members.begin(), members.end());
    std::vector<StateId> order;
    std::set<StateId> seen;
    for (StateId root : members) {
        if (seen.count(root)) continue;
        // Iterative post-order DFS.
        std::vector<std::pair<StateId, size_t>> stack{{root, 0}};
        seen.insert(root);
        while (!stack.empty()) {
            auto& [s, next] = stack.back();
            if (next < adj[s].size()) {
                StateId t = adj[s][next++];
                if (inside.count(t) && !seen.count(t)) {
                    seen.insert(t);
                    stack.emplace_back(t, 0);
                }
            } else {
                order.push_back(s);
                stack.pop_back();
            }
        }
    }

    std::map<StateId, std::vector<StateId>> radj;
    for (StateId s : members)
        for (StateId t : adj[s])
            if (inside.count(t)) radj[t].push_back(s);

    std::vector<std::vector<StateId>> sccs;
    std::set<StateId> assigned;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (assigned.count(*it)) continue;
        std::vector<StateId> comp, stack{*it};
        assigned.insert(*it);
        while (!stack.empty()) {
            StateId s = stack.back();
            stack.pop_back();
            comp.push_back(s);
            for (StateId t : radj[s])
                if (!assigned.count(t)) {
                    assigned.insert(t);
                    stack.push_back(t);
                }
        }
        std::sort(comp.begin(), comp.end());
        sccs.push_back(std::move(comp));
    }
    return sccs;
}

/// Maximal end components of the sub-MDP spanned by `candidate` states.
std::vector<EndComponent> mecs_within(const Mdp& mdp, std::vector<StateId> candidate) {
    std::vector<EndComponent> result;
    std::deque<std::vector<StateId>> work;
    std::sort(candidate.begin(), candidate.end());
    work.push_back(std::move(candidate));

    while (!work.empty()) {
        std::vector<StateId> c = std::move(work.front());
        work.pop_front();

        // Repeatedly drop choices that leave the candidate set and states left
        // without choices.
        std::set<StateId> in(c.begin(), c.end());
        std::map<StateId, std::vector<int>> allowed;
        bool changed = true;
        while (changed) {
            changed = false;
            allowed.clear();
            for (StateId s : c) {
                std::vector<int> keep;
                for (int k = 0; k < mdp.num_choices(s); ++k) {
                    bool stays = true;
                    for (const Outcome& o : mdp.choices[s][k].outcomes)
                        if (!in.count(o.to)) {
                            stays = false;
                            break;
                        }
                    if (stays) keep.push_back(k);
                }
                if (keep.empty()) {
                    in.erase(s);
                    changed = true;
                } else {
                    allowed[s] = std::move(keep);
                }
            }
            if (changed) c.assign(in.begin(), in.end());
        }
        if (c.empty()) continue;

        std::vector<std::vector<StateId>> adj(mdp.num_states());
        for (StateId s : c)
            for (int k : allowed[s])
                for (const Outcome& o : mdp.choices[s][k].outcomes) adj[s].push_back(o.to);

        auto sccs = sccs_within(c, adj);
        if (sccs.size() == 1 && sccs[0].size() == c.size()) {
            EndComponent ec;
            ec.states = sccs[0];
            for (StateId s : ec.states) ec.choices.push_back(allowed[s]);
            result.push_back(std::move(ec));
        } else {
            for (auto& scc : sccs) work.push_back(std::move(scc));
        }
    }

    std::sort(result.begin(), result.end(),
              [](const EndComponent& a, const EndComponent& b) { return a.states < b.states; });
    return result;
}

} // namespace

ProductMdp product_rabin(const Mdp& mdp, const DeterministicAutomaton& dra) {
    if (dra.kind != DeterministicAutomaton::Kind::Rabin)
        throw std::invalid_argument("expected a Rabin automaton");
    return build_product(mdp, dra);
}

ProductMdp product_buchi(const Mdp& mdp, const DeterministicAutomaton& dba) {
    if (dba.kind != DeterministicAutomaton::Kind::Buchi)
        throw std::invalid_argument("expected a Buchi automaton");
    return build_product(mdp, dba);
}

std::vector<EndComponent> mec_decomposition(const Mdp& mdp) {
    std::vector<StateId> all(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) all[s] = s;
    return mecs_within(mdp, all);
}

AecResult accepting_end_components(const ProductMdp& p) {
    if (p.kind != DeterministicAutomaton::Kind::Rabin)
        throw std::invalid_argument("accepting end components need a Rabin product");

    AecResult out;
    std::set<std::vector<StateId>> seen;
    std::set<StateId> all_states;
    for (int i = 0; i < static_cast<int>(p.rabin_pairs.size()); ++i) {
        const auto& [j, h] = p.rabin_pairs[i];
        std::set<StateId> forbidden(j.begin(), j.end());
        std::set<StateId> target(h.begin(), h.end());

        std::vector<StateId> candidate;
        for (StateId v = 0; v < p.mdp.num_states(); ++v)
            if (!forbidden.count(v)) candidate.push_back(v);
        if (candidate.empty()) continue;

        for (EndComponent& ec : mecs_within(p.mdp, candidate)) {
            bool touches = std::any_of(ec.states.begin(), ec.states.end(),
                                       [&](StateId v) { return target.count(v) > 0; });
            if (!touches) continue;
            if (!seen.insert(ec.states).second) continue; // same set under another pair
            all_states.insert(ec.states.begin(), ec.states.end());
            ec.witness_pair = i;
            out.components.push_back(std::move(ec));
        }
    }
    out.accepting_states.assign(all_states.begin(), all_states.end());
    return out;
}

SinkifyResult sinkify(const ProductMdp& p, const std::vector<StateId>& accepting_states) {
    const Mdp& pm = p.mdp;
    SinkifyResult out;

    if (accepting_states.empty()) {
        out.degenerate = true;
        out.sink_state = 0;
        out.pruned_initial_mass = 1.0;
        for (StateId v = 0; v < pm.num_states(); ++v) out.pruned.push_back(v);
        Mdp& m = out.mdp;
        m.state_names = {"sink"};
        m.action_names = pm.action_names;
        m.initial = Eigen::VectorXd::Ones(1);
        m.choices.resize(1);
        m.labels.resize(1);
        for (ActionId a = 0; a < static_cast<int>(m.action_names.size()); ++a)
            m.choices[0].push_back({a, {{0, 1.0}}});
        out.rewards = constant_reward(m, 0.0);
        return out;
    }

    std::vector<bool> in_c(pm.num_states(), false);
    for (StateId v : accepting_states) in_c[v] = true;

    // Mass into the accepting set per transient state-action pair; this is
    // the reward and also decides which states can reach the sink at all.
    std::vector<std::vector<double>> to_c(pm.num_states());
    std::vector<std::vector<StateId>> rev(pm.num_states()); // transient-to-transient edges, reversed
    std::vector<StateId> direct;                            // one step from the sink
    for (StateId v = 0; v < pm.num_states(); ++v) {
        if (in_c[v]) continue;
        to_c[v].assign(pm.num_choices(v), 0.0);
        bool hits = false;
        for (int k = 0; k < pm.num_choices(v); ++k)
            for (const Outcome& o : pm.choices[v][k].outcomes) {
                if (in_c[o.to]) {
                    to_c[v][k] += o.prob;
                    hits = true;
                } else {
                    rev[o.to].push_back(v);
                }
            }
        if (hits) direct.push_back(v);
    }

    std::vector<bool> reaches(pm.num_states(), false);
    std::vector<StateId> stack = direct;
    for (StateId v : direct) reaches[v] = true;
    while (!stack.empty()) {
        StateId v = stack.back();
        stack.pop_back();
        for (StateId w : rev[v])
            if (!in_c[w] && !reaches[w]) {
                reaches[w] = true;
                stack.push_back(w);
            }
    }

    std::vector<StateId> new_id(pm.num_states(), -1);
    for (StateId v = 0; v < pm.num_states(); ++v) {
        if (in_c[v]) {
            out.sink_initial_mass += pm.initial(v);
        } else if (reaches[v]) {
            new_id[v] = static_cast<StateId>(out.kept.size());
            out.kept.push_back(v);
        } else {
            out.pruned.push_back(v);
            out.pruned_initial_mass += pm.initial(v);
        }
    }

    Mdp& m = out.mdp;
    const int n = static_cast<int>(out.kept.size()) + 1;
    out.sink_state = n - 1;
    m.action_names = pm.action_names;
    m.choices.resize(n);
    m.labels.resize(n);
    m.initial = Eigen::VectorXd::Zero(n);
    out.rewards.values.resize(n);

    for (StateId v : out.kept) {
        StateId nv = new_id[v];
        m.state_names.push_back(pm.state_names[v]);
        m.initial(nv) = pm.initial(v);
        for (int k = 0; k < pm.num_choices(v); ++k) {
            Choice ch;
            ch.action = pm.choices[v][k].action;
            double sink_mass = 0.0;
            for (const Outcome& o : pm.choices[v][k].outcomes) {
                // Accepting successors and value-0 successors both collapse
                // into the sink; only the accepting mass is rewarded.
                if (in_c[o.to] || !reaches[o.to])
                    sink_mass += o.prob;
                else
                    ch.outcomes.push_back({new_id[o.to], o.prob});
            }
            if (sink_mass > 0.0) ch.outcomes.push_back({out.sink_state, sink_mass});
            m.choices[nv].push_back(std::move(ch));
            out.rewards.values[nv].push_back(to_c[v][k]);
        }
    }

    m.state_names.push_back("sink");
    m.initial(out.sink_state) = out.sink_initial_mass + out.pruned_initial_mass;
    for (ActionId a = 0; a < static_cast<int>(m.action_names.size()); ++a) {
        m.choices[out.sink_state].push_back({a, {{out.sink_state, 1.0}}});
        out.rewards.values[out.sink_state].push_back(0.0);
    }
    return out;
}

RewardFn buchi_frequency_reward(const ProductMdp& p) {
    if (p.kind != DeterministicAutomaton::Kind::Buchi)
        throw std::invalid_argument("frequency reward needs a Buchi product");
    std::vector<bool> in_f(p.mdp.num_states(), false);
    for (StateId v : p.buchi_accepting) in_f[v] = true;
    return make_reward(p.mdp, [&](StateId v, ActionId a) {
        const Choice* ch = p.mdp.find_choice(v, a);
        double mass = 0.0;
        for (const Outcome& o : ch->outcomes)
            if (in_f[o.to]) mass += o.prob;
        return mass;
    });
}

} // namespace dmdp
