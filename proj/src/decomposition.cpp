#include "dmdp/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dmdp {

std::vector<StateId> periphery(const Mdp& mdp, const std::vector<StateId>& region) {
    const int n = mdp.num_states();
    std::vector<bool> inside(n, false);
    for (StateId s : region) {
        if (s < 0 || s >= n) throw std::invalid_argument("region contains unknown state index " + std::to_string(s));
        inside[s] = true;
    }
    std::set<StateId> out;
    for (StateId s : region)
        for (const Choice& ch : mdp.choices[s])
            for (const Outcome& o : ch.outcomes)
                if (!inside[o.to]) out.insert(o.to);
    return {out.begin(), out.end()};
}

void validate_partition(const Mdp& mdp, const Partition& pi) {
    const int n = mdp.num_states();
    std::vector<int> owner(n, -1);
    std::string overlaps, missing;
    for (int i = 0; i < pi.num_regions(); ++i) {
        if (pi.regions[i].empty()) throw std::invalid_argument("partition contains an empty region");
        for (StateId s : pi.regions[i]) {
            if (s < 0 || s >= n) throw std::invalid_argument("partition names unknown state index " + std::to_string(s));
            if (owner[s] >= 0) overlaps += " " + mdp.state_names[s];
            owner[s] = i;
        }
    }
    for (StateId s = 0; s < n; ++s)
        if (owner[s] < 0) missing += " " + mdp.state_names[s];
    if (!overlaps.empty() || !missing.empty()) {
        std::string msg = "invalid partition;";
        if (!overlaps.empty()) msg += " states in several regions:" + overlaps + ";";
        if (!missing.empty()) msg += " states in no region:" + missing;
        throw std::invalid_argument(msg);
    }
}

Decomposition decompose(const Mdp& mdp, const Partition& pi) {
    validate_partition(mdp, pi);
    const int n = mdp.num_states();
    const int nr = pi.num_regions();

    std::vector<bool> in_k0(n, false);
    for (int i = 0; i < nr; ++i)
        for (StateId s : periphery(mdp, pi.regions[i])) in_k0[s] = true;

    Decomposition d;
    d.block_of.assign(n, 0);
    d.local_index.assign(n, 0);
    d.kernels.resize(nr);
    for (StateId s = 0; s < n; ++s)
        if (in_k0[s]) d.k0.push_back(s);
    for (int i = 0; i < nr; ++i) {
        std::vector<StateId> kernel;
        for (StateId s : pi.regions[i])
            if (!in_k0[s]) kernel.push_back(s);
        std::sort(kernel.begin(), kernel.end());
        d.kernels[i] = std::move(kernel);
    }

    auto index_set = [&](const std::vector<StateId>& set, int block) {
        for (int k = 0; k < static_cast<int>(set.size()); ++k) {
            d.block_of[set[k]] = block;
            d.local_index[set[k]] = k;
        }
    };
    index_set(d.k0, 0);
    for (int i = 0; i < nr; ++i) index_set(d.kernels[i], i + 1);

    auto counts = [&](const std::vector<StateId>& set) {
        long m = 0;
        for (StateId s : set) m += mdp.num_choices(s);
        return m;
    };
    d.pair_counts.push_back(counts(d.k0));
    d.state_counts.push_back(static_cast<long>(d.k0.size()));
    for (int i = 0; i < nr; ++i) {
        d.pair_counts.push_back(counts(d.kernels[i]));
        d.state_counts.push_back(static_cast<long>(d.kernels[i].size()));
    }
    return d;
}

Lemma1Report verify_lemma1(const Mdp& mdp, const Decomposition& d) {
    Lemma1Report rep;
    for (StateId from = 0; from < mdp.num_states(); ++from)
        for (const Choice& ch : mdp.choices[from])
            for (const Outcome& o : ch.outcomes) {
                int target_block = d.block_of[o.to];
                if (target_block == 0) continue;
                if (d.block_of[from] != 0 && d.block_of[from] != target_block) {
                    rep.ok = false;
                    rep.counterexamples.emplace_back(from, ch.action, o.to);
                }
            }
    return rep;
}

InducedGraph induced_graph(const Mdp& mdp) {
    InducedGraph g;
    g.num_nodes = mdp.num_states();
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (const Choice& ch : mdp.choices[s])
            for (const Outcome& o : ch.outcomes) g.edges.emplace_back(s, ch.action, o.to);
    return g;
}

BoundarySets boundary_nodes(const InducedGraph& g, const Partition& pi) {
    const int nr = pi.num_regions();
    std::vector<int> region_of(g.num_nodes, -1);
    for (int i = 0; i < nr; ++i)
        for (StateId s : pi.regions[i]) region_of[s] = i;

    std::vector<std::set<StateId>> in(nr), out(nr);
    for (const auto& [from, action, to] : g.edges) {
        (void)action;
        int rf = region_of[from], rt = region_of[to];
        if (rf == rt) continue;
        out[rf].insert(from);
        in[rt].insert(to);
    }

    BoundarySets b;
    b.in.resize(nr);
    b.out.resize(nr);
    b.boundary.resize(nr);
    std::set<StateId> b0;
    for (int i = 0; i < nr; ++i) {
        b.in[i] = {in[i].begin(), in[i].end()};
        b.out[i] = {out[i].begin(), out[i].end()};
        std::set<StateId> both(in[i].begin(), in[i].end());
        both.insert(out[i].begin(), out[i].end());
        b.boundary[i] = {both.begin(), both.end()};
        b0.insert(both.begin(), both.end());
    }
    b.b0 = {b0.begin(), b0.end()};
    return b;
}

bool check_r_division_bounds(const Partition& pi, const InducedGraph& g, long r, double c) {
    const double n = static_cast<double>(g.num_nodes);
    const double rd = static_cast<double>(r);
    if (static_cast<double>(pi.num_regions()) > c * n / rd) return false;
    BoundarySets b = boundary_nodes(g, pi);
    for (int i = 0; i < pi.num_regions(); ++i) {
        if (static_cast<double>(pi.regions[i].size()) > c * rd) return false;
        if (static_cast<double>(b.boundary[i].size()) > c * std::sqrt(rd)) return false;
    }
    return static_cast<double>(b.b0.size()) <= c * n / std::sqrt(rd);
}

} // namespace dmdp
