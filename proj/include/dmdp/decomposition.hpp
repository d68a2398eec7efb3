#pragma once

#include "dmdp/mdp.hpp"

#include <tuple>

namespace dmdp {

/// Disjoint nonempty regions S_1..S_N covering the state set.
struct Partition {
    std::vector<std::vector<StateId>> regions;
    int num_regions() const { return static_cast<int>(regions.size()); }
};

/// K_0 plus kernels K_1..K_N as cut out of a partition. Kernel i mirrors
/// region i and may be empty. block_of[s] is 0 for states in K_0 and i for
/// states in K_i; local_index[s] is the position of s within its set, i.e.
/// the index function iota (0-based).
struct Decomposition {
    std::vector<StateId> k0;
    std::vector<std::vector<StateId>> kernels;
    std::vector<int> block_of;
    std::vector<int> local_index;
    std::vector<long> pair_counts;  // m_0..m_N
    std::vector<long> state_counts; // n_0..n_N
    int num_kernels() const { return static_cast<int>(kernels.size()); }
};

/// Digraph with one labeled edge per positive transition entry.
struct InducedGraph {
    int num_nodes = 0;
    std::vector<std::tuple<StateId, ActionId, StateId>> edges;
};

/// States outside `region` reachable from it in one step.
std::vector<StateId> periphery(const Mdp& mdp, const std::vector<StateId>& region);

/// Throws std::invalid_argument listing overlapping/missing states if the
/// partition is not valid for the MDP.
void validate_partition(const Mdp& mdp, const Partition& pi);

Decomposition decompose(const Mdp& mdp, const Partition& pi);

/// Checks that every kernel state is entered only from K_0 or its own kernel.
struct Lemma1Report {
    bool ok = true;
    std::vector<std::tuple<StateId, ActionId, StateId>> counterexamples; // (from, action, to)
};
Lemma1Report verify_lemma1(const Mdp& mdp, const Decomposition& d);

InducedGraph induced_graph(const Mdp& mdp);

/// In/Out/boundary node sets per region, and their union b0.
struct BoundarySets {
    std::vector<std::vector<StateId>> in;
    std::vector<std::vector<StateId>> out;
    std::vector<std::vector<StateId>> boundary;
    std::vector<StateId> b0;
};
BoundarySets boundary_nodes(const InducedGraph& g, const Partition& pi);

/// True iff pi satisfies the r-division size bounds with constant c:
/// at most c*n/r regions, each with at most c*r nodes and c*sqrt(r) boundary
/// nodes, and at most c*n/sqrt(r) boundary nodes in total.
bool check_r_division_bounds(const Partition& pi, const InducedGraph& g, long r, double c);

} // namespace dmdp
