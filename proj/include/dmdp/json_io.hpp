#pragma once

#include "dmdp/admm.hpp"
#include "dmdp/automaton.hpp"
#include "dmdp/decomposition.hpp"
#include "dmdp/gridworld.hpp"
#include "dmdp/mdp.hpp"

#include <json.hpp>

#include <string>

namespace dmdp {

/// File formats. MDPs, partitions, automata and grid specs are JSON; solver
/// traces are CSV. Probabilities in MDP files may be doubles or decimal
/// strings; rows are renormalized when within 1e-9 of one and rejected beyond.

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& j, const std::string& path);

Mdp mdp_from_json(const nlohmann::json& j);
nlohmann::json mdp_to_json(const Mdp& mdp);
Mdp load_mdp(const std::string& path);
void save_mdp(const Mdp& mdp, const std::string& path);

/// Partition files map region ids to arrays of state ids; regions are ordered
/// by region id.
Partition partition_from_json(const nlohmann::json& j, const Mdp& mdp);
nlohmann::json partition_to_json(const Partition& pi, const Mdp& mdp);
Partition load_partition(const std::string& path, const Mdp& mdp);
void save_partition(const Partition& pi, const Mdp& mdp, const std::string& path);

nlohmann::json decomposition_to_json(const Decomposition& d, const Mdp& mdp);

DeterministicAutomaton automaton_from_json(const nlohmann::json& j);
nlohmann::json automaton_to_json(const DeterministicAutomaton& a);
DeterministicAutomaton load_automaton(const std::string& path);
void save_automaton(const DeterministicAutomaton& a, const std::string& path);

GridSpec grid_spec_from_json(const nlohmann::json& j);
nlohmann::json grid_spec_to_json(const GridSpec& spec);
GridSpec load_grid_spec(const std::string& path);
void save_grid_spec(const GridSpec& spec, const std::string& path);

/// Solution object: {"x": {"(state,action)": value}, objective,
/// infeasibility, iterations, converged}.
nlohmann::json solve_report_to_json(const SolveReport& rep, const BlockLp& lp, const Mdp& mdp);

/// CSV with header k,objective,infeasibility,primal_res,dual_res.
void save_trace_csv(const std::vector<TracePoint>& trace, const std::string& path);

} // namespace dmdp
