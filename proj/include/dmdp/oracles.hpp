#pragma once

#include "dmdp/mdp.hpp"

namespace dmdp {

/// Dynamic-programming solvers used to cross-check the distributed pipeline.
/// All of them are pure functions over immutable inputs.

constexpr long kOracleIterationCap = 100000;

/// Optimal discounted value via value iteration. Requires gamma < 1, or
/// gamma == 1 on models where every policy eventually drains into an
/// absorbing zero-reward state (the caller asserts this, see sinkify()).
/// per_state is within tol of the optimum; scalar is the value at u0.
/// Throws on non-convergence within the iteration cap.
ValueResult value_iteration_discounted(const Mdp& mdp, const RewardFn& r, double gamma, double tol);

/// Optimal gain of an ergodic MDP via relative value iteration on the
/// aperiodicity-transformed model, refined by evaluating the greedy policy
/// exactly. scalar and every per_state entry hold the gain.
/// Throws if the uniform-policy chain is not irreducible or on non-convergence.
ValueResult average_reward_optimal(const Mdp& mdp, const RewardFn& r, double tol);

/// Maximal probability of reaching `target`, by value iteration on the
/// Bellman reachability operator. Uses no reward function by construction.
ValueResult reachability_max(const Mdp& mdp, const std::vector<StateId>& target, double tol);

/// Exact discounted value of a fixed policy, solving (I - gamma P^f) v = R^f.
Eigen::VectorXd evaluate_policy_discounted(const Mdp& mdp, const RewardFn& r, const Policy& f, double gamma);

/// Stationary distribution of an irreducible row-stochastic matrix.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Exact gain of a fixed policy on an ergodic model: pi^T R^f with pi the
/// stationary distribution of the induced chain.
double average_reward_of_policy(const Mdp& mdp, const RewardFn& r, const Policy& f);

/// Necessary-condition ergodicity check: irreducibility of the uniform-policy
/// chain. A pass does not certify ergodicity under every policy; a failure
/// disproves it and names states cut off from state 0's communicating class.
struct ErgodicityReport {
    bool irreducible = false;
    std::vector<StateId> disconnected;
};
ErgodicityReport ergodicity_gate(const Mdp& mdp);

} // namespace dmdp
