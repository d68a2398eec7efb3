#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

namespace dmdp {

using StateId = int;
using ActionId = int;

/// One weighted successor of a state-action pair.
struct Outcome {
    StateId to = 0;
    double prob = 0.0;
};

/// An enabled action at a state together with its successor distribution.
struct Choice {
    ActionId action = 0;
    std::vector<Outcome> outcomes;
};

/// Finite MDP with sparse per-state action storage. Actions whose successor
/// row is all zero are rejected when a model is built, so the choices stored
/// at a state are exactly its enabled actions.
struct Mdp {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    Eigen::VectorXd initial;                   // u0, one entry per state
    std::vector<std::vector<Choice>> choices;  // per state, sorted by action id
    std::vector<std::set<std::string>> labels; // per state; unused if has_labels is false
    std::vector<std::string> ap;               // atomic proposition universe
    bool has_labels = false;

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_choices(StateId s) const { return static_cast<int>(choices[s].size()); }

    /// Index of action a within choices[s], or -1 if a is not enabled at s.
    int choice_index(StateId s, ActionId a) const;
    const Choice* find_choice(StateId s, ActionId a) const;
};

/// Memoryless stochastic policy; probs[s][k] refers to choices[s][k].
struct Policy {
    std::vector<std::vector<double>> probs;
};

/// Reward defined for exactly the enabled state-action pairs;
/// values[s][k] refers to choices[s][k].
struct RewardFn {
    std::vector<std::vector<double>> values;
};

/// Result of a dynamic-programming solve.
struct ValueResult {
    Eigen::VectorXd per_state;
    double scalar = 0.0;
    Policy policy;
    long iterations = 0;
    double residual = 0.0;
};

/// A failed model invariant; diagnostics are returned, not thrown.
struct Violation {
    std::string subject; // e.g. "(s1,b)" or "initial"
    std::string rule;
    std::string str() const { return subject + ": " + rule; }
};

struct TransitionTriplet {
    StateId from = 0;
    ActionId action = 0;
    StateId to = 0;
    double prob = 0.0;
};

/// Assembles an Mdp from triplets. Rows are renormalized when they are within
/// 1e-9 of summing to one; anything further off, duplicate triplets, negative
/// probabilities or all-zero action rows throw std::invalid_argument.
Mdp build_mdp(std::vector<std::string> state_names, std::vector<std::string> action_names,
              const std::vector<std::pair<StateId, double>>& initial,
              const std::vector<TransitionTriplet>& transitions);

/// Checks every Mdp invariant; empty result means the model is valid.
std::vector<Violation> validate(const Mdp& mdp);

/// Actions with a positive-probability successor from s. Throws on unknown s.
std::vector<ActionId> enabled_actions(const Mdp& mdp, StateId s);

/// Number of state-action pairs |{(s,a) : a enabled at s}|, the LP variable count.
long count_state_action_pairs(const Mdp& mdp);

/// Markov chain induced by a policy: row-stochastic P^f and reward vector R^f.
struct InducedChain {
    Eigen::MatrixXd transition;
    Eigen::VectorXd reward;
};
InducedChain induce_chain(const Mdp& mdp, const Policy& f, const RewardFn& r);

std::vector<Violation> validate_policy(const Mdp& mdp, const Policy& f);

/// Builds a reward function over the enabled pairs from a callback.
template <typename F> RewardFn make_reward(const Mdp& mdp, F&& fn) {
    RewardFn r;
    r.values.resize(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        r.values[s].reserve(mdp.choices[s].size());
        for (const Choice& ch : mdp.choices[s]) r.values[s].push_back(fn(s, ch.action));
    }
    return r;
}

RewardFn constant_reward(const Mdp& mdp, double value);

/// Uniform policy over the enabled actions of every state.
Policy uniform_policy(const Mdp& mdp);

} // namespace dmdp
