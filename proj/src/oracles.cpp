#include "dmdp/oracles.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmdp {

namespace {

// One Bellman sweep; returns the greedy policy choice per state when asked.
Eigen::VectorXd bellman_sweep(const Mdp& mdp, const RewardFn& r, double gamma,
                              const Eigen::VectorXd& v, std::vector<int>* greedy) {
    const int n = mdp.num_states();
    Eigen::VectorXd next(n);
    for (StateId s = 0; s < n; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (int k = 0; k < mdp.num_choices(s); ++k) {
            double q = r.values[s][k];
            for (const Outcome& o : mdp.choices[s][k].outcomes) q += gamma * o.prob * v(o.to);
            if (q > best) { // ties break toward the lowest action index
                best = q;
                best_k = k;
            }
        }
        next(s) = best;
        if (greedy) (*greedy)[s] = best_k;
    }
    return next;
}

Policy deterministic_policy(const Mdp& mdp, const std::vector<int>& greedy) {
    Policy f;
    f.probs.resize(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        f.probs[s].assign(mdp.choices[s].size(), 0.0);
        f.probs[s][greedy[s]] = 1.0;
    }
    return f;
}

std::vector<std::vector<StateId>> uniform_support_graph(const Mdp& mdp, bool reversed) {
    std::vector<std::vector<StateId>> adj(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (const Choice& ch : mdp.choices[s])
            for (const Outcome& o : ch.outcomes) {
                if (reversed)
                    adj[o.to].push_back(s);
                else
                    adj[s].push_back(o.to);
            }
    return adj;
}

std::vector<bool> reachable_from(const std::vector<std::vector<StateId>>& adj, StateId start) {
    std::vector<bool> seen(adj.size(), false);
    std::vector<StateId> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        for (StateId t : adj[s])
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
    }
    return seen;
}

} // namespace

ValueResult value_iteration_discounted(const Mdp& mdp, const RewardFn& r, double gamma, double tol) {
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0,1]");
    const int n = mdp.num_states();
    // For gamma < 1 the contraction bound ||v_k - v*|| <= gamma/(1-gamma) * change
    // turns a sweep residual into an error guarantee.
    const double stop = gamma < 1.0 ? tol * (1.0 - gamma) / gamma : tol;

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    std::vector<int> greedy(n, 0);
    double change = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < kOracleIterationCap; ++it) {
        Eigen::VectorXd next = bellman_sweep(mdp, r, gamma, v, &greedy);
        change = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        if (change <= stop) break;
    }
    if (change > stop)
        throw std::runtime_error("value iteration did not converge; last residual " + std::to_string(change));

    ValueResult res;
    res.per_state = v;
    res.scalar = v.dot(mdp.initial);
    res.policy = deterministic_policy(mdp, greedy);
    res.iterations = it + 1;
    res.residual = change;
    return res;
}

ValueResult average_reward_optimal(const Mdp& mdp, const RewardFn& r, double tol) {
    auto gate = ergodicity_gate(mdp);
    if (!gate.irreducible) {
        std::string msg = "uniform-policy chain is not irreducible; disconnected states:";
        for (StateId s : gate.disconnected) msg += " " + mdp.state_names[s];
        throw std::runtime_error(msg);
    }

    // Relative value iteration on the aperiodicity transform
    // P_tau = tau*I + (1-tau)*P, which preserves stationary distributions and
    // therefore the gain of every policy.
    const int n = mdp.num_states();
    const double tau = 0.1;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    std::vector<int> greedy(n, 0);
    double span = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < kOracleIterationCap; ++it) {
        Eigen::VectorXd tv(n);
        for (StateId s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            int best_k = 0;
            for (int k = 0; k < mdp.num_choices(s); ++k) {
                double q = r.values[s][k] + tau * v(s);
                for (const Outcome& o : mdp.choices[s][k].outcomes) q += (1.0 - tau) * o.prob * v(o.to);
                if (q > best) {
                    best = q;
                    best_k = k;
                }
            }
            tv(s) = best;
            greedy[s] = best_k;
        }
        Eigen::VectorXd diff = tv - v;
        span = diff.maxCoeff() - diff.minCoeff();
        v = tv.array() - tv(0); // keep iterates bounded
        if (span <= tol) break;
    }
    if (span > tol)
        throw std::runtime_error("relative value iteration did not converge; last span " + std::to_string(span));

    ValueResult res;
    res.policy = deterministic_policy(mdp, greedy);
    res.scalar = average_reward_of_policy(mdp, r, res.policy);
    res.per_state = Eigen::VectorXd::Constant(n, res.scalar);
    res.iterations = it + 1;
    res.residual = span;
    return res;
}

ValueResult reachability_max(const Mdp& mdp, const std::vector<StateId>& target, double tol) {
    if (target.empty()) throw std::invalid_argument("target set is empty");
    const int n = mdp.num_states();
    std::vector<bool> in_target(n, false);
    for (StateId s : target) {
        if (s < 0 || s >= n) throw std::out_of_range("target state index out of range");
        in_target[s] = true;
    }

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (StateId s = 0; s < n; ++s)
        if (in_target[s]) v(s) = 1.0;
    std::vector<int> greedy(n, 0);
    double change = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < kOracleIterationCap; ++it) {
        Eigen::VectorXd next(n);
        for (StateId s = 0; s < n; ++s) {
            if (in_target[s]) {
                next(s) = 1.0;
                continue;
            }
            double best = 0.0;
            int best_k = 0;
            bool first = true;
            for (int k = 0; k < mdp.num_choices(s); ++k) {
                double q = 0.0;
                for (const Outcome& o : mdp.choices[s][k].outcomes) q += o.prob * v(o.to);
                if (first || q > best) {
                    best = q;
                    best_k = k;
                    first = false;
                }
            }
            next(s) = std::min(1.0, best);
            greedy[s] = best_k;
        }
        change = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        if (change <= tol) break;
    }

    ValueResult res;
    res.per_state = v;
    res.scalar = v.dot(mdp.initial);
    res.policy = deterministic_policy(mdp, greedy);
    res.iterations = it + 1;
    res.residual = change;
    return res;
}

Eigen::VectorXd evaluate_policy_discounted(const Mdp& mdp, const RewardFn& r, const Policy& f, double gamma) {
    InducedChain chain = induce_chain(mdp, f, r);
    const int n = mdp.num_states();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - gamma * chain.transition;
    return m.partialPivLu().solve(chain.reward);
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
    const int n = static_cast<int>(transition.rows());
    // pi^T (P - I) = 0 with the last balance row replaced by normalization.
    Eigen::MatrixXd m = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
    m.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = m.partialPivLu().solve(rhs);
    return pi;
}

double average_reward_of_policy(const Mdp& mdp, const RewardFn& r, const Policy& f) {
    InducedChain chain = induce_chain(mdp, f, r);
    Eigen::VectorXd pi = stationary_distribution(chain.transition);
    return pi.dot(chain.reward);
}

ErgodicityReport ergodicity_gate(const Mdp& mdp) {
    ErgodicityReport rep;
    auto fwd = reachable_from(uniform_support_graph(mdp, false), 0);
    auto bwd = reachable_from(uniform_support_graph(mdp, true), 0);
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (!fwd[s] || !bwd[s]) rep.disconnected.push_back(s);
    rep.irreducible = rep.disconnected.empty();
    return rep;
}

} // namespace dmdp
