#include "dmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dmdp {

namespace {
constexpr double kProbTol = 1e-9;

std::string pair_name(const Mdp& mdp, StateId s, ActionId a) {
    return "(" + mdp.state_names[s] + "," + mdp.action_names[a] + ")";
}
} // namespace

int Mdp::choice_index(StateId s, ActionId a) const {
    const auto& row = choices[s];
    for (int k = 0; k < static_cast<int>(row.size()); ++k)
        if (row[k].action == a) return k;
    return -1;
}

const Choice* Mdp::find_choice(StateId s, ActionId a) const {
    int k = choice_index(s, a);
    return k < 0 ? nullptr : &choices[s][k];
}

Mdp build_mdp(std::vector<std::string> state_names, std::vector<std::string> action_names,
              const std::vector<std::pair<StateId, double>>& initial,
              const std::vector<TransitionTriplet>& transitions) {
    const int n = static_cast<int>(state_names.size());
    const int na = static_cast<int>(action_names.size());

    Mdp mdp;
    mdp.state_names = std::move(state_names);
    mdp.action_names = std::move(action_names);
    mdp.initial = Eigen::VectorXd::Zero(n);
    mdp.choices.resize(n);
    mdp.labels.resize(n);

    for (const auto& [s, p] : initial) {
        if (s < 0 || s >= n) throw std::invalid_argument("initial distribution names unknown state index " + std::to_string(s));
        mdp.initial(s) += p;
    }
    double isum = mdp.initial.sum();
    if (std::abs(isum - 1.0) > kProbTol)
        throw std::invalid_argument("initial distribution sums to " + std::to_string(isum) + ", expected 1");
    mdp.initial /= isum;

    // Accumulate rows; duplicate (from,action,to) triplets are user errors.
    std::map<std::pair<StateId, ActionId>, std::map<StateId, double>> rows;
    for (const auto& t : transitions) {
        if (t.from < 0 || t.from >= n || t.to < 0 || t.to >= n)
            throw std::invalid_argument("transition references unknown state index");
        if (t.action < 0 || t.action >= na)
            throw std::invalid_argument("transition references unknown action index " + std::to_string(t.action));
        if (t.prob < 0.0)
            throw std::invalid_argument("negative transition probability at (" + mdp.state_names[t.from] + "," + mdp.action_names[t.action] + ")");
        auto& row = rows[{t.from, t.action}];
        if (!row.emplace(t.to, t.prob).second)
            throw std::invalid_argument("duplicate transition (" + mdp.state_names[t.from] + "," + mdp.action_names[t.action] + "," + mdp.state_names[t.to] + ")");
    }

    for (auto& [key, row] : rows) {
        auto [s, a] = key;
        double sum = 0.0;
        for (auto& [to, p] : row) sum += p;
        if (sum <= 0.0)
            throw std::invalid_argument("action row " + pair_name(mdp, s, a) + " is all zero; omit disabled actions instead");
        if (std::abs(sum - 1.0) > kProbTol)
            throw std::invalid_argument("transition probabilities for " + pair_name(mdp, s, a) + " sum to " + std::to_string(sum));
        Choice ch;
        ch.action = a;
        for (auto& [to, p] : row)
            if (p > 0.0) ch.outcomes.push_back({to, p / sum});
        mdp.choices[s].push_back(std::move(ch));
    }
    for (auto& row : mdp.choices)
        std::sort(row.begin(), row.end(), [](const Choice& l, const Choice& r) { return l.action < r.action; });

    for (StateId s = 0; s < n; ++s)
        if (mdp.choices[s].empty())
            throw std::invalid_argument("state " + mdp.state_names[s] + " has no enabled action");
    return mdp;
}

std::vector<Violation> validate(const Mdp& mdp) {
    std::vector<Violation> out;
    const int n = mdp.num_states();

    if (mdp.initial.size() != n) {
        out.push_back({"initial", "distribution has wrong dimension"});
    } else {
        double sum = mdp.initial.sum();
        if (std::abs(sum - 1.0) > kProbTol)
            out.push_back({"initial", "sums to " + std::to_string(sum) + ", expected 1"});
        for (int s = 0; s < n; ++s)
            if (mdp.initial(s) < 0.0 || mdp.initial(s) > 1.0 + kProbTol)
                out.push_back({"initial", "probability of " + mdp.state_names[s] + " outside [0,1]"});
    }

    for (StateId s = 0; s < n; ++s) {
        if (mdp.choices[s].empty()) {
            out.push_back({mdp.state_names[s], "no enabled action"});
            continue;
        }
        for (const Choice& ch : mdp.choices[s]) {
            if (ch.outcomes.empty()) {
                out.push_back({pair_name(mdp, s, ch.action), "all-zero successor row"});
                continue;
            }
            double sum = 0.0;
            for (const Outcome& o : ch.outcomes) {
                sum += o.prob;
                if (o.prob < 0.0 || o.prob > 1.0 + kProbTol)
                    out.push_back({pair_name(mdp, s, ch.action), "probability to " + mdp.state_names[o.to] + " outside [0,1]"});
                if (o.to < 0 || o.to >= n)
                    out.push_back({pair_name(mdp, s, ch.action), "successor index out of range"});
            }
            if (std::abs(sum - 1.0) > kProbTol)
                out.push_back({pair_name(mdp, s, ch.action), "successor probabilities sum to " + std::to_string(sum)});
        }
    }

    if (mdp.has_labels) {
        std::set<std::string> universe(mdp.ap.begin(), mdp.ap.end());
        for (StateId s = 0; s < n; ++s)
            for (const auto& p : mdp.labels[s])
                if (!universe.count(p))
                    out.push_back({mdp.state_names[s], "label \"" + p + "\" not in the declared proposition set"});
    }
    return out;
}

std::vector<ActionId> enabled_actions(const Mdp& mdp, StateId s) {
    if (s < 0 || s >= mdp.num_states())
        throw std::out_of_range("unknown state index " + std::to_string(s));
    std::vector<ActionId> acts;
    acts.reserve(mdp.choices[s].size());
    for (const Choice& ch : mdp.choices[s]) acts.push_back(ch.action);
    return acts;
}

long count_state_action_pairs(const Mdp& mdp) {
    long m = 0;
    for (const auto& row : mdp.choices) m += static_cast<long>(row.size());
    return m;
}

InducedChain induce_chain(const Mdp& mdp, const Policy& f, const RewardFn& r) {
    const int n = mdp.num_states();
    InducedChain chain;
    chain.transition = Eigen::MatrixXd::Zero(n, n);
    chain.reward = Eigen::VectorXd::Zero(n);
    for (StateId s = 0; s < n; ++s) {
        for (int k = 0; k < mdp.num_choices(s); ++k) {
            double w = f.probs[s][k];
            if (w == 0.0) continue;
            chain.reward(s) += w * r.values[s][k];
            for (const Outcome& o : mdp.choices[s][k].outcomes)
                chain.transition(s, o.to) += w * o.prob;
        }
    }
    return chain;
}

std::vector<Violation> validate_policy(const Mdp& mdp, const Policy& f) {
    std::vector<Violation> out;
    if (f.probs.size() != static_cast<size_t>(mdp.num_states())) {
        out.push_back({"policy", "wrong number of states"});
        return out;
    }
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (f.probs[s].size() != mdp.choices[s].size()) {
            out.push_back({mdp.state_names[s], "policy row does not match enabled actions"});
            continue;
        }
        double sum = 0.0;
        for (double p : f.probs[s]) {
            sum += p;
            if (p < -kProbTol) out.push_back({mdp.state_names[s], "negative action probability"});
        }
        if (std::abs(sum - 1.0) > kProbTol)
            out.push_back({mdp.state_names[s], "action probabilities sum to " + std::to_string(sum)});
    }
    return out;
}

RewardFn constant_reward(const Mdp& mdp, double value) {
    return make_reward(mdp, [value](StateId, ActionId) { return value; });
}

Policy uniform_policy(const Mdp& mdp) {
    Policy f;
    f.probs.resize(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s)
        f.probs[s].assign(mdp.choices[s].size(), 1.0 / static_cast<double>(mdp.choices[s].size()));
    return f;
}

} // namespace dmdp
