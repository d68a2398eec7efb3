#include "dmdp/block_lp.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "dmdp/oracles.hpp"

namespace dmdp {

long BlockLp::total_rows() const { return std::accumulate(block_rows.begin(), block_rows.end(), 0L); }
long BlockLp::total_cols() const { return std::accumulate(block_cols.begin(), block_cols.end(), 0L); }

long BlockLp::col_offset(int j) const {
    return std::accumulate(block_cols.begin(), block_cols.begin() + j, 0L);
}

long BlockLp::row_offset(int i) const {
    return std::accumulate(block_rows.begin(), block_rows.begin() + i, 0L);
}

namespace {

bool is_absorbing(const Mdp& mdp, StateId s) {
    for (const Choice& ch : mdp.choices[s]) {
        if (ch.outcomes.size() != 1) return false;
        if (ch.outcomes[0].to != s) return false;
    }
    return true;
}

BlockLp build_common(const Mdp& mdp, const Decomposition& d, const RewardFn& r, double gamma,
                     BlockLp::Mode mode, const Eigen::VectorXd& u0) {
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0,1]");
    const int n = mdp.num_states();
    if (static_cast<int>(d.block_of.size()) != n)
        throw std::invalid_argument("decomposition does not match the MDP");

    BlockLp lp;
    lp.mode = mode;
    lp.gamma = gamma;
    lp.has_normalization = mode == BlockLp::Mode::Average;

    // With gamma = 1 an absorbing state's balance row reads -inflow = u0(s):
    // it pins the occupation of everything entering it. Zero-reward absorbing
    // states act as drains of the flow system and are excluded instead; a
    // rewarded absorbing state makes the objective unbounded.
    std::vector<bool> dropped(n, false);
    if (mode == BlockLp::Mode::Discounted && gamma == 1.0) {
        for (StateId s = 0; s < n; ++s) {
            if (!is_absorbing(mdp, s)) continue;
            for (double rv : r.values[s])
                if (rv != 0.0)
                    throw std::invalid_argument("gamma=1 with rewarded absorbing state " + mdp.state_names[s]);
            dropped[s] = true;
            lp.drain_states.push_back(s);
            lp.drain_initial_mass += u0(s);
        }
    }

    // Kernel sets with drains removed; empty kernels are dropped. If K_0 ends
    // up empty and a single kernel remains, it is emitted as block 0.
    std::vector<std::vector<StateId>> sets(d.kernels.size() + 1);
    for (StateId s = 0; s < n; ++s)
        if (!dropped[s]) sets[d.block_of[s]].push_back(s);
    for (auto& set : sets) std::sort(set.begin(), set.end());

    std::vector<int> kernel_ids;
    kernel_ids.push_back(0);
    for (int i = 1; i < static_cast<int>(sets.size()); ++i)
        if (!sets[i].empty()) kernel_ids.push_back(i);
    if (sets[0].empty() && kernel_ids.size() == 2) kernel_ids.erase(kernel_ids.begin());

    const int nb = static_cast<int>(kernel_ids.size());
    lp.block_kernel = kernel_ids;
    lp.block_rows.resize(nb);
    lp.block_cols.resize(nb);
    lp.row_states.resize(nb);
    lp.col_pairs.resize(nb);

    std::vector<int> block_of_state(n, -1), row_in_block(n, -1), col_base(n, -1);
    for (int t = 0; t < nb; ++t) {
        const auto& set = sets[kernel_ids[t]];
        long cols = 0;
        for (int k = 0; k < static_cast<int>(set.size()); ++k) {
            StateId s = set[k];
            block_of_state[s] = t;
            row_in_block[s] = k;
            col_base[s] = static_cast<int>(cols);
            cols += mdp.num_choices(s);
            lp.row_states[t].push_back(s);
            for (int c = 0; c < mdp.num_choices(s); ++c) lp.col_pairs[t].emplace_back(s, c);
        }
        lp.block_rows[t] = static_cast<long>(set.size());
        lp.block_cols[t] = cols;
    }
    if (lp.has_normalization) lp.block_rows[0] += 1;

    // Costs and right-hand sides.
    for (int t = 0; t < nb; ++t) {
        Eigen::VectorXd c(lp.block_cols[t]);
        long idx = 0;
        for (auto [s, k] : lp.col_pairs[t]) c(idx++) = -r.values[s][k];
        lp.cost.push_back(std::move(c));

        Eigen::VectorXd b = Eigen::VectorXd::Zero(lp.block_rows[t]);
        if (mode == BlockLp::Mode::Discounted) {
            long row = 0;
            for (StateId s : lp.row_states[t]) b(row++) = u0(s);
        }
        lp.rhs.push_back(std::move(b));
    }
    if (lp.has_normalization) lp.rhs[0](lp.block_rows[0] - 1) = 1.0;

    // Triplets per on-pattern block.
    std::map<std::pair<int, int>, std::vector<Eigen::Triplet<double>>> trip;
    auto pattern_ok = [&](int i, int j) { return i == 0 || j == 0 || i == j; };
    auto add = [&](int i, int j, long row, long col, double v) {
        if (!pattern_ok(i, j))
            throw std::invalid_argument("decomposition does not match the MDP: coupling between kernels " +
                                        std::to_string(lp.block_kernel[i]) + " and " + std::to_string(lp.block_kernel[j]));
        trip[{i, j}].emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    };

    for (int t = 0; t < nb; ++t)
        for (StateId s : lp.row_states[t]) {
            long row = row_in_block[s];
            for (int k = 0; k < mdp.num_choices(s); ++k) add(t, t, row, col_base[s] + k, 1.0);
        }
    for (StateId from = 0; from < n; ++from) {
        if (dropped[from]) continue;
        int jb = block_of_state[from];
        for (int k = 0; k < mdp.num_choices(from); ++k)
            for (const Outcome& o : mdp.choices[from][k].outcomes) {
                if (dropped[o.to]) continue;
                add(block_of_state[o.to], jb, row_in_block[o.to], col_base[from] + k, -gamma * o.prob);
            }
    }
    if (lp.has_normalization) {
        long norm_row = lp.block_rows[0] - 1;
        for (int j = 0; j < nb; ++j)
            for (long col = 0; col < lp.block_cols[j]; ++col) trip[{0, j}].emplace_back(static_cast<int>(norm_row), static_cast<int>(col), 1.0);
    }

    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            if (!pattern_ok(i, j)) continue;
            if (lp.block_rows[i] == 0 || lp.block_cols[j] == 0) continue;
            Eigen::SparseMatrix<double> m(static_cast<int>(lp.block_rows[i]), static_cast<int>(lp.block_cols[j]));
            auto it = trip.find({i, j});
            if (it != trip.end()) m.setFromTriplets(it->second.begin(), it->second.end());
            m.makeCompressed();
            lp.blocks[{i, j}] = std::move(m);
        }
    return lp;
}

} // namespace

BlockLp build_discounted(const Mdp& mdp, const Decomposition& d, const RewardFn& r, double gamma,
                         const std::optional<Eigen::VectorXd>& u0_override) {
    Eigen::VectorXd u0 = u0_override.value_or(mdp.initial);
    if (u0.size() != mdp.num_states()) throw std::invalid_argument("initial distribution has wrong dimension");
    return build_common(mdp, d, r, gamma, BlockLp::Mode::Discounted, u0);
}

BlockLp build_average(const Mdp& mdp, const Decomposition& d, const RewardFn& r) {
    auto gate = ergodicity_gate(mdp);
    if (!gate.irreducible) {
        std::string msg = "ergodicity gate failed; disconnected states:";
        for (StateId s : gate.disconnected) msg += " " + mdp.state_names[s];
        throw std::invalid_argument(msg);
    }
    return build_common(mdp, d, r, 1.0, BlockLp::Mode::Average, Eigen::VectorXd::Zero(mdp.num_states()));
}

DenseLp assemble_dense(const BlockLp& lp, long max_cols) {
    if (lp.total_cols() > max_cols)
        throw std::invalid_argument("dense assembly of " + std::to_string(lp.total_cols()) +
                                    " columns exceeds the cap of " + std::to_string(max_cols));
    DenseLp out;
    out.a = Eigen::MatrixXd::Zero(lp.total_rows(), lp.total_cols());
    out.b = Eigen::VectorXd::Zero(lp.total_rows());
    out.c = Eigen::VectorXd::Zero(lp.total_cols());
    for (int i = 0; i < lp.num_blocks(); ++i) out.b.segment(lp.row_offset(i), lp.block_rows[i]) = lp.rhs[i];
    for (int j = 0; j < lp.num_blocks(); ++j) out.c.segment(lp.col_offset(j), lp.block_cols[j]) = lp.cost[j];
    for (const auto& [key, m] : lp.blocks) {
        auto [i, j] = key;
        out.a.block(lp.row_offset(i), lp.col_offset(j), m.rows(), m.cols()) = Eigen::MatrixXd(m);
    }
    return out;
}

ExtractedPolicy extract_policy(const BlockLp& lp, const Mdp& mdp, const Eigen::VectorXd& x, double floor) {
    if (x.size() != lp.total_cols()) throw std::invalid_argument("solution vector has wrong dimension");
    ExtractedPolicy out;
    out.policy.probs.resize(mdp.num_states());
    std::vector<std::vector<double>> mass(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) mass[s].assign(mdp.choices[s].size(), 0.0);

    long idx = 0;
    for (int j = 0; j < lp.num_blocks(); ++j)
        for (auto [s, k] : lp.col_pairs[j]) mass[s][k] = std::max(0.0, x(idx++));

    for (StateId s = 0; s < mdp.num_states(); ++s) {
        double total = std::accumulate(mass[s].begin(), mass[s].end(), 0.0);
        if (total <= floor) {
            out.policy.probs[s].assign(mdp.choices[s].size(), 1.0 / static_cast<double>(mdp.choices[s].size()));
            out.defaulted.push_back(s);
        } else {
            out.policy.probs[s].resize(mdp.choices[s].size());
            for (size_t k = 0; k < mass[s].size(); ++k) out.policy.probs[s][k] = mass[s][k] / total;
        }
    }
    return out;
}

double relative_infeasibility(const BlockLp& lp, const Eigen::VectorXd& x) {
    auto xs = split_columns(lp, x);
    double sq = 0.0, b1 = 0.0;
    for (int i = 0; i < lp.num_blocks(); ++i) {
        Eigen::VectorXd res = -lp.rhs[i];
        for (int j = 0; j < lp.num_blocks(); ++j) {
            auto it = lp.blocks.find({i, j});
            if (it != lp.blocks.end()) res += it->second * xs[j];
        }
        sq += res.squaredNorm();
        b1 += lp.rhs[i].lpNorm<1>();
    }
    return std::sqrt(sq) / (1.0 + b1);
}

double max_form_objective(const BlockLp& lp, const Eigen::VectorXd& x) {
    auto xs = split_columns(lp, x);
    double obj = 0.0;
    for (int j = 0; j < lp.num_blocks(); ++j) obj -= lp.cost[j].dot(xs[j]);
    return obj;
}

std::vector<Eigen::VectorXd> split_columns(const BlockLp& lp, const Eigen::VectorXd& x) {
    if (x.size() != lp.total_cols()) throw std::invalid_argument("vector has wrong dimension");
    std::vector<Eigen::VectorXd> xs;
    for (int j = 0; j < lp.num_blocks(); ++j) xs.push_back(x.segment(lp.col_offset(j), lp.block_cols[j]));
    return xs;
}

Eigen::VectorXd concat_columns(const BlockLp& lp, const std::vector<Eigen::VectorXd>& xs) {
    Eigen::VectorXd x(lp.total_cols());
    for (int j = 0; j < lp.num_blocks(); ++j) x.segment(lp.col_offset(j), lp.block_cols[j]) = xs[j];
    return x;
}

void export_block_lp(const BlockLp& lp, const Mdp& mdp, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);

    nlohmann::json manifest;
    manifest["mode"] = lp.mode == BlockLp::Mode::Discounted ? "discounted" : "average";
    manifest["gamma"] = lp.gamma;
    manifest["normalization_row"] = lp.has_normalization;
    manifest["rows"] = lp.block_rows;
    manifest["cols"] = lp.block_cols;
    for (int i = 0; i < lp.num_blocks(); ++i) {
        manifest["b"].push_back(std::vector<double>(lp.rhs[i].begin(), lp.rhs[i].end()));
        manifest["c"].push_back(std::vector<double>(lp.cost[i].begin(), lp.cost[i].end()));
        nlohmann::json cols = nlohmann::json::array(), rows = nlohmann::json::array();
        for (auto [s, c] : lp.col_pairs[i])
            cols.push_back("(" + mdp.state_names[s] + "," + mdp.action_names[mdp.choices[s][c].action] + ")");
        for (StateId s : lp.row_states[i]) rows.push_back(mdp.state_names[s]);
        manifest["columns"].push_back(cols);
        manifest["row_states"].push_back(rows);
    }

    manifest["blocks"] = nlohmann::json::array();
    for (const auto& [key, m] : lp.blocks) {
        auto [i, j] = key;
        std::string name = "block_" + std::to_string(i) + "_" + std::to_string(j) + ".txt";
        manifest["blocks"].push_back({{"i", i}, {"j", j}, {"file", name}});

        std::ofstream f(fs::path(directory) / name);
        f.precision(17);
        for (int col = 0; col < m.outerSize(); ++col)
            for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
                f << it.row() << " " << it.col() << " " << it.value() << "\n";
    }

    std::ofstream(fs::path(directory) / "manifest.json") << manifest.dump(2) << "\n";
}

} // namespace dmdp
