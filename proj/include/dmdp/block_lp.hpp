#pragma once

#include "dmdp/decomposition.hpp"
#include "dmdp/mdp.hpp"

#include <Eigen/SparseCore>
#include <map>
#include <optional>

namespace dmdp {

/// Occupation-measure LP in arrow-shaped block form: block row 0 couples all
/// column blocks, block row i >= 1 only touches column blocks 0 and i. The
/// minimization costs are the negated rewards.
///
/// Blocks are stored whenever they are on the arrow pattern and both of their
/// dimensions are positive, even if numerically zero. Kernels that end up
/// empty are dropped and the remaining blocks renumbered; block_kernel maps a
/// block back to its decomposition set (0 = K_0). When K_0 is empty and a
/// single kernel remains, that kernel is emitted as block 0.
struct BlockLp {
    enum class Mode { Discounted, Average };

    Mode mode = Mode::Discounted;
    double gamma = 1.0;
    std::vector<long> block_rows; // per block row; row 0 includes the normalization row in average mode
    std::vector<long> block_cols; // m_j per block column
    std::map<std::pair<int, int>, Eigen::SparseMatrix<double>> blocks;
    std::vector<Eigen::VectorXd> rhs;  // b_i
    std::vector<Eigen::VectorXd> cost; // c_j
    std::vector<std::vector<std::pair<StateId, int>>> col_pairs; // per block: (state, choice index) per column
    std::vector<std::vector<StateId>> row_states;                // per block: state per balance row
    std::vector<int> block_kernel;
    bool has_normalization = false;

    // gamma == 1 only: zero-reward absorbing states excluded from the flow system.
    std::vector<StateId> drain_states;
    double drain_initial_mass = 0.0;

    int num_blocks() const { return static_cast<int>(block_cols.size()); }
    bool present(int i, int j) const { return blocks.count({i, j}) > 0; }
    long total_rows() const;
    long total_cols() const;
    long col_offset(int j) const;
    long row_offset(int i) const;
};

/// Block LP for the discounted objective. Requires 0 < gamma <= 1; with
/// gamma == 1, zero-reward absorbing states are excluded from the system (its
/// balance row would otherwise force the inflow to be zero) and recorded in
/// drain_states. Absorbing states with nonzero reward make gamma == 1
/// unbounded and throw.
BlockLp build_discounted(const Mdp& mdp, const Decomposition& d, const RewardFn& r, double gamma,
                         const std::optional<Eigen::VectorXd>& u0_override = std::nullopt);

/// Block LP for the average-reward objective: gamma = 1, zero right-hand side
/// and a normalization row appended to block row 0 so the arrow pattern is
/// preserved. Throws if the ergodicity gate fails.
BlockLp build_average(const Mdp& mdp, const Decomposition& d, const RewardFn& r);

/// Dense materialization, for tests and oracle cross-checks only.
struct DenseLp {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};
DenseLp assemble_dense(const BlockLp& lp, long max_cols = 20000);

/// Per-state normalization of an occupation-measure vector into a policy.
/// States whose occupation mass is at most `floor` (and states outside the
/// LP, such as drains) receive the uniform distribution and are reported.
struct ExtractedPolicy {
    Policy policy;
    std::vector<StateId> defaulted;
};
ExtractedPolicy extract_policy(const BlockLp& lp, const Mdp& mdp, const Eigen::VectorXd& x,
                               double floor = 1e-9);

/// ||Ax - b||_2 / (1 + ||b||_1) evaluated blockwise.
double relative_infeasibility(const BlockLp& lp, const Eigen::VectorXd& x);

/// Objective of the original maximization problem at x, i.e. -sum_j c_j^T x_j.
double max_form_objective(const BlockLp& lp, const Eigen::VectorXd& x);

std::vector<Eigen::VectorXd> split_columns(const BlockLp& lp, const Eigen::VectorXd& x);
Eigen::VectorXd concat_columns(const BlockLp& lp, const std::vector<Eigen::VectorXd>& xs);

/// Writes one triplet file per present block plus a JSON manifest with the
/// mode, sizes, costs, right-hand sides and index maps.
void export_block_lp(const BlockLp& lp, const Mdp& mdp, const std::string& directory);

} // namespace dmdp
