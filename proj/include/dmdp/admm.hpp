#pragma once

#include "dmdp/block_lp.hpp"

#include <Eigen/SparseCholesky>
#include <map>
#include <memory>
#include <vector>

namespace dmdp {

namespace detail {
class ThreadPool;
}

struct AdmmParams {
    double rho = 1000.0;   // penalty parameter
    double eps_rel = 1e-4; // relative tolerance
    double eps_abs = 1e-5; // absolute tolerance
    long max_iter = 50000;
    long trace_every = 50;
    int threads = 1;
};
void validate_params(const AdmmParams& p);

/// Scaled-form stopping quantities over all stacked block variables.
struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
    double eps_pri = 0.0;
    double eps_dual = 0.0;
    bool converged() const { return primal <= eps_pri && dual <= eps_dual; }
};

struct TracePoint {
    long k = 0;
    double objective = 0.0;
    double infeasibility = 0.0;
    double primal_res = 0.0;
    double dual_res = 0.0;
};

struct SolveReport {
    Eigen::VectorXd x; // stacked half-iterates (x_0^{k+1/2}, ..., x_N^{k+1/2})
    double objective = 0.0;
    double infeasibility = 0.0;
    long iterations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

/// proj onto the nonnegative orthant of the prox of c^T x: max(0, v - c/rho).
Eigen::VectorXd prox_cost_nonneg(const Eigen::VectorXd& v, const Eigen::VectorXd& c, double rho);

/// Euclidean projection onto {(u, {u_j}) : u = sum_j u_j}.
struct ExchangeResult {
    Eigen::VectorXd aggregate;
    std::vector<Eigen::VectorXd> parts;
};
ExchangeResult exchange(const Eigen::VectorXd& c, const std::vector<Eigen::VectorXd>& parts);

/// Elementwise mean of x_half and the copies from the blocks present in its column.
Eigen::VectorXd average(const Eigen::VectorXd& x_half, const std::vector<const Eigen::VectorXd*>& copies);

/// Euclidean projection onto the graph {(x, y) : y = Ax}, with the
/// factorization of (I + A^T A) built once and reused for every call.
class GraphProjector {
  public:
    explicit GraphProjector(const Eigen::SparseMatrix<double>& a);
    void project(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 Eigen::VectorXd& x_out, Eigen::VectorXd& y_out) const;

  private:
    Eigen::SparseMatrix<double> a_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// One-shot convenience over GraphProjector.
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_graph(const Eigen::SparseMatrix<double>& a,
                                                          const Eigen::VectorXd& x,
                                                          const Eigen::VectorXd& y);

using BlockKey = std::pair<int, int>;

/// All iterates of the block-splitting iteration. The full x_ij iterate
/// collapses onto x[j] after averaging and is not stored separately.
struct AdmmState {
    long k = 0;
    std::vector<Eigen::VectorXd> x, y;
    std::map<BlockKey, Eigen::VectorXd> y_ij;
    std::vector<Eigen::VectorXd> x_half, y_half;
    std::map<BlockKey, Eigen::VectorXd> x_ij_half, y_ij_half;
    std::vector<Eigen::VectorXd> x_dual, y_dual; // scaled duals
    std::map<BlockKey, Eigen::VectorXd> x_ij_dual;
    std::vector<Eigen::VectorXd> x_prev, y_prev;
    std::map<BlockKey, Eigen::VectorXd> y_ij_prev;
};

/// Block-splitting ADMM over a BlockLp. Per iteration: the y-prox pins the
/// right-hand sides, the x-prox applies the cost and nonnegativity, every
/// present block projects onto its graph, columns are averaged, rows are
/// exchanged (row 0 over all column blocks, row i over blocks (i,0) and
/// (i,i)), and the three scaled duals are updated. All variables start at 0.
///
/// Graph projections and proxes within one iteration run in parallel when
/// params.threads > 1; each writes only its own block, and every reduction
/// runs serially in a fixed order, so traces are reproducible.
class BlockSplittingSolver {
  public:
    BlockSplittingSolver(const BlockLp& lp, const AdmmParams& params);
    ~BlockSplittingSolver();

    void step();
    /// Stopping quantities at the current iterate; requires k >= 1.
    Residuals residuals() const;
    const AdmmState& state() const { return state_; }
    Eigen::VectorXd solution() const; // stacked x_half
    double objective() const;
    double infeasibility() const;
    /// Iterates until the stopping criterion or max_iter; never throws on
    /// non-convergence (reported through the converged flag).
    SolveReport run();

  private:
    const BlockLp* lp_;
    AdmmParams params_;
    std::vector<BlockKey> keys_;
    std::map<BlockKey, GraphProjector> projectors_;
    std::vector<std::vector<int>> row_members_; // key indices per block row
    std::vector<std::vector<int>> col_members_; // key indices per block column
    AdmmState state_;
    std::unique_ptr<detail::ThreadPool> pool_;
};

SolveReport solve(const BlockLp& lp, const AdmmParams& params);

} // namespace dmdp
