#include "dmdp/admm.hpp"

#include <cmath>
#include <stdexcept>

#include "thread_pool.hpp"

namespace dmdp {

void validate_params(const AdmmParams& p) {
    if (p.rho <= 0.0) throw std::invalid_argument("rho must be positive");
    if (p.eps_rel <= 0.0 || p.eps_abs <= 0.0) throw std::invalid_argument("tolerances must be positive");
    if (p.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    if (p.trace_every < 1) throw std::invalid_argument("trace_every must be at least 1");
    if (p.threads < 1) throw std::invalid_argument("threads must be at least 1");
}

Eigen::VectorXd prox_cost_nonneg(const Eigen::VectorXd& v, const Eigen::VectorXd& c, double rho) {
    if (v.size() != c.size()) throw std::invalid_argument("prox dimensions do not match");
    return (v - c / rho).cwiseMax(0.0);
}

ExchangeResult exchange(const Eigen::VectorXd& c, const std::vector<Eigen::VectorXd>& parts) {
    if (parts.empty()) throw std::invalid_argument("exchange needs at least one part");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(c.size());
    for (const auto& p : parts) {
        if (p.size() != c.size()) throw std::invalid_argument("exchange dimensions do not match");
        sum += p;
    }
    // Projection onto {(u, {u_j}) : u = sum_j u_j}.
    Eigen::VectorXd shift = (sum - c) / static_cast<double>(parts.size() + 1);
    ExchangeResult out;
    out.aggregate = c + shift;
    out.parts.reserve(parts.size());
    for (const auto& p : parts) out.parts.push_back(p - shift);
    return out;
}

Eigen::VectorXd average(const Eigen::VectorXd& x_half, const std::vector<const Eigen::VectorXd*>& copies) {
    Eigen::VectorXd sum = x_half;
    for (const auto* c : copies) sum += *c;
    return sum / static_cast<double>(copies.size() + 1);
}

GraphProjector::GraphProjector(const Eigen::SparseMatrix<double>& a) : a_(a) {
    Eigen::SparseMatrix<double> gram = Eigen::SparseMatrix<double>(a_.transpose()) * a_;
    Eigen::SparseMatrix<double> eye(a_.cols(), a_.cols());
    eye.setIdentity();
    gram += eye;
    solver_.compute(gram);
    if (solver_.info() != Eigen::Success) throw std::runtime_error("graph projector factorization failed");
}

void GraphProjector::project(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             Eigen::VectorXd& x_out, Eigen::VectorXd& y_out) const {
    if (x.size() != a_.cols() || y.size() != a_.rows())
        throw std::invalid_argument("graph projection dimensions do not match");
    x_out = solver_.solve(x + a_.transpose() * y);
    y_out = a_ * x_out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project_graph(const Eigen::SparseMatrix<double>& a,
                                                          const Eigen::VectorXd& x,
                                                          const Eigen::VectorXd& y) {
    GraphProjector proj(a);
    std::pair<Eigen::VectorXd, Eigen::VectorXd> out;
    proj.project(x, y, out.first, out.second);
    return out;
}

BlockSplittingSolver::BlockSplittingSolver(const BlockLp& lp, const AdmmParams& params)
    : lp_(&lp), params_(params) {
    validate_params(params);
    if (lp.num_blocks() == 0) throw std::invalid_argument("LP has no blocks");

    const int nb = lp.num_blocks();
    row_members_.resize(nb);
    col_members_.resize(nb);
    for (const auto& [key, mat] : lp.blocks) {
        int idx = static_cast<int>(keys_.size());
        keys_.push_back(key);
        projectors_.emplace(std::piecewise_construct, std::forward_as_tuple(key),
                            std::forward_as_tuple(mat));
        row_members_[key.first].push_back(idx);
        col_members_[key.second].push_back(idx);
    }

    auto& st = state_;
    st.x.resize(nb);
    st.x_half.resize(nb);
    st.x_dual.resize(nb);
    st.x_prev.resize(nb);
    st.y.resize(nb);
    st.y_half.resize(nb);
    st.y_dual.resize(nb);
    st.y_prev.resize(nb);
    for (int t = 0; t < nb; ++t) {
        st.x[t] = st.x_half[t] = st.x_dual[t] = st.x_prev[t] = Eigen::VectorXd::Zero(lp.block_cols[t]);
        st.y[t] = st.y_half[t] = st.y_dual[t] = st.y_prev[t] = Eigen::VectorXd::Zero(lp.block_rows[t]);
    }
    for (const auto& key : keys_) {
        long rows = lp.block_rows[key.first], cols = lp.block_cols[key.second];
        st.y_ij[key] = st.y_ij_half[key] = st.y_ij_prev[key] = Eigen::VectorXd::Zero(rows);
        st.x_ij_half[key] = st.x_ij_dual[key] = Eigen::VectorXd::Zero(cols);
    }

    pool_ = std::make_unique<detail::ThreadPool>(params_.threads);
}

BlockSplittingSolver::~BlockSplittingSolver() = default;

void BlockSplittingSolver::step() {
    auto& st = state_;
    const int nb = lp_->num_blocks();
    const double rho = params_.rho;

    st.x_prev = st.x;
    st.y_prev = st.y;
    st.y_ij_prev = st.y_ij;

    // Half-step: proxes pin y to b and apply the cost to x; every present
    // block projects onto its graph. Independent per block.
    for (int i = 0; i < nb; ++i) st.y_half[i] = lp_->rhs[i];
    pool_->parallel_for(nb, [&](int j) {
        st.x_half[j] = prox_cost_nonneg(st.x[j] - st.x_dual[j], lp_->cost[j], rho);
    });
    pool_->parallel_for(static_cast<int>(keys_.size()), [&](int t) {
        const BlockKey& key = keys_[t];
        auto [i, j] = key;
        projectors_.at(key).project(st.x[j] - st.x_ij_dual.at(key), st.y_ij.at(key) + st.y_dual[i],
                                    st.x_ij_half.at(key), st.y_ij_half.at(key));
    });

    // Averaging over each column, then exchange across each row; both run in
    // a fixed order so reductions are deterministic.
    for (int j = 0; j < nb; ++j) {
        std::vector<const Eigen::VectorXd*> copies;
        copies.reserve(col_members_[j].size());
        for (int t : col_members_[j]) copies.push_back(&st.x_ij_half.at(keys_[t]));
        st.x[j] = average(st.x_half[j], copies);
    }
    for (int i = 0; i < nb; ++i) {
        if (row_members_[i].empty()) {
            st.y[i] = st.y_half[i];
            continue;
        }
        std::vector<Eigen::VectorXd> parts;
        parts.reserve(row_members_[i].size());
        for (int t : row_members_[i]) parts.push_back(st.y_ij_half.at(keys_[t]));
        // qualified: ADL would otherwise pull in std::exchange
        ExchangeResult ex = dmdp::exchange(st.y_half[i], parts);
        st.y[i] = std::move(ex.aggregate);
        for (size_t p = 0; p < row_members_[i].size(); ++p)
            st.y_ij.at(keys_[row_members_[i][p]]) = std::move(ex.parts[p]);
    }

    for (int j = 0; j < nb; ++j) st.x_dual[j] += st.x_half[j] - st.x[j];
    for (int i = 0; i < nb; ++i) st.y_dual[i] += st.y_half[i] - st.y[i];
    for (const auto& key : keys_) st.x_ij_dual.at(key) += st.x_ij_half.at(key) - st.x[key.second];

    ++st.k;
}

Residuals BlockSplittingSolver::residuals() const {
    const auto& st = state_;
    if (st.k < 1) throw std::logic_error("residuals need at least one iteration");
    const int nb = lp_->num_blocks();

    double primal_sq = 0, dual_sq = 0, half_sq = 0, full_sq = 0, dualvar_sq = 0;
    long dim = 0;
    for (int t = 0; t < nb; ++t) {
        primal_sq += (st.x_half[t] - st.x[t]).squaredNorm() + (st.y_half[t] - st.y[t]).squaredNorm();
        dual_sq += (st.x[t] - st.x_prev[t]).squaredNorm() + (st.y[t] - st.y_prev[t]).squaredNorm();
        half_sq += st.x_half[t].squaredNorm() + st.y_half[t].squaredNorm();
        full_sq += st.x[t].squaredNorm() + st.y[t].squaredNorm();
        dualvar_sq += st.x_dual[t].squaredNorm() + st.y_dual[t].squaredNorm();
        dim += lp_->block_cols[t] + lp_->block_rows[t];
    }
    for (const auto& key : keys_) {
        auto [i, j] = key;
        primal_sq += (st.x_ij_half.at(key) - st.x[j]).squaredNorm() +
                     (st.y_ij_half.at(key) - st.y_ij.at(key)).squaredNorm();
        dual_sq += (st.x[j] - st.x_prev[j]).squaredNorm() +
                   (st.y_ij.at(key) - st.y_ij_prev.at(key)).squaredNorm();
        half_sq += st.x_ij_half.at(key).squaredNorm() + st.y_ij_half.at(key).squaredNorm();
        full_sq += st.x[j].squaredNorm() + st.y_ij.at(key).squaredNorm();
        dualvar_sq += st.x_ij_dual.at(key).squaredNorm();
        dim += lp_->block_cols[j] + lp_->block_rows[i];
    }

    Residuals res;
    res.primal = std::sqrt(primal_sq);
    res.dual = params_.rho * std::sqrt(dual_sq);
    double sqrt_dim = std::sqrt(static_cast<double>(dim));
    res.eps_pri = sqrt_dim * params_.eps_abs +
                  params_.eps_rel * std::max(std::sqrt(half_sq), std::sqrt(full_sq));
    res.eps_dual = sqrt_dim * params_.eps_abs + params_.eps_rel * params_.rho * std::sqrt(dualvar_sq);
    return res;
}

Eigen::VectorXd BlockSplittingSolver::solution() const { return concat_columns(*lp_, state_.x_half); }

double BlockSplittingSolver::objective() const { return max_form_objective(*lp_, solution()); }

double BlockSplittingSolver::infeasibility() const { return relative_infeasibility(*lp_, solution()); }

SolveReport BlockSplittingSolver::run() {
    SolveReport rep;
    bool converged = false;
    Residuals res;
    while (state_.k < params_.max_iter) {
        step();
        res = residuals();
        converged = res.converged();
        if (converged || state_.k == 1 || state_.k % params_.trace_every == 0 || state_.k == params_.max_iter)
            rep.trace.push_back({state_.k, objective(), infeasibility(), res.primal, res.dual});
        if (converged) break;
    }
    rep.x = solution();
    rep.objective = max_form_objective(*lp_, rep.x);
    rep.infeasibility = relative_infeasibility(*lp_, rep.x);
    rep.iterations = state_.k;
    rep.converged = converged;
    return rep;
}

SolveReport solve(const BlockLp& lp, const AdmmParams& params) {
    return BlockSplittingSolver(lp, params).run();
}

} // namespace dmdp
