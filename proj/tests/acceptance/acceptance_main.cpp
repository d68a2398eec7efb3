// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
// binary exits nonzero if any criterion fails.

#include "dmdp/admm.hpp"
#include "dmdp/block_lp.hpp"
#include "dmdp/gridworld.hpp"
#include "dmdp/json_io.hpp"
#include "dmdp/oracles.hpp"
#include "dmdp/product.hpp"
#include "support/brute_force_ec.hpp"
#include "support/dense_reference.hpp"
#include "support/generators.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace dmdp;
using namespace dmdp::testing;

namespace {

int failures = 0;

void run(int id, const std::string& name, const std::function<std::string()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
        detail = body();
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!detail.empty() && detail.rfind("FAIL", 0) == 0) ok = false;
    std::printf("%s criterion %d: %s (%s; %.1fs)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str(), secs);
    if (!ok) ++failures;
}

std::string fail(const std::string& why) { return "FAIL " + why; }

Mdp uniform_u0(Mdp m) {
    m.initial = Eigen::VectorXd::Constant(m.num_states(), 1.0 / m.num_states());
    return m;
}

Partition partition_2to4(unsigned seed, int n) {
    for (unsigned bump = 0;; ++bump) {
        Partition pi = random_partition(seed + bump, n, 2 + static_cast<int>((seed + bump) % 3));
        if (pi.num_regions() >= 2 && pi.num_regions() <= 4) return pi;
    }
}

struct SuiteInstance {
    Mdp mdp;
    RewardFn rewards;
    Partition partition;
};

/// The seeded random suite used by criteria 1 and 5.
SuiteInstance suite_instance(unsigned seed) {
    SuiteInstance inst;
    inst.mdp = uniform_u0(random_mdp(seed, 15 - static_cast<int>(seed % 3), 3, 5));
    inst.rewards = random_reward(seed + 500, inst.mdp, 0.0, 100.0);
    inst.partition = partition_2to4(seed + 900, inst.mdp.num_states());
    return inst;
}

DeterministicAutomaton reach_dra(bool with_trap) {
    DeterministicAutomaton a;
    a.kind = DeterministicAutomaton::Kind::Rabin;
    a.initial = 0;
    if (with_trap) {
        a.state_names = {"q0", "acc", "trap"};
        a.ap = {"p", "q"};
        a.delta.assign(3, std::vector<int>(4, 0));
        for (int l = 0; l < 4; ++l) {
            a.delta[0][l] = (l & 2) ? 2 : ((l & 1) ? 1 : 0);
            a.delta[1][l] = 1;
            a.delta[2][l] = 2;
        }
        a.rabin_pairs.push_back({{2}, {1}});
    } else {
        a.state_names = {"q0", "acc"};
        a.ap = {"p"};
        a.delta = {{0, 1}, {1, 1}};
        a.rabin_pairs.push_back({{}, {1}});
    }
    return a;
}

DeterministicAutomaton seen_p_dba() {
    DeterministicAutomaton a;
    a.kind = DeterministicAutomaton::Kind::Buchi;
    a.state_names = {"w", "seen"};
    a.ap = {"p"};
    a.initial = 0;
    a.delta = {{0, 1}, {0, 1}};
    a.buchi_accepting = {1};
    return a;
}

std::string check_budget(double secs, double budget) {
    if (secs > budget) {
        std::ostringstream os;
        os << "FAIL runtime " << secs << "s exceeds the " << budget << "s budget";
        return os.str();
    }
    return "";
}

} // namespace

int main() {
    // 1. Discounted oracle equivalence on the seeded random suite.
    run(1, "discounted ADMM matches value iteration on 20 seeded instances", [] {
        auto t0 = std::chrono::steady_clock::now();
        double worst_err = 0.0, worst_inf = 0.0;
        long worst_it = 0;
        for (unsigned seed = 1; seed <= 20; ++seed) {
            SuiteInstance inst = suite_instance(seed);
            BlockLp lp = build_discounted(inst.mdp, decompose(inst.mdp, inst.partition),
                                          inst.rewards, 0.9);
            auto vi = value_iteration_discounted(inst.mdp, inst.rewards, 0.9, 1e-10);
            AdmmParams p; // rho=1000, eps_rel=1e-4, eps_abs=1e-5, max_iter=50000
            SolveReport rep = solve(lp, p);
            double err = std::abs(rep.objective - vi.scalar) / std::abs(vi.scalar);
            worst_err = std::max(worst_err, err);
            worst_inf = std::max(worst_inf, rep.infeasibility);
            worst_it = std::max(worst_it, rep.iterations);
            if (!rep.converged) return fail("seed " + std::to_string(seed) + " did not converge");
            if (err > 0.01) return fail("seed " + std::to_string(seed) + " relative error " + std::to_string(err));
            if (rep.infeasibility > 1e-3)
                return fail("seed " + std::to_string(seed) + " infeasibility " + std::to_string(rep.infeasibility));
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (auto r = check_budget(secs, 60.0); !r.empty()) return r;
        std::ostringstream os;
        os << "worst rel err " << 100 * worst_err << "%, worst infeasibility " << worst_inf
           << ", max iters " << worst_it;
        return os.str();
    });

    // 2. Convergence for every penalty parameter on the two-region instance.
    run(2, "two-region instance converges for rho in {80,100,200,500,1000}", [] {
        Mdp fig = two_region_example();
        RewardFn r = random_reward(7, fig, 0.0, 100.0);
        BlockLp lp = build_discounted(fig, decompose(fig, two_region_partition()), r, 0.9);
        std::ostringstream os;
        for (double rho : {80.0, 100.0, 200.0, 500.0, 1000.0}) {
            AdmmParams p;
            p.rho = rho;
            SolveReport rep = solve(lp, p);
            if (!rep.converged || rep.iterations > 50000)
                return fail("rho " + std::to_string(rho) + " did not converge within 50000 iterations");
            os << rho << ":" << rep.iterations << " ";
        }
        return "iterations per rho " + os.str();
    });

    // 3. Kernel-entry property on 200 random pairs plus the golden instance.
    run(3, "Lemma-style kernel entry property and the golden decomposition", [] {
        auto t0 = std::chrono::steady_clock::now();
        for (unsigned seed = 0; seed < 200; ++seed) {
            Mdp m = random_mdp(seed, 4 + static_cast<int>(seed % 12), 3);
            Partition pi = random_partition(seed + 5000, m.num_states(), 5);
            if (!verify_lemma1(m, decompose(m, pi)).ok)
                return fail("violated at seed " + std::to_string(seed));
        }
        Mdp fig = two_region_example();
        Decomposition d = decompose(fig, two_region_partition());
        if (d.k0 != std::vector<StateId>{2, 4, 7} || d.kernels[0] != std::vector<StateId>{5, 6} ||
            d.kernels[1] != std::vector<StateId>{0, 1, 3})
            return fail("golden decomposition mismatch");
        if (!verify_lemma1(fig, d).ok) return fail("golden instance violates the property");
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (auto r = check_budget(secs, 5.0); !r.empty()) return r;
        return std::string("200 random pairs plus golden instance");
    });

    // 4. r-division size bounds on square grids.
    run(4, "grid r-division meets the size bounds with c=5", [] {
        auto t0 = std::chrono::steady_clock::now();
        std::ostringstream os;
        for (int side : {20, 50, 100}) {
            GridSpec spec;
            spec.width = spec.height = side;
            GridModel model = build_gridworld(spec);
            InducedGraph g = induced_graph(model.mdp);
            long n = model.mdp.num_states();
            for (long r : {25L, 100L, 400L}) {
                auto div = grid_r_division(spec, model, r);
                if (!check_r_division_bounds(div.partition, g, r, 5.0))
                    return fail("bounds violated at n=" + std::to_string(n) + " r=" + std::to_string(r));
                Decomposition d = decompose(model.mdp, div.partition);
                double cap = 5.0 * static_cast<double>(n) / std::sqrt(static_cast<double>(r));
                if (static_cast<double>(d.k0.size()) > cap)
                    return fail("|K0|=" + std::to_string(d.k0.size()) + " exceeds cap at n=" +
                                std::to_string(n) + " r=" + std::to_string(r));
                if (side == 100 && r == 400) os << "|K0|=" << d.k0.size() << " at n=10000,r=400";
            }
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (auto r = check_budget(secs, 10.0); !r.empty()) return r;
        return os.str();
    });

    // 5. Block assembly equals the direct dense construction.
    run(5, "assembled block systems equal the direct dense systems", [] {
        double worst = 0.0;
        for (unsigned seed = 1; seed <= 20; ++seed) {
            SuiteInstance inst = suite_instance(seed);
            BlockLp lp = build_discounted(inst.mdp, decompose(inst.mdp, inst.partition),
                                          inst.rewards, 0.9);
            worst = std::max(worst, dense_mismatch(lp, dense_reference(inst.mdp, inst.rewards, 0.9, false)));
        }
        for (unsigned seed = 1; seed <= 10; ++seed) {
            Mdp m = random_ergodic_mdp(seed, 9, 3);
            RewardFn r = random_reward(seed + 40, m);
            BlockLp lp = build_average(m, decompose(m, partition_2to4(seed + 60, m.num_states())), r);
            worst = std::max(worst, dense_mismatch(lp, dense_reference(m, r, 1.0, true)));
        }
        for (unsigned seed = 1; seed <= 5; ++seed) {
            Mdp m = with_random_labels(seed, random_mdp(seed, 8, 3), {"p"}, 0.3);
            ProductMdp p = product_rabin(m, reach_dra(false));
            auto sk = sinkify(p, accepting_end_components(p).accepting_states);
            if (sk.degenerate) continue;
            BlockLp lp = build_discounted(sk.mdp, decompose(sk.mdp, partition_2to4(seed, sk.mdp.num_states())),
                                          sk.rewards, 1.0);
            worst = std::max(worst, dense_mismatch(lp, dense_reference(sk.mdp, sk.rewards, 1.0, false)));
        }
        GridSpec spec = four_room_spec(20, 20, 7, 1, 5);
        GridModel model = build_gridworld(spec);
        RewardFn gr = discounted_reward_fn(spec, model);
        BlockLp glp = build_discounted(model.mdp, decompose(model.mdp, wall_partition(spec, model, four_room_rooms(spec))), gr, 0.9);
        worst = std::max(worst, dense_mismatch(glp, dense_reference(model.mdp, gr, 0.9, false)));
        if (worst > 1e-12) return fail("worst entry mismatch " + std::to_string(worst));
        std::ostringstream os;
        os << "worst entry mismatch " << worst;
        return os.str();
    });

    // 6. Reachability through the sink transformation.
    run(6, "sinkified gamma=1 value equals maximal reachability; ADMM within 1%", [] {
        double worst_id = 0.0, worst_admm = 0.0;
        for (unsigned seed = 1; seed <= 20; ++seed) {
            bool trap = seed % 2 == 0;
            std::vector<std::string> ap = trap ? std::vector<std::string>{"p", "q"}
                                               : std::vector<std::string>{"p"};
            Mdp m = with_random_labels(seed + 10, random_mdp(seed, 7 + seed % 6, 3), ap, 0.25);
            ProductMdp prod = product_rabin(m, reach_dra(trap));
            if (prod.mdp.num_states() > 200) return fail("product too large");
            auto aec = accepting_end_components(prod);
            auto sk = sinkify(prod, aec.accepting_states);
            double reach = aec.accepting_states.empty()
                               ? 0.0
                               : reachability_max(prod.mdp, aec.accepting_states, 1e-12).scalar;
            double via_sink = sk.degenerate
                                  ? 0.0
                                  : value_iteration_discounted(sk.mdp, sk.rewards, 1.0, 1e-12).scalar +
                                        sk.sink_initial_mass;
            worst_id = std::max(worst_id, std::abs(via_sink - reach));
            if (std::abs(via_sink - reach) > 1e-6)
                return fail("identity off by " + std::to_string(std::abs(via_sink - reach)));

            if (!sk.degenerate) {
                BlockLp lp = build_discounted(sk.mdp, decompose(sk.mdp, partition_2to4(seed + 33, sk.mdp.num_states())),
                                              sk.rewards, 1.0);
                AdmmParams p;
                p.rho = 100.0;
                SolveReport rep = solve(lp, p);
                double sat = rep.objective + sk.sink_initial_mass;
                double err = std::abs(sat - reach) / std::max(1.0, std::abs(reach));
                worst_admm = std::max(worst_admm, err);
                if (!rep.converged || err > 0.01)
                    return fail("seed " + std::to_string(seed) + " ADMM error " + std::to_string(err));
            }
        }
        std::ostringstream os;
        os << "worst identity gap " << worst_id << ", worst ADMM error " << 100 * worst_admm << "%";
        return os.str();
    });

    // 7. Frequency objectives agree across three routes.
    run(7, "Buchi frequency: average LP, discounted approximation, stationary oracle", [] {
        double worst = 0.0;
        int tested = 0;
        for (unsigned seed = 1; seed <= 8; ++seed) {
            Mdp base = with_random_labels(seed + 7, random_ergodic_mdp(seed, 6 + seed % 4, 2), {"p"}, 0.4);
            ProductMdp prod = product_buchi(base, seen_p_dba());
            if (prod.mdp.num_states() > 50) return fail("product too large");
            if (!ergodicity_gate(prod.mdp).irreducible) continue;
            ++tested;
            RewardFn freq = buchi_frequency_reward(prod);

            // Stationary frequency of the oracle policy: mass of F under the
            // stationary distribution of the induced chain.
            auto oracle = average_reward_optimal(prod.mdp, freq, 1e-10);
            InducedChain chain = induce_chain(prod.mdp, oracle.policy, freq);
            Eigen::VectorXd pi = stationary_distribution(chain.transition);
            double freq_oracle = 0.0;
            for (StateId v : prod.buchi_accepting) freq_oracle += pi(v);

            Decomposition d = decompose(prod.mdp, partition_2to4(seed + 70, prod.mdp.num_states()));
            AdmmParams p_avg;
            p_avg.max_iter = 200000;
            SolveReport direct = solve(build_average(prod.mdp, d, freq), p_avg);
            if (!direct.converged) return fail("average LP did not converge at seed " + std::to_string(seed));

            AdmmParams p_apx;
            p_apx.rho = 100.0;
            p_apx.max_iter = 200000;
            SolveReport apx = solve(build_discounted(prod.mdp, d, freq, 0.98), p_apx);
            if (!apx.converged) return fail("approximation did not converge at seed " + std::to_string(seed));
            double approx = (1.0 - 0.98) * apx.objective;

            double routes[3] = {direct.objective, approx, freq_oracle};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    double rel = std::abs(routes[a] - routes[b]) / std::abs(routes[b]);
                    worst = std::max(worst, rel);
                    if (rel > 0.05)
                        return fail("seed " + std::to_string(seed) + " routes differ by " + std::to_string(rel));
                }
        }
        std::ostringstream os;
        os << tested << " ergodic products, worst pairwise gap " << 100 * worst << "%";
        return os.str();
    });

    // 8. End components against exhaustive enumeration.
    run(8, "end components match the exhaustive oracle on small models", [] {
        for (unsigned seed = 0; seed < 40; ++seed) {
            Mdp m = random_mdp(seed, 2 + static_cast<int>(seed % 5), 3);
            auto fast = mec_decomposition(m);
            auto slow = brute_force_mecs(m);
            if (fast.size() != slow.size()) return fail("MEC count differs at seed " + std::to_string(seed));
            for (size_t i = 0; i < fast.size(); ++i)
                if (fast[i].states != slow[i].states || fast[i].choices != slow[i].choices)
                    return fail("MEC content differs at seed " + std::to_string(seed));
        }
        int products = 0;
        for (unsigned seed = 100; seed < 160; ++seed) {
            Mdp m = with_random_labels(seed, random_mdp(seed, 3, 2), {"p"}, 0.4);
            std::mt19937 rng(seed + 3);
            DeterministicAutomaton a;
            a.kind = DeterministicAutomaton::Kind::Rabin;
            a.state_names = {"q0", "q1"};
            a.ap = {"p"};
            a.initial = 0;
            a.delta = {{pick(rng, 2), pick(rng, 2)}, {pick(rng, 2), pick(rng, 2)}};
            a.rabin_pairs.push_back({{pick(rng, 2)}, {pick(rng, 2)}});
            ProductMdp p = product_rabin(m, a);
            if (p.mdp.num_states() > 6) continue;
            ++products;
            if (accepting_end_components(p).accepting_states != brute_force_accepting_states(p))
                return fail("accepting states differ at seed " + std::to_string(seed));
        }
        return std::to_string(40) + " MDPs and " + std::to_string(products) + " products checked";
    });

    // 9. Four-room flagship run.
    run(9, "20x20 four-room gridworld: ADMM within 1% of value iteration", [] {
        auto t0 = std::chrono::steady_clock::now();
        GridSpec spec = four_room_spec(20, 20, 7, 1, 5);
        GridModel model = build_gridworld(spec);
        RewardFn r = discounted_reward_fn(spec, model);
        Partition rooms = wall_partition(spec, model, four_room_rooms(spec));
        if (rooms.num_regions() != 4) return fail("expected 4 rooms");
        BlockLp lp = build_discounted(model.mdp, decompose(model.mdp, rooms), r, 0.9);
        auto vi = value_iteration_discounted(model.mdp, r, 0.9, 1e-9);
        AdmmParams p;
        p.eps_rel = 1e-6;
        p.eps_abs = 1e-6;
        p.max_iter = 400000;
        SolveReport rep = solve(lp, p);
        double err = std::abs(rep.objective - vi.scalar) / std::abs(vi.scalar);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!rep.converged) return fail("did not converge");
        if (err > 0.01) return fail("relative error " + std::to_string(err));
        if (auto b = check_budget(secs, 120.0); !b.empty()) return b;
        std::ostringstream os;
        os << model.mdp.num_states() << " states, rel err " << 100 * err << "%, "
           << rep.iterations << " iterations, infeasibility " << rep.infeasibility;
        return os.str();
    });

    // 10. Projection and exchange operator properties on random inputs.
    run(10, "graph projection optimality and exchange consistency on 1000 inputs", [] {
        std::mt19937 rng(4242);
        auto rand_vec = [&](long n, double s) {
            Eigen::VectorXd v(n);
            for (long i = 0; i < n; ++i) v(i) = s * (2.0 * unit(rng) - 1.0);
            return v;
        };
        for (int trial = 0; trial < 1000; ++trial) {
            int rows = 1 + pick(rng, 6), cols = 1 + pick(rng, 8);
            std::vector<Eigen::Triplet<double>> trip;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    if (unit(rng) < 0.5) trip.emplace_back(r, c, 2.0 * unit(rng) - 1.0);
            Eigen::SparseMatrix<double> a(rows, cols);
            a.setFromTriplets(trip.begin(), trip.end());
            Eigen::VectorXd x0 = rand_vec(cols, 2.0), y0 = rand_vec(rows, 2.0);
            auto [px, py] = project_graph(a, x0, y0);
            if ((py - a * px).lpNorm<Eigen::Infinity>() > 1e-10)
                return fail("projection infeasible at trial " + std::to_string(trial));
            double best = (px - x0).squaredNorm() + (py - y0).squaredNorm();
            for (int k = 0; k < 20; ++k) {
                Eigen::VectorXd u = rand_vec(cols, 2.5);
                if (best > (u - x0).squaredNorm() + (a * u - y0).squaredNorm() + 1e-9)
                    return fail("projection suboptimal at trial " + std::to_string(trial));
            }
        }
        for (int trial = 0; trial < 1000; ++trial) {
            long n = 1 + pick(rng, 6);
            int parts = 1 + pick(rng, 5);
            Eigen::VectorXd c = rand_vec(n, 2.0);
            std::vector<Eigen::VectorXd> in;
            for (int p = 0; p < parts; ++p) in.push_back(rand_vec(n, 2.0));
            ExchangeResult out = dmdp::exchange(c, in);
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
            for (const auto& p : out.parts) sum += p;
            if ((out.aggregate - sum).lpNorm<Eigen::Infinity>() > 1e-12)
                return fail("exchange inconsistent at trial " + std::to_string(trial));
        }
        return std::string("1000 projections and 1000 exchanges");
    });

    std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
