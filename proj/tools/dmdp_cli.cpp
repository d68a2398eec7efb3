// Batch front-end: scenario generation, decomposition, LP export, the
// distributed solver and the dynamic-programming oracles, plus report
// comparison. Exit codes: 0 success, 2 input error, 3 non-convergence
// (artifacts are still written).

#include <CLI11.hpp>
#include <json.hpp>

#include "dmdp/admm.hpp"
#include "dmdp/block_lp.hpp"
#include "dmdp/gridworld.hpp"
#include "dmdp/json_io.hpp"
#include "dmdp/oracles.hpp"
#include "dmdp/product.hpp"

#include <iostream>
#include <optional>

namespace {

using namespace dmdp;

struct ModelInputs {
    std::string mdp_path;
    std::string grid_path;
    std::string rewards_path;
    bool grid_rewards = false;

    std::optional<GridSpec> spec;
    std::optional<GridModel> grid;
    Mdp mdp;
};

void add_model_flags(CLI::App* cmd, ModelInputs& in) {
    cmd->add_option("--mdp", in.mdp_path, "MDP JSON file");
    cmd->add_option("--grid", in.grid_path, "grid scenario JSON file");
    cmd->add_option("--rewards", in.rewards_path, "reward JSON file");
    cmd->add_flag("--grid-rewards", in.grid_rewards, "derive rewards from the grid scenario");
}

void load_model(ModelInputs& in) {
    if (in.mdp_path.empty() == in.grid_path.empty())
        throw std::invalid_argument("exactly one of --mdp and --grid is required");
    if (!in.grid_path.empty()) {
        in.spec = load_grid_spec(in.grid_path);
        in.grid = build_gridworld(*in.spec);
        in.mdp = in.grid->mdp;
    } else {
        in.mdp = load_mdp(in.mdp_path);
    }
}

RewardFn load_rewards(const ModelInputs& in) {
    if (in.grid_rewards) {
        if (!in.grid) throw std::invalid_argument("--grid-rewards needs --grid");
        return discounted_reward_fn(*in.spec, *in.grid);
    }
    if (in.rewards_path.empty())
        throw std::invalid_argument("this mode needs --rewards or --grid-rewards");

    nlohmann::json j = load_json_file(in.rewards_path);
    double def = j.value("default", 0.0);
    std::map<StateId, double> per_state;
    std::map<std::pair<StateId, ActionId>, double> per_pair;
    std::map<std::string, StateId> sidx;
    for (StateId s = 0; s < in.mdp.num_states(); ++s) sidx[in.mdp.state_names[s]] = s;
    std::map<std::string, ActionId> aidx;
    for (ActionId a = 0; a < static_cast<int>(in.mdp.action_names.size()); ++a)
        aidx[in.mdp.action_names[a]] = a;

    if (j.contains("states"))
        for (const auto& [name, v] : j.at("states").items()) {
            if (!sidx.count(name)) throw std::invalid_argument("rewards name unknown state \"" + name + "\"");
            per_state[sidx.at(name)] = v.get<double>();
        }
    if (j.contains("pairs"))
        for (const auto& [key, v] : j.at("pairs").items()) {
            auto comma = key.find(',');
            if (key.size() < 4 || key.front() != '(' || key.back() != ')' || comma == std::string::npos)
                throw std::invalid_argument("reward pair key \"" + key + "\" is not of the form (state,action)");
            std::string sname = key.substr(1, comma - 1);
            std::string aname = key.substr(comma + 1, key.size() - comma - 2);
            if (!sidx.count(sname) || !aidx.count(aname))
                throw std::invalid_argument("reward pair key \"" + key + "\" names unknown ids");
            per_pair[{sidx.at(sname), aidx.at(aname)}] = v.get<double>();
        }

    return make_reward(in.mdp, [&](StateId s, ActionId a) {
        if (auto it = per_pair.find({s, a}); it != per_pair.end()) return it->second;
        if (auto it = per_state.find(s); it != per_state.end()) return it->second;
        return def;
    });
}

struct PartitionFlags {
    std::string file;
    long r = 0;
    bool single = false;
};

void add_partition_flags(CLI::App* cmd, PartitionFlags& pf) {
    cmd->add_option("--partition", pf.file, "partition JSON file");
    cmd->add_option("--r", pf.r, "grid r-division parameter (needs --grid)");
    cmd->add_flag("--single", pf.single, "single-region partition");
}

Partition single_region(int n) {
    Partition pi;
    pi.regions.resize(1);
    for (StateId s = 0; s < n; ++s) pi.regions[0].push_back(s);
    return pi;
}

Partition resolve_partition(const PartitionFlags& pf, const ModelInputs& in, const Mdp& target) {
    int picked = (!pf.file.empty()) + (pf.r > 0) + pf.single;
    if (picked > 1) throw std::invalid_argument("choose one of --partition, --r, --single");
    if (!pf.file.empty()) return load_partition(pf.file, target);
    if (pf.r > 0) {
        if (!in.grid) throw std::invalid_argument("--r needs --grid");
        return grid_r_division(*in.spec, *in.grid, pf.r).partition;
    }
    return single_region(target.num_states());
}

/// Carries a base-state partition over to a derived state space (products,
/// sinkified products). States mapping to -1 get a singleton region.
Partition lift_partition(const Partition& base, const std::vector<StateId>& base_of, int n) {
    std::vector<int> region_of_base;
    for (int r = 0; r < base.num_regions(); ++r)
        for (StateId s : base.regions[r]) {
            if (static_cast<int>(region_of_base.size()) <= s) region_of_base.resize(s + 1, -1);
            region_of_base[s] = r;
        }
    Partition out;
    out.regions.resize(base.num_regions());
    std::vector<StateId> extra;
    for (StateId v = 0; v < n; ++v) {
        StateId b = base_of[v];
        if (b < 0)
            extra.push_back(v);
        else
            out.regions[region_of_base[b]].push_back(v);
    }
    if (!extra.empty()) out.regions.push_back(extra);
    std::erase_if(out.regions, [](const auto& r) { return r.empty(); });
    return out;
}

struct SolveFlags {
    std::string mode = "discounted";
    double gamma = 0.9;
    bool gamma_set = false;
    std::string automaton_path;
    AdmmParams admm;
    bool compare_oracle = false;
    std::string out = "report.json";
    std::string trace_path;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& sf) {
    cmd->add_option("--mode", sf.mode, "discounted | average | average-approx | reach-rabin | buchi-freq")
        ->check(CLI::IsMember({"discounted", "average", "average-approx", "reach-rabin", "buchi-freq"}));
    cmd->add_option("--gamma", sf.gamma, "discount factor")->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--automaton", sf.automaton_path, "automaton JSON file (reach-rabin, buchi-freq)");
    cmd->add_option("--rho", sf.admm.rho, "penalty parameter");
    cmd->add_option("--eps-rel", sf.admm.eps_rel, "relative tolerance");
    cmd->add_option("--eps-abs", sf.admm.eps_abs, "absolute tolerance");
    cmd->add_option("--max-iter", sf.admm.max_iter, "iteration cap");
    cmd->add_option("--trace-every", sf.admm.trace_every, "trace sampling period");
    cmd->add_option("--threads", sf.admm.threads, "worker threads for the block steps");
    cmd->add_flag("--compare-oracle", sf.compare_oracle, "append the oracle value and relative error");
    cmd->add_option("--out", sf.out, "report JSON path");
    cmd->add_option("--trace", sf.trace_path, "trace CSV path");
}

nlohmann::json run_config_json(const SolveFlags& sf, const char* partition_source) {
    return {{"mode", sf.mode},
            {"gamma", sf.gamma},
            {"rho", sf.admm.rho},
            {"eps_rel", sf.admm.eps_rel},
            {"eps_abs", sf.admm.eps_abs},
            {"max_iter", sf.admm.max_iter},
            {"threads", sf.admm.threads},
            {"partition_source", partition_source}};
}

nlohmann::json policy_json(const Mdp& mdp, const Policy& f) {
    nlohmann::json j = nlohmann::json::object();
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (int k = 0; k < mdp.num_choices(s); ++k)
            j[mdp.state_names[s]][mdp.action_names[mdp.choices[s][k].action]] = f.probs[s][k];
    return j;
}

int cmd_solve(ModelInputs& in, PartitionFlags& pf, SolveFlags& sf) {
    load_model(in);
    const char* partition_source = !pf.file.empty() ? "file" : (pf.r > 0 ? "r-division" : "single");

    // Resolve the model the LP is built on, plus its rewards and value offset.
    Mdp target;
    RewardFn rewards;
    double gamma = sf.gamma;
    double offset = 0.0; // added to the objective when reporting satisfaction
    std::vector<StateId> base_of; // target state -> base state, for lifting
    std::optional<ProductMdp> product;
    bool average_mode = false;
    bool degenerate = false;

    if (sf.mode == "discounted" || sf.mode == "average" || sf.mode == "average-approx") {
        target = in.mdp;
        rewards = load_rewards(in);
        average_mode = sf.mode == "average";
        if (sf.mode == "average-approx" && !sf.gamma_set) gamma = 0.98;
        base_of.resize(target.num_states());
        for (StateId s = 0; s < target.num_states(); ++s) base_of[s] = s;
    } else {
        if (sf.automaton_path.empty()) throw std::invalid_argument(sf.mode + " needs --automaton");
        DeterministicAutomaton aut = load_automaton(sf.automaton_path);
        if (sf.mode == "reach-rabin") {
            product = product_rabin(in.mdp, aut);
            auto aec = accepting_end_components(*product);
            auto sk = sinkify(*product, aec.accepting_states);
            degenerate = sk.degenerate;
            target = sk.mdp;
            rewards = sk.rewards;
            gamma = 1.0;
            offset = sk.sink_initial_mass;
            base_of.assign(target.num_states(), -1);
            for (size_t v = 0; v < sk.kept.size(); ++v)
                base_of[v] = product->source[sk.kept[v]].first;
        } else {
            product = product_buchi(in.mdp, aut);
            target = product->mdp;
            rewards = buchi_frequency_reward(*product);
            average_mode = true;
            base_of.resize(target.num_states());
            for (StateId v = 0; v < target.num_states(); ++v) base_of[v] = product->source[v].first;
        }
    }

    Partition base_pi = resolve_partition(pf, in, in.mdp);
    Partition pi = (sf.mode == "discounted" || sf.mode == "average" || sf.mode == "average-approx")
                       ? base_pi
                       : lift_partition(base_pi, base_of, target.num_states());
    Decomposition d = decompose(target, pi);

    BlockLp lp = average_mode ? build_average(target, d, rewards)
                              : build_discounted(target, d, rewards, gamma);
    SolveReport rep = solve(lp, sf.admm);

    nlohmann::json j = solve_report_to_json(rep, lp, target);
    j["config"] = run_config_json(sf, partition_source);
    auto extracted = extract_policy(lp, target, rep.x);
    j["policy"] = policy_json(target, extracted.policy);

    if (sf.mode == "average-approx") j["average_estimate"] = (1.0 - gamma) * rep.objective;
    if (sf.mode == "reach-rabin") {
        j["satisfaction_probability"] = rep.objective + offset;
        j["sink_initial_mass"] = offset;
        if (degenerate) j["satisfaction_probability"] = 0.0;
    }

    if (sf.compare_oracle) {
        double oracle = 0.0, attained = rep.objective;
        if (sf.mode == "discounted") {
            oracle = value_iteration_discounted(target, rewards, gamma, 1e-9).scalar;
        } else if (sf.mode == "average" || sf.mode == "buchi-freq") {
            oracle = average_reward_optimal(target, rewards, 1e-9).scalar;
        } else if (sf.mode == "average-approx") {
            oracle = average_reward_optimal(target, rewards, 1e-9).scalar;
            attained = (1.0 - gamma) * rep.objective;
        } else {
            auto aec = accepting_end_components(*product);
            oracle = aec.accepting_states.empty()
                         ? 0.0
                         : reachability_max(product->mdp, aec.accepting_states, 1e-9).scalar;
            attained = degenerate ? 0.0 : rep.objective + offset;
        }
        j["oracle_objective"] = oracle;
        j["relative_error"] =
            std::abs(attained - oracle) / std::max(1e-12, std::abs(oracle));
    }

    save_json_file(j, sf.out);
    if (!sf.trace_path.empty()) save_trace_csv(rep.trace, sf.trace_path);
    std::cout << "objective " << rep.objective << ", infeasibility " << rep.infeasibility
              << ", iterations " << rep.iterations << (rep.converged ? "" : " (not converged)")
              << "\n";
    return rep.converged ? 0 : 3;
}

int cmd_oracle(ModelInputs& in, SolveFlags& sf) {
    load_model(in);
    nlohmann::json j;
    ValueResult res;
    Mdp target = in.mdp;
    if (sf.mode == "discounted") {
        res = value_iteration_discounted(target, load_rewards(in), sf.gamma, 1e-9);
    } else if (sf.mode == "average" || sf.mode == "average-approx") {
        res = average_reward_optimal(target, load_rewards(in), 1e-9);
    } else if (sf.mode == "buchi-freq") {
        if (sf.automaton_path.empty()) throw std::invalid_argument("buchi-freq needs --automaton");
        ProductMdp p = product_buchi(target, load_automaton(sf.automaton_path));
        target = p.mdp;
        res = average_reward_optimal(target, buchi_frequency_reward(p), 1e-9);
    } else {
        if (sf.automaton_path.empty()) throw std::invalid_argument("reach-rabin needs --automaton");
        ProductMdp p = product_rabin(target, load_automaton(sf.automaton_path));
        auto aec = accepting_end_components(p);
        target = p.mdp;
        if (aec.accepting_states.empty()) {
            res.per_state = Eigen::VectorXd::Zero(target.num_states());
            res.policy = uniform_policy(target);
        } else {
            res = reachability_max(target, aec.accepting_states, 1e-9);
        }
    }
    j["objective"] = res.scalar;
    j["iterations"] = res.iterations;
    j["residual"] = res.residual;
    for (StateId s = 0; s < target.num_states(); ++s)
        j["per_state"][target.state_names[s]] = res.per_state.size() ? res.per_state(s) : 0.0;
    j["policy"] = policy_json(target, res.policy);
    save_json_file(j, sf.out);
    std::cout << "oracle objective " << res.scalar << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposition-based distributed MDP solver"};
    app.require_subcommand(1);

    // gen-gridworld
    auto* gen = app.add_subcommand("gen-gridworld", "generate a gridworld scenario and its MDP");
    int width = 20, height = 20, targets = 1, restricted = 5;
    unsigned seed = 0;
    double wall_density = 0.0;
    bool four_room = false;
    std::string gen_out = "mdp.json", grid_out, partition_out;
    gen->add_option("--width", width)->required();
    gen->add_option("--height", height)->required();
    gen->add_option("--seed", seed, "seed for all randomized placement");
    gen->add_option("--targets", targets);
    gen->add_option("--restricted", restricted);
    gen->add_option("--wall-density", wall_density, "random wall fraction");
    gen->add_flag("--four-room", four_room, "wall row and column with four doorways");
    gen->add_option("--out", gen_out, "MDP JSON path");
    gen->add_option("--grid-out", grid_out, "grid scenario JSON path");
    gen->add_option("--partition-out", partition_out, "room partition JSON path (four-room)");

    // decompose
    auto* dec = app.add_subcommand("decompose", "partition a model and export its decomposition");
    ModelInputs dec_in;
    PartitionFlags dec_pf;
    std::string dec_out = "decomposition.json", dec_partition_out;
    add_model_flags(dec, dec_in);
    add_partition_flags(dec, dec_pf);
    dec->add_option("--out", dec_out, "decomposition JSON path");
    dec->add_option("--partition-out", dec_partition_out, "also write the partition JSON");

    // build-lp
    auto* blp = app.add_subcommand("build-lp", "export the block LP as triplet files");
    ModelInputs blp_in;
    PartitionFlags blp_pf;
    SolveFlags blp_sf;
    std::string out_dir = "lp";
    add_model_flags(blp, blp_in);
    add_partition_flags(blp, blp_pf);
    blp->add_option("--mode", blp_sf.mode, "discounted | average")
        ->check(CLI::IsMember({"discounted", "average"}));
    blp->add_option("--gamma", blp_sf.gamma);
    blp->add_option("--out-dir", out_dir, "output directory");

    // solve
    auto* sol = app.add_subcommand("solve", "solve with the block-splitting method");
    ModelInputs sol_in;
    PartitionFlags sol_pf;
    SolveFlags sol_sf;
    add_model_flags(sol, sol_in);
    add_partition_flags(sol, sol_pf);
    add_solve_flags(sol, sol_sf);

    // oracle
    auto* ora = app.add_subcommand("oracle", "dynamic-programming reference solution");
    ModelInputs ora_in;
    SolveFlags ora_sf;
    ora_sf.out = "oracle.json";
    add_model_flags(ora, ora_in);
    ora->add_option("--mode", ora_sf.mode)
        ->check(CLI::IsMember({"discounted", "average", "average-approx", "reach-rabin", "buchi-freq"}));
    ora->add_option("--gamma", ora_sf.gamma);
    ora->add_option("--automaton", ora_sf.automaton_path);
    ora->add_option("--out", ora_sf.out);

    // compare
    auto* cmp = app.add_subcommand("compare", "relative difference between two report fields");
    std::string cmp_a, cmp_b, field = "objective";
    double rel_tol = 0.01;
    cmp->add_option("--a", cmp_a)->required();
    cmp->add_option("--b", cmp_b)->required();
    cmp->add_option("--field", field, "JSON field to compare");
    cmp->add_option("--rel-tol", rel_tol);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            GridSpec spec = four_room
                                ? four_room_spec(width, height, seed, targets, restricted)
                                : random_grid_spec(width, height, seed, wall_density, targets, restricted);
            GridModel model = build_gridworld(spec);
            save_mdp(model.mdp, gen_out);
            if (!grid_out.empty()) save_grid_spec(spec, grid_out);
            if (!partition_out.empty()) {
                Partition pi = four_room
                                   ? wall_partition(spec, model, four_room_rooms(spec))
                                   : single_region(model.mdp.num_states());
                save_partition(pi, model.mdp, partition_out);
            }
            std::cout << "wrote " << gen_out << " (" << model.mdp.num_states() << " states)\n";
            return 0;
        }
        if (dec->parsed()) {
            load_model(dec_in);
            Partition pi = resolve_partition(dec_pf, dec_in, dec_in.mdp);
            Decomposition d = decompose(dec_in.mdp, pi);
            save_json_file(decomposition_to_json(d, dec_in.mdp), dec_out);
            if (!dec_partition_out.empty()) save_partition(pi, dec_in.mdp, dec_partition_out);
            std::cout << "wrote " << dec_out << " (" << pi.num_regions() << " regions, |K0|="
                      << d.k0.size() << ")\n";
            return 0;
        }
        if (blp->parsed()) {
            load_model(blp_in);
            Partition pi = resolve_partition(blp_pf, blp_in, blp_in.mdp);
            Decomposition d = decompose(blp_in.mdp, pi);
            RewardFn r = load_rewards(blp_in);
            BlockLp lp = blp_sf.mode == "average" ? build_average(blp_in.mdp, d, r)
                                                  : build_discounted(blp_in.mdp, d, r, blp_sf.gamma);
            export_block_lp(lp, blp_in.mdp, out_dir);
            std::cout << "wrote " << out_dir << " (" << lp.blocks.size() << " blocks)\n";
            return 0;
        }
        if (sol->parsed()) {
            sol_sf.gamma_set = sol->count("--gamma") > 0;
            return cmd_solve(sol_in, sol_pf, sol_sf);
        }
        if (ora->parsed()) return cmd_oracle(ora_in, ora_sf);
        if (cmp->parsed()) {
            nlohmann::json a = load_json_file(cmp_a), b = load_json_file(cmp_b);
            double va = a.at(field).get<double>(), vb = b.at(field).get<double>();
            double rel = std::abs(va - vb) / std::max(1e-12, std::abs(vb));
            std::cout << field << ": " << va << " vs " << vb << ", relative difference " << rel
                      << "\n";
            return rel <= rel_tol ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
