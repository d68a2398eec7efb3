#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmdp/admm.hpp"
#include "dmdp/block_lp.hpp"
#include "dmdp/gridworld.hpp"
#include "dmdp/json_io.hpp"
#include "dmdp/oracles.hpp"
#include "dmdp/product.hpp"

namespace py = pybind11;
using namespace dmdp;

PYBIND11_MODULE(_dmdp, m) {
    m.doc() = "decomposition-based distributed MDP solver";

    py::class_<Mdp>(m, "Mdp")
        .def_property_readonly("num_states", &Mdp::num_states)
        .def_readonly("state_names", &Mdp::state_names)
        .def_readonly("action_names", &Mdp::action_names)
        .def_readonly("initial", &Mdp::initial)
        .def("__repr__", [](const Mdp& mdp) {
            return "<Mdp with " + std::to_string(mdp.num_states()) + " states, " +
                   std::to_string(count_state_action_pairs(mdp)) + " state-action pairs>";
        });

    py::class_<Policy>(m, "Policy").def_readonly("probs", &Policy::probs);
    py::class_<RewardFn>(m, "RewardFn").def_readonly("values", &RewardFn::values);

    py::class_<ValueResult>(m, "ValueResult")
        .def_readonly("per_state", &ValueResult::per_state)
        .def_readonly("scalar", &ValueResult::scalar)
        .def_readonly("policy", &ValueResult::policy)
        .def_readonly("iterations", &ValueResult::iterations)
        .def_readonly("residual", &ValueResult::residual);

    m.def("mdp_from_json", [](const std::string& text) { return mdp_from_json(nlohmann::json::parse(text)); });
    m.def("mdp_to_json", [](const Mdp& mdp) { return mdp_to_json(mdp).dump(2); });
    m.def("load_mdp", &load_mdp);
    m.def("save_mdp", &save_mdp);
    m.def("validate", [](const Mdp& mdp) {
        std::vector<std::string> out;
        for (const auto& v : validate(mdp)) out.push_back(v.str());
        return out;
    });
    m.def("enabled_actions", &enabled_actions);
    m.def("count_state_action_pairs", &count_state_action_pairs);
    m.def("constant_reward", &constant_reward);
    m.def("reward_from_table", [](const Mdp& mdp, std::vector<std::vector<double>> values) {
        RewardFn r;
        r.values = std::move(values);
        if (r.values.size() != static_cast<size_t>(mdp.num_states()))
            throw std::invalid_argument("reward table does not match the state count");
        for (StateId s = 0; s < mdp.num_states(); ++s)
            if (r.values[s].size() != mdp.choices[s].size())
                throw std::invalid_argument("reward row does not match the enabled actions");
        return r;
    });
    m.def("uniform_policy", &uniform_policy);

    m.def("value_iteration_discounted", &value_iteration_discounted, py::arg("mdp"), py::arg("rewards"),
          py::arg("gamma"), py::arg("tol") = 1e-9);
    m.def("average_reward_optimal", &average_reward_optimal, py::arg("mdp"), py::arg("rewards"),
          py::arg("tol") = 1e-9);
    m.def("reachability_max", &reachability_max, py::arg("mdp"), py::arg("target"), py::arg("tol") = 1e-9);
    m.def("evaluate_policy_discounted", &evaluate_policy_discounted);

    py::class_<Partition>(m, "Partition")
        .def(py::init([](std::vector<std::vector<StateId>> regions) {
                 Partition pi;
                 pi.regions = std::move(regions);
                 return pi;
             }),
             py::arg("regions"))
        .def_readonly("regions", &Partition::regions)
        .def_property_readonly("num_regions", &Partition::num_regions);
    m.def("single_region_partition", [](const Mdp& mdp) {
        Partition pi;
        pi.regions.resize(1);
        for (StateId s = 0; s < mdp.num_states(); ++s) pi.regions[0].push_back(s);
        return pi;
    });

    py::class_<Decomposition>(m, "Decomposition")
        .def_readonly("k0", &Decomposition::k0)
        .def_readonly("kernels", &Decomposition::kernels)
        .def_readonly("block_of", &Decomposition::block_of)
        .def_readonly("pair_counts", &Decomposition::pair_counts)
        .def_readonly("state_counts", &Decomposition::state_counts);

    py::class_<Lemma1Report>(m, "Lemma1Report")
        .def_readonly("ok", &Lemma1Report::ok)
        .def_readonly("counterexamples", &Lemma1Report::counterexamples);

    m.def("periphery", &periphery);
    m.def("decompose", &decompose);
    m.def("verify_lemma1", &verify_lemma1);

    py::class_<GridSpec>(m, "GridSpec");
    py::class_<GridModel>(m, "GridModel")
        .def_readonly("mdp", &GridModel::mdp)
        .def_property_readonly("cells", [](const GridModel& g) {
            std::vector<std::pair<int, int>> cells;
            for (Cell c : g.cell_of_state) cells.emplace_back(c.x, c.y);
            return cells;
        });
    m.def("grid_spec_from_json", [](const std::string& text) { return grid_spec_from_json(nlohmann::json::parse(text)); });
    m.def("grid_spec_to_json", [](const GridSpec& spec) { return grid_spec_to_json(spec).dump(2); });
    m.def("four_room_spec", &four_room_spec, py::arg("width"), py::arg("height"), py::arg("seed"),
          py::arg("num_targets"), py::arg("num_restricted"));
    m.def("random_grid_spec", &random_grid_spec);
    m.def("build_gridworld", &build_gridworld);
    m.def("gridworld_rewards", &discounted_reward_fn);
    m.def("four_room_partition", [](const GridSpec& spec, const GridModel& model) {
        return wall_partition(spec, model, four_room_rooms(spec));
    });
    m.def("grid_r_division", [](const GridSpec& spec, const GridModel& model, long r) {
        return grid_r_division(spec, model, r).partition;
    });

    py::class_<BlockLp>(m, "BlockLp")
        .def_property_readonly("num_blocks", &BlockLp::num_blocks)
        .def_readonly("block_rows", &BlockLp::block_rows)
        .def_readonly("block_cols", &BlockLp::block_cols)
        .def_property_readonly("total_rows", &BlockLp::total_rows)
        .def_property_readonly("total_cols", &BlockLp::total_cols);
    m.def("build_discounted", &build_discounted, py::arg("mdp"), py::arg("decomposition"),
          py::arg("rewards"), py::arg("gamma"), py::arg("u0_override") = std::nullopt);
    m.def("build_average", &build_average);
    m.def("assemble_dense", [](const BlockLp& lp) {
        DenseLp d = assemble_dense(lp);
        return py::make_tuple(d.a, d.b, d.c);
    });
    m.def("extract_policy", [](const BlockLp& lp, const Mdp& mdp, const Eigen::VectorXd& x) {
        auto out = extract_policy(lp, mdp, x);
        return py::make_tuple(out.policy, out.defaulted);
    });
    m.def("relative_infeasibility", &relative_infeasibility);
    m.def("export_block_lp", &export_block_lp);

    py::class_<AdmmParams>(m, "AdmmParams")
        .def(py::init<>())
        .def_readwrite("rho", &AdmmParams::rho)
        .def_readwrite("eps_rel", &AdmmParams::eps_rel)
        .def_readwrite("eps_abs", &AdmmParams::eps_abs)
        .def_readwrite("max_iter", &AdmmParams::max_iter)
        .def_readwrite("trace_every", &AdmmParams::trace_every)
        .def_readwrite("threads", &AdmmParams::threads);

    py::class_<TracePoint>(m, "TracePoint")
        .def_readonly("k", &TracePoint::k)
        .def_readonly("objective", &TracePoint::objective)
        .def_readonly("infeasibility", &TracePoint::infeasibility)
        .def_readonly("primal_res", &TracePoint::primal_res)
        .def_readonly("dual_res", &TracePoint::dual_res);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("x", &SolveReport::x)
        .def_readonly("objective", &SolveReport::objective)
        .def_readonly("infeasibility", &SolveReport::infeasibility)
        .def_readonly("iterations", &SolveReport::iterations)
        .def_readonly("converged", &SolveReport::converged)
        .def_readonly("trace", &SolveReport::trace);
    m.def("solve", &solve, py::arg("lp"), py::arg("params") = AdmmParams{},
          py::call_guard<py::gil_scoped_release>());

    py::class_<DeterministicAutomaton>(m, "DeterministicAutomaton")
        .def_readonly("state_names", &DeterministicAutomaton::state_names)
        .def_readonly("ap", &DeterministicAutomaton::ap);
    m.def("automaton_from_json",
          [](const std::string& text) { return automaton_from_json(nlohmann::json::parse(text)); });
    m.def("load_automaton", &load_automaton);

    py::class_<ProductMdp>(m, "ProductMdp")
        .def_readonly("mdp", &ProductMdp::mdp)
        .def_readonly("source", &ProductMdp::source)
        .def_readonly("buchi_accepting", &ProductMdp::buchi_accepting);
    py::class_<EndComponent>(m, "EndComponent")
        .def_readonly("states", &EndComponent::states)
        .def_readonly("choices", &EndComponent::choices)
        .def_readonly("witness_pair", &EndComponent::witness_pair);
    py::class_<AecResult>(m, "AecResult")
        .def_readonly("components", &AecResult::components)
        .def_readonly("accepting_states", &AecResult::accepting_states);
    py::class_<SinkifyResult>(m, "SinkifyResult")
        .def_readonly("mdp", &SinkifyResult::mdp)
        .def_readonly("rewards", &SinkifyResult::rewards)
        .def_readonly("sink_state", &SinkifyResult::sink_state)
        .def_readonly("sink_initial_mass", &SinkifyResult::sink_initial_mass)
        .def_readonly("pruned", &SinkifyResult::pruned)
        .def_readonly("degenerate", &SinkifyResult::degenerate);

    m.def("product_rabin", &product_rabin);
    m.def("product_buchi", &product_buchi);
    m.def("mec_decomposition", &mec_decomposition);
    m.def("accepting_end_components", &accepting_end_components);
    m.def("sinkify", &sinkify);
    m.def("buchi_frequency_reward", &buchi_frequency_reward);
}
