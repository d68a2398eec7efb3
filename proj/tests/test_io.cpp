#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmdp/json_io.hpp"
#include "support/generators.hpp"

using namespace dmdp;
using namespace dmdp::testing;

TEST_CASE("MDP json round trip") {
    for (unsigned seed : {1u, 2u, 3u}) {
        Mdp m = with_random_labels(seed, random_mdp(seed, 8, 3), {"p", "q"}, 0.3);
        nlohmann::json j = mdp_to_json(m);
        Mdp back = mdp_from_json(j);
        CHECK(mdp_to_json(back) == j);
    }
}

TEST_CASE("probabilities may be decimal strings") {
    nlohmann::json j = {
        {"states", {"s0", "s1"}},
        {"actions", {"a"}},
        {"initial", {{"s0", "1.0"}}},
        {"transitions",
         {{{"from", "s0"}, {"action", "a"}, {"to", "s1"}, {"prob", "0.5"}},
          {{"from", "s0"}, {"action", "a"}, {"to", "s0"}, {"prob", 0.5}},
          {{"from", "s1"}, {"action", "a"}, {"to", "s1"}, {"prob", 1}}}},
    };
    Mdp m = mdp_from_json(j);
    CHECK(m.choices[0][0].outcomes.size() == 2);
    CHECK(m.initial(0) == 1.0);
}

TEST_CASE("loader renormalizes within 1e-9 and rejects beyond") {
    nlohmann::json j = {
        {"states", {"s0"}},
        {"actions", {"a"}},
        {"initial", {{"s0", 1.0}}},
        {"transitions", {{{"from", "s0"}, {"action", "a"}, {"to", "s0"}, {"prob", 1.0 + 4e-10}}}},
    };
    Mdp m = mdp_from_json(j);
    CHECK(m.choices[0][0].outcomes[0].prob == 1.0);

    j["transitions"][0]["prob"] = 0.9;
    CHECK_THROWS_AS(mdp_from_json(j), std::invalid_argument);

    j["transitions"][0]["prob"] = 1.0;
    j["initial"]["s0"] = 0.4;
    CHECK_THROWS_AS(mdp_from_json(j), std::invalid_argument);
}

TEST_CASE("unknown ids are named in errors") {
    nlohmann::json j = {
        {"states", {"s0"}},
        {"actions", {"a"}},
        {"initial", {{"s0", 1.0}}},
        {"transitions", {{{"from", "s0"}, {"action", "a"}, {"to", "zz"}, {"prob", 1.0}}}},
    };
    CHECK_THROWS_WITH_AS(mdp_from_json(j), doctest::Contains("zz"), std::invalid_argument);
}

TEST_CASE("partition json round trip and validation") {
    Mdp m = two_region_example();
    Partition pi = two_region_partition();
    nlohmann::json j = partition_to_json(pi, m);
    Partition back = partition_from_json(j, m);
    CHECK(back.regions == pi.regions);

    nlohmann::json missing = {{"r0", {"s0"}}};
    CHECK_THROWS_AS(partition_from_json(missing, m), std::invalid_argument);
}

TEST_CASE("decomposition export carries k0, kernels and index maps") {
    Mdp m = two_region_example();
    Decomposition d = decompose(m, two_region_partition());
    nlohmann::json j = decomposition_to_json(d, m);
    CHECK(j["k0"] == nlohmann::json({"s2", "s4", "s7"}));
    CHECK(j["kernels"][0] == nlohmann::json({"s5", "s6"}));
    CHECK(j["kernels"][1] == nlohmann::json({"s0", "s1", "s3"}));
    CHECK(j["index_maps"][0]["s4"] == 2);
    CHECK(j["m"] == nlohmann::json({6, 4, 6}));
    CHECK(j["n"] == nlohmann::json({3, 2, 3}));
}

TEST_CASE("automaton json round trip with explicit letters and true labels") {
    nlohmann::json j = {
        {"type", "rabin"},
        {"states", {"q0", "q1"}},
        {"initial", "q0"},
        {"ap", {"p", "r"}},
        {"transitions",
         {{{"from", "q0"}, {"label", {{"p"}, {"p", "r"}}}, {"to", "q1"}},
          {{"from", "q0"}, {"label", {nlohmann::json::array(), {"r"}}}, {"to", "q0"}},
          {{"from", "q1"}, {"label", "true"}, {"to", "q1"}}}},
        {"rabin_pairs", {{{"J", nlohmann::json::array()}, {"H", {"q1"}}}}},
    };
    DeterministicAutomaton a = automaton_from_json(j);
    CHECK(a.num_letters() == 4);
    CHECK(a.step(0, 1) == 1); // {p}
    CHECK(a.step(0, 2) == 0); // {r}
    CHECK(a.step(1, 0) == 1);
    CHECK(a.rabin_pairs.size() == 1);

    nlohmann::json out = automaton_to_json(a);
    DeterministicAutomaton back = automaton_from_json(out);
    CHECK(back.delta == a.delta);
    CHECK(back.rabin_pairs == a.rabin_pairs);
}

TEST_CASE("partial or conflicting automata are rejected") {
    nlohmann::json j = {
        {"type", "buchi"},
        {"states", {"q0"}},
        {"initial", "q0"},
        {"ap", {"p"}},
        {"transitions", {{{"from", "q0"}, {"label", {{"p"}}}, {"to", "q0"}}}},
        {"buchi", {"q0"}},
    };
    CHECK_THROWS_WITH_AS(automaton_from_json(j), doctest::Contains("missing"),
                         std::invalid_argument);

    j["transitions"] = {{{"from", "q0"}, {"label", "true"}, {"to", "q0"}},
                        {{"from", "q0"}, {"label", {{"p"}}}, {"to", "q0"}}};
    Mdp unused = two_region_example(); // silence lints about unused helpers
    (void)unused;
    CHECK(automaton_from_json(j).num_states() == 1); // identical target is fine
}

TEST_CASE("grid spec round trip") {
    GridSpec spec = four_room_spec(10, 8, 3, 1, 2);
    spec.terrain[{1, 1}] = Terrain::Grass;
    spec.labeled_regions["R1"] = {{2, 2}};
    nlohmann::json j = grid_spec_to_json(spec);
    GridSpec back = grid_spec_from_json(j);
    CHECK(grid_spec_to_json(back) == j);
}

TEST_CASE("solution and trace formats") {
    Mdp m = build_mdp({"s0"}, {"a0"}, {{0, 1.0}}, {{0, 0, 0, 1.0}});
    Partition whole;
    whole.regions = {{0}};
    BlockLp lp = build_discounted(m, decompose(m, whole), constant_reward(m, 1.0), 0.9);

    SolveReport rep;
    rep.x = Eigen::VectorXd::Constant(1, 10.0);
    rep.objective = 10.0;
    rep.infeasibility = 1e-6;
    rep.iterations = 42;
    rep.converged = true;
    rep.trace.push_back({1, 5.0, 0.5, 0.1, 0.2});

    nlohmann::json j = solve_report_to_json(rep, lp, m);
    CHECK(j["x"]["(s0,a0)"] == 10.0);
    CHECK(j["objective"] == 10.0);
    CHECK(j["converged"] == true);

    auto path = std::filesystem::temp_directory_path() / "dmdp_trace_test.csv";
    save_trace_csv(rep.trace, path.string());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "k,objective,infeasibility,primal_res,dual_res");
    std::string row;
    std::getline(in, row);
    CHECK(row.substr(0, 2) == "1,");
    std::filesystem::remove(path);
}
