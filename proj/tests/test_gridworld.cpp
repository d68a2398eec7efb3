#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmdp/gridworld.hpp"
#include "dmdp/json_io.hpp"

#include <cmath>

using namespace dmdp;

namespace {

const Choice& choice_at(const GridModel& model, Cell c, ActionId a) {
    return model.mdp.choices[model.state_of_cell.at(c)][a];
}

double mass_to(const GridModel& model, const Choice& ch, Cell dest) {
    StateId to = model.state_of_cell.at(dest);
    for (const Outcome& o : ch.outcomes)
        if (o.to == to) return o.prob;
    return 0.0;
}

} // namespace

TEST_CASE("slip model on open pavement") {
    GridSpec spec;
    spec.width = spec.height = 5;
    GridModel model = build_gridworld(spec);

    const Choice& north = choice_at(model, {2, 2}, 0);
    CHECK(mass_to(model, north, {2, 3}) == doctest::Approx(0.9));
    CHECK(mass_to(model, north, {1, 3}) == doctest::Approx(0.05));
    CHECK(mass_to(model, north, {3, 3}) == doctest::Approx(0.05));
    CHECK(north.outcomes.size() == 3);
}

TEST_CASE("terrain controls the success probability") {
    GridSpec spec;
    spec.width = spec.height = 3;
    spec.terrain[{1, 1}] = Terrain::Sand;
    GridModel model = build_gridworld(spec);
    const Choice& east = choice_at(model, {1, 1}, 2);
    CHECK(mass_to(model, east, {2, 1}) == doctest::Approx(0.75));
    CHECK(mass_to(model, east, {2, 0}) == doctest::Approx(0.125));
    CHECK(mass_to(model, east, {2, 2}) == doctest::Approx(0.125));

    CHECK(terrain_success_probability(Terrain::Pavement) == 0.90);
    CHECK(terrain_success_probability(Terrain::Grass) == 0.85);
    CHECK(terrain_success_probability(Terrain::Gravel) == 0.80);
    CHECK(terrain_success_probability(Terrain::Sand) == 0.75);
}

TEST_CASE("walled intended cell bounces its mass back") {
    GridSpec spec;
    spec.width = spec.height = 3;
    spec.walls = {{1, 2}}; // directly north of the center
    GridModel model = build_gridworld(spec);
    const Choice& north = choice_at(model, {1, 1}, 0);
    CHECK(mass_to(model, north, {1, 1}) == doctest::Approx(0.9));
    CHECK(mass_to(model, north, {0, 2}) == doctest::Approx(0.05));
    CHECK(mass_to(model, north, {2, 2}) == doctest::Approx(0.05));
}

TEST_CASE("corner actions bounce everything") {
    GridSpec spec;
    spec.width = spec.height = 3;
    GridModel model = build_gridworld(spec);
    const Choice& south = choice_at(model, {0, 0}, 1);
    REQUIRE(south.outcomes.size() == 1);
    CHECK(south.outcomes[0].prob == doctest::Approx(1.0));
    CHECK(model.cell_of_state[south.outcomes[0].to] == Cell{0, 0});
}

TEST_CASE("every gridworld row is stochastic and local") {
    GridSpec spec = random_grid_spec(12, 9, 5, 0.2, 2, 3);
    GridModel model = build_gridworld(spec);
    CHECK(validate(model.mdp).empty());
    for (StateId s = 0; s < model.mdp.num_states(); ++s)
        for (const Choice& ch : model.mdp.choices[s]) {
            double sum = 0.0;
            for (const Outcome& o : ch.outcomes) {
                sum += o.prob;
                Cell from = model.cell_of_state[s], to = model.cell_of_state[o.to];
                CHECK(std::max(std::abs(from.x - to.x), std::abs(from.y - to.y)) <= 1);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            CHECK(ch.outcomes.size() <= 3);
        }
    CHECK(count_state_action_pairs(model.mdp) == 4L * model.mdp.num_states());
}

TEST_CASE("rewards by cell kind") {
    GridSpec spec;
    spec.width = spec.height = 4;
    spec.targets = {{0, 0}};
    spec.restricted = {{1, 1}};
    GridModel model = build_gridworld(spec);
    RewardFn r = discounted_reward_fn(spec, model);
    CHECK(r.values[model.state_of_cell.at({0, 0})][0] == 100.0);
    CHECK(r.values[model.state_of_cell.at({1, 1})][2] == -1000.0);
    CHECK(r.values[model.state_of_cell.at({2, 2})][1] == -1.0);
}

TEST_CASE("four-room scenario partitions along the walls") {
    GridSpec spec = four_room_spec(20, 20, 7, 1, 5);
    GridModel model = build_gridworld(spec);
    auto rooms = four_room_rooms(spec);
    Partition pi = wall_partition(spec, model, rooms);
    CHECK(pi.num_regions() == 4);

    Decomposition d = decompose(model.mdp, pi);
    CHECK_FALSE(d.k0.empty());
    // K0 states appear only next to doorways: every K0 cell is within one
    // step of a free cell on a wall line.
    const int wx = 10, wy = 10;
    std::vector<Cell> doorways;
    for (StateId s = 0; s < model.mdp.num_states(); ++s) {
        Cell c = model.cell_of_state[s];
        if (c.x == wx || c.y == wy) doorways.push_back(c);
    }
    REQUIRE(doorways.size() == 4);
    for (StateId s : d.k0) {
        Cell c = model.cell_of_state[s];
        bool near = false;
        for (Cell dw : doorways)
            near |= std::max(std::abs(c.x - dw.x), std::abs(c.y - dw.y)) <= 1;
        CHECK(near);
    }
}

TEST_CASE("wall partition rejects overlaps and gaps") {
    GridSpec spec;
    spec.width = spec.height = 4;
    GridModel model = build_gridworld(spec);

    std::vector<std::set<Cell>> single{{}};
    for (Cell c : model.cell_of_state) single[0].insert(c);
    CHECK(wall_partition(spec, model, single).num_regions() == 1);

    std::vector<std::set<Cell>> overlapping = {single[0], {{0, 0}}};
    CHECK_THROWS_WITH_AS(wall_partition(spec, model, overlapping), doctest::Contains("twice"),
                         std::invalid_argument);

    std::vector<std::set<Cell>> gap = {{{0, 0}}};
    CHECK_THROWS_WITH_AS(wall_partition(spec, model, gap), doctest::Contains("uncovered"),
                         std::invalid_argument);
}

TEST_CASE("generation is deterministic in the seed") {
    GridSpec a = four_room_spec(20, 20, 7, 1, 5);
    GridSpec b = four_room_spec(20, 20, 7, 1, 5);
    CHECK(grid_spec_to_json(a) == grid_spec_to_json(b));
    CHECK(mdp_to_json(build_gridworld(a).mdp) == mdp_to_json(build_gridworld(b).mdp));
    GridSpec c = four_room_spec(20, 20, 8, 1, 5);
    CHECK(grid_spec_to_json(a) != grid_spec_to_json(c));
}

TEST_CASE("bad specs are rejected") {
    GridSpec oob;
    oob.width = oob.height = 3;
    oob.walls = {{5, 5}};
    CHECK_THROWS_AS(validate_grid_spec(oob), std::invalid_argument);

    GridSpec clash;
    clash.width = clash.height = 3;
    clash.targets = {{1, 1}};
    clash.restricted = {{1, 1}};
    CHECK_THROWS_AS(validate_grid_spec(clash), std::invalid_argument);

    GridSpec blocked;
    blocked.width = blocked.height = 2;
    blocked.walls = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    CHECK_THROWS_AS(build_gridworld(blocked), std::invalid_argument);

    GridSpec walled_start;
    walled_start.width = walled_start.height = 2;
    walled_start.walls = {{0, 0}};
    walled_start.start = {{0, 0}};
    CHECK_THROWS_AS(build_gridworld(walled_start), std::invalid_argument);
}

TEST_CASE("labels come from the labeled regions") {
    GridSpec spec;
    spec.width = spec.height = 3;
    spec.labeled_regions["R1"] = {{0, 0}, {1, 0}};
    GridModel model = build_gridworld(spec);
    CHECK(model.mdp.has_labels);
    CHECK(model.mdp.ap == std::vector<std::string>{"R1"});
    CHECK(model.mdp.labels[model.state_of_cell.at({0, 0})].count("R1") == 1);
    CHECK(model.mdp.labels[model.state_of_cell.at({2, 2})].empty());
}
