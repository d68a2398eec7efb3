#pragma once

#include "dmdp/decomposition.hpp"
#include "dmdp/mdp.hpp"

#include <compare>
#include <map>
#include <set>

namespace dmdp {

enum class Terrain { Pavement, Grass, Gravel, Sand };

/// Probability of arriving at the intended cell on this terrain.
double terrain_success_probability(Terrain t);
const char* terrain_name(Terrain t);
Terrain terrain_from_name(const std::string& name);

struct Cell {
    int x = 0;
    int y = 0;
    auto operator<=>(const Cell&) const = default;
};

/// Scenario description for the gridworld family. Coordinates are cartesian:
/// N increments y, E increments x. Cells not listed in `terrain` are pavement.
/// An empty `start` set means the initial distribution is uniform over all
/// free cells.
struct GridSpec {
    int width = 0;
    int height = 0;
    std::map<Cell, Terrain> terrain;
    std::set<Cell> walls;
    std::set<Cell> targets;
    std::set<Cell> restricted;
    std::map<std::string, std::set<Cell>> labeled_regions;
    std::set<Cell> start;
    unsigned seed = 0;
};

/// Throws if cells are out of bounds or walls/targets/restricted overlap.
void validate_grid_spec(const GridSpec& spec);

/// The generated MDP plus the cell/state correspondence. Wall cells carry no
/// state; free cells are numbered row-major (y, then x).
struct GridModel {
    Mdp mdp;
    std::vector<Cell> cell_of_state;
    std::map<Cell, StateId> state_of_cell;
};

/// Builds the slip-dynamics MDP: actions N,S,E,W; the intended move succeeds
/// with the terrain probability and the remainder splits equally between the
/// two diagonal cells flanking the intended one; any outcome that would land
/// in a wall or outside the grid bounces back to the current cell.
GridModel build_gridworld(const GridSpec& spec);

/// -1 per step, -1000 on restricted cells, +100 on targets.
RewardFn discounted_reward_fn(const GridSpec& spec, const GridModel& model);

/// Partition of the MDP states from user-supplied rooms (sets of free cells).
/// Throws listing cells that are uncovered or claimed twice.
Partition wall_partition(const GridSpec& spec, const GridModel& model,
                         const std::vector<std::set<Cell>>& rooms);

/// Rectangular tiling with tiles of side ceil(sqrt(r)), giving O(r) nodes and
/// O(sqrt(r)) boundary nodes per region on grid-structured MDPs.
struct RDivision {
    Partition partition;
    int tile_side = 0;
    bool degenerate = false; // single region because r covers the whole grid
};
RDivision grid_r_division(const GridSpec& spec, const GridModel& model, long r);

/// Four-room scenario: one wall row and one wall column with a doorway in
/// each of the four wall segments, plus seeded target/restricted placement.
GridSpec four_room_spec(int width, int height, unsigned seed, int num_targets, int num_restricted);

/// Room cell sets (quadrants) matching four_room_spec, for wall_partition.
std::vector<std::set<Cell>> four_room_rooms(const GridSpec& spec);

/// Uniformly seeded walls/targets/restricted placement.
GridSpec random_grid_spec(int width, int height, unsigned seed, double wall_density,
                          int num_targets, int num_restricted);

} // namespace dmdp
