#include "dmdp/gridworld.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dmdp {

double terrain_success_probability(Terrain t) {
    switch (t) {
    case Terrain::Pavement: return 0.90;
    case Terrain::Grass: return 0.85;
    case Terrain::Gravel: return 0.80;
    case Terrain::Sand: return 0.75;
    }
    throw std::logic_error("unknown terrain");
}

const char* terrain_name(Terrain t) {
    switch (t) {
    case Terrain::Pavement: return "pavement";
    case Terrain::Grass: return "grass";
    case Terrain::Gravel: return "gravel";
    case Terrain::Sand: return "sand";
    }
    throw std::logic_error("unknown terrain");
}

Terrain terrain_from_name(const std::string& name) {
    if (name == "pavement") return Terrain::Pavement;
    if (name == "grass") return Terrain::Grass;
    if (name == "gravel") return Terrain::Gravel;
    if (name == "sand") return Terrain::Sand;
    throw std::invalid_argument("unknown terrain \"" + name + "\"");
}

namespace {

std::string cell_name(Cell c) { return std::to_string(c.x) + "_" + std::to_string(c.y); }

bool in_bounds(const GridSpec& spec, Cell c) {
    return c.x >= 0 && c.x < spec.width && c.y >= 0 && c.y < spec.height;
}

void check_cells(const GridSpec& spec, const std::set<Cell>& cells, const char* what) {
    for (Cell c : cells)
        if (!in_bounds(spec, c))
            throw std::invalid_argument(std::string(what) + " cell " + cell_name(c) + " is out of bounds");
}

// N, S, E, W in action-id order.
constexpr int kDx[4] = {0, 0, 1, -1};
constexpr int kDy[4] = {1, -1, 0, 0};

} // namespace

void validate_grid_spec(const GridSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    check_cells(spec, spec.walls, "wall");
    check_cells(spec, spec.targets, "target");
    check_cells(spec, spec.restricted, "restricted");
    check_cells(spec, spec.start, "start");
    for (const auto& [name, cells] : spec.labeled_regions) check_cells(spec, cells, name.c_str());
    for (const auto& [c, t] : spec.terrain) {
        (void)t;
        if (!in_bounds(spec, c)) throw std::invalid_argument("terrain cell " + cell_name(c) + " is out of bounds");
    }
    for (Cell c : spec.targets)
        if (spec.walls.count(c)) throw std::invalid_argument("target cell " + cell_name(c) + " is a wall");
    for (Cell c : spec.restricted) {
        if (spec.walls.count(c)) throw std::invalid_argument("restricted cell " + cell_name(c) + " is a wall");
        if (spec.targets.count(c)) throw std::invalid_argument("cell " + cell_name(c) + " is both target and restricted");
    }
}

GridModel build_gridworld(const GridSpec& spec) {
    validate_grid_spec(spec);

    GridModel model;
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            Cell c{x, y};
            if (spec.walls.count(c)) continue;
            model.state_of_cell[c] = static_cast<StateId>(model.cell_of_state.size());
            model.cell_of_state.push_back(c);
        }
    if (model.cell_of_state.empty()) throw std::invalid_argument("every cell is a wall");

    const int n = static_cast<int>(model.cell_of_state.size());
    Mdp& mdp = model.mdp;
    mdp.action_names = {"N", "S", "E", "W"};
    mdp.state_names.reserve(n);
    for (Cell c : model.cell_of_state) mdp.state_names.push_back(cell_name(c));
    mdp.choices.resize(n);
    mdp.labels.resize(n);

    auto free_cell = [&](Cell c) { return in_bounds(spec, c) && !spec.walls.count(c); };

    for (StateId s = 0; s < n; ++s) {
        Cell here = model.cell_of_state[s];
        Terrain t = Terrain::Pavement;
        if (auto it = spec.terrain.find(here); it != spec.terrain.end()) t = it->second;
        const double p_ok = terrain_success_probability(t);
        const double p_slip = (1.0 - p_ok) / 2.0;

        for (ActionId a = 0; a < 4; ++a) {
            Cell intended{here.x + kDx[a], here.y + kDy[a]};
            // The two diagonal cells flanking the intended one: for N/S these
            // differ in x, for E/W in y.
            Cell flank1 = intended, flank2 = intended;
            if (kDx[a] == 0) {
                flank1.x -= 1;
                flank2.x += 1;
            } else {
                flank1.y -= 1;
                flank2.y += 1;
            }

            std::map<StateId, double> row;
            auto land = [&](Cell c, double p) {
                Cell dest = free_cell(c) ? c : here; // bounce, per outcome
                row[model.state_of_cell.at(dest)] += p;
            };
            land(intended, p_ok);
            land(flank1, p_slip);
            land(flank2, p_slip);

            Choice ch;
            ch.action = a;
            for (const auto& [to, p] : row) ch.outcomes.push_back({to, p});
            mdp.choices[s].push_back(std::move(ch));
        }
    }

    // Initial distribution: uniform over start cells, or over all free cells.
    std::vector<StateId> support;
    if (spec.start.empty()) {
        for (StateId s = 0; s < n; ++s) support.push_back(s);
    } else {
        for (Cell c : spec.start)
            if (auto it = model.state_of_cell.find(c); it != model.state_of_cell.end()) support.push_back(it->second);
        if (support.empty()) throw std::invalid_argument("every start cell is a wall");
    }
    mdp.initial = Eigen::VectorXd::Zero(n);
    for (StateId s : support) mdp.initial(s) = 1.0 / static_cast<double>(support.size());

    if (!spec.labeled_regions.empty()) {
        mdp.has_labels = true;
        for (const auto& [name, cells] : spec.labeled_regions) {
            mdp.ap.push_back(name);
            for (Cell c : cells)
                if (auto it = model.state_of_cell.find(c); it != model.state_of_cell.end())
                    mdp.labels[it->second].insert(name);
        }
    }
    return model;
}

RewardFn discounted_reward_fn(const GridSpec& spec, const GridModel& model) {
    return make_reward(model.mdp, [&](StateId s, ActionId) {
        Cell c = model.cell_of_state[s];
        if (spec.targets.count(c)) return 100.0;
        if (spec.restricted.count(c)) return -1000.0;
        return -1.0;
    });
}

Partition wall_partition(const GridSpec& spec, const GridModel& model,
                         const std::vector<std::set<Cell>>& rooms) {
    std::map<Cell, int> owner;
    std::string overlaps;
    for (int i = 0; i < static_cast<int>(rooms.size()); ++i)
        for (Cell c : rooms[i]) {
            if (spec.walls.count(c)) continue;
            if (owner.count(c)) overlaps += " " + cell_name(c);
            owner[c] = i;
        }
    std::string gaps;
    for (Cell c : model.cell_of_state)
        if (!owner.count(c)) gaps += " " + cell_name(c);
    if (!overlaps.empty() || !gaps.empty()) {
        std::string msg = "rooms do not partition the free cells;";
        if (!overlaps.empty()) msg += " claimed twice:" + overlaps + ";";
        if (!gaps.empty()) msg += " uncovered:" + gaps;
        throw std::invalid_argument(msg);
    }

    Partition pi;
    pi.regions.resize(rooms.size());
    for (StateId s = 0; s < model.mdp.num_states(); ++s)
        pi.regions[owner.at(model.cell_of_state[s])].push_back(s);
    std::erase_if(pi.regions, [](const auto& r) { return r.empty(); });
    return pi;
}

RDivision grid_r_division(const GridSpec& spec, const GridModel& model, long r) {
    if (r < 4) throw std::invalid_argument("r must be at least 4");
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(r))));
    const int tiles_x = (spec.width + side - 1) / side;
    const int tiles_y = (spec.height + side - 1) / side;

    RDivision div;
    div.tile_side = side;
    std::vector<std::vector<StateId>> regions(static_cast<size_t>(tiles_x) * tiles_y);
    for (StateId s = 0; s < model.mdp.num_states(); ++s) {
        Cell c = model.cell_of_state[s];
        regions[(c.y / side) * tiles_x + (c.x / side)].push_back(s);
    }
    for (auto& region : regions)
        if (!region.empty()) div.partition.regions.push_back(std::move(region));
    div.degenerate = div.partition.num_regions() <= 1;
    return div;
}

GridSpec four_room_spec(int width, int height, unsigned seed, int num_targets, int num_restricted) {
    if (width < 3 || height < 3) throw std::invalid_argument("four-room grid needs width and height of at least 3");
    GridSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = seed;

    const int wx = width / 2, wy = height / 2;
    std::mt19937 rng(seed);
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };

    for (int y = 0; y < height; ++y) spec.walls.insert({wx, y});
    for (int x = 0; x < width; ++x) spec.walls.insert({x, wy});
    spec.walls.erase({wx, pick(0, wy - 1)});
    spec.walls.erase({wx, pick(wy + 1, height - 1)});
    spec.walls.erase({pick(0, wx - 1), wy});
    spec.walls.erase({pick(wx + 1, width - 1), wy});

    auto place = [&](std::set<Cell>& dst, int count) {
        while (static_cast<int>(dst.size()) < count) {
            Cell c{pick(0, width - 1), pick(0, height - 1)};
            if (spec.walls.count(c) || spec.targets.count(c) || spec.restricted.count(c)) continue;
            dst.insert(c);
        }
    };
    place(spec.targets, num_targets);
    place(spec.restricted, num_restricted);
    return spec;
}

std::vector<std::set<Cell>> four_room_rooms(const GridSpec& spec) {
    const int wx = spec.width / 2, wy = spec.height / 2;
    std::vector<std::set<Cell>> rooms(4);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            Cell c{x, y};
            if (spec.walls.count(c)) continue;
            // Doorway cells sitting on a wall line join the room below/left.
            rooms[(x <= wx ? 0 : 1) + (y <= wy ? 0 : 2)].insert(c);
        }
    return rooms;
}

GridSpec random_grid_spec(int width, int height, unsigned seed, double wall_density,
                          int num_targets, int num_restricted) {
    GridSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = seed;
    std::mt19937 rng(seed);
    auto unit = [&] { return static_cast<double>(rng()) / 4294967296.0; };
    auto pick = [&](int hi) { return static_cast<int>(rng() % static_cast<unsigned>(hi)); };

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (unit() < wall_density) spec.walls.insert({x, y});
    if (static_cast<int>(spec.walls.size()) == width * height) spec.walls.erase(*spec.walls.begin());

    auto place = [&](std::set<Cell>& dst, int count) {
        while (static_cast<int>(dst.size()) < count) {
            Cell c{pick(width), pick(height)};
            if (spec.walls.count(c) || spec.targets.count(c) || spec.restricted.count(c)) continue;
            dst.insert(c);
        }
    };
    place(spec.targets, num_targets);
    place(spec.restricted, num_restricted);

    const Terrain all[4] = {Terrain::Pavement, Terrain::Grass, Terrain::Gravel, Terrain::Sand};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            Cell c{x, y};
            if (!spec.walls.count(c)) spec.terrain[c] = all[pick(4)];
        }
    return spec;
}

} // namespace dmdp
