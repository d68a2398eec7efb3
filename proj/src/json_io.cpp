#include "dmdp/json_io.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

namespace dmdp {

namespace {

double prob_value(const nlohmann::json& v) {
    if (v.is_string()) return std::stod(v.get<std::string>());
    return v.get<double>();
}

std::map<std::string, int> name_index(const std::vector<std::string>& names, const char* what) {
    std::map<std::string, int> idx;
    for (int i = 0; i < static_cast<int>(names.size()); ++i)
        if (!idx.emplace(names[i], i).second)
            throw std::invalid_argument(std::string("duplicate ") + what + " id \"" + names[i] + "\"");
    return idx;
}

int lookup(const std::map<std::string, int>& idx, const std::string& name, const char* what) {
    auto it = idx.find(name);
    if (it == idx.end()) throw std::invalid_argument(std::string("unknown ") + what + " id \"" + name + "\"");
    return it->second;
}

Cell cell_from_string(const std::string& s) {
    auto sep = s.find('_');
    if (sep == std::string::npos) throw std::invalid_argument("cell \"" + s + "\" is not of the form x_y");
    return {std::stoi(s.substr(0, sep)), std::stoi(s.substr(sep + 1))};
}

std::string cell_to_string(Cell c) { return std::to_string(c.x) + "_" + std::to_string(c.y); }

} // namespace

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void save_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

Mdp mdp_from_json(const nlohmann::json& j) {
    std::vector<std::string> states = j.at("states").get<std::vector<std::string>>();
    std::vector<std::string> actions = j.at("actions").get<std::vector<std::string>>();
    auto sidx = name_index(states, "state");
    auto aidx = name_index(actions, "action");

    std::vector<std::pair<StateId, double>> initial;
    for (const auto& [name, p] : j.at("initial").items())
        initial.emplace_back(lookup(sidx, name, "state"), prob_value(p));

    std::vector<TransitionTriplet> trans;
    for (const auto& t : j.at("transitions"))
        trans.push_back({lookup(sidx, t.at("from").get<std::string>(), "state"),
                         lookup(aidx, t.at("action").get<std::string>(), "action"),
                         lookup(sidx, t.at("to").get<std::string>(), "state"),
                         prob_value(t.at("prob"))});

    Mdp mdp = build_mdp(std::move(states), std::move(actions), initial, trans);

    if (j.contains("labels")) {
        mdp.has_labels = true;
        std::set<std::string> universe;
        for (const auto& [name, props] : j.at("labels").items()) {
            StateId s = lookup(sidx, name, "state");
            for (const auto& p : props) {
                mdp.labels[s].insert(p.get<std::string>());
                universe.insert(p.get<std::string>());
            }
        }
        if (j.contains("ap"))
            mdp.ap = j.at("ap").get<std::vector<std::string>>();
        else
            mdp.ap.assign(universe.begin(), universe.end());
        for (auto v : validate(mdp))
            if (v.rule.find("label") != std::string::npos) throw std::invalid_argument(v.str());
    }
    return mdp;
}

nlohmann::json mdp_to_json(const Mdp& mdp) {
    nlohmann::json j;
    j["states"] = mdp.state_names;
    j["actions"] = mdp.action_names;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (mdp.initial(s) > 0.0) j["initial"][mdp.state_names[s]] = mdp.initial(s);
    j["transitions"] = nlohmann::json::array();
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (const Choice& ch : mdp.choices[s])
            for (const Outcome& o : ch.outcomes)
                j["transitions"].push_back({{"from", mdp.state_names[s]},
                                            {"action", mdp.action_names[ch.action]},
                                            {"to", mdp.state_names[o.to]},
                                            {"prob", o.prob}});
    if (mdp.has_labels) {
        j["labels"] = nlohmann::json::object();
        for (StateId s = 0; s < mdp.num_states(); ++s)
            if (!mdp.labels[s].empty()) j["labels"][mdp.state_names[s]] = mdp.labels[s];
        j["ap"] = mdp.ap;
    }
    return j;
}

Mdp load_mdp(const std::string& path) { return mdp_from_json(load_json_file(path)); }
void save_mdp(const Mdp& mdp, const std::string& path) { save_json_file(mdp_to_json(mdp), path); }

Partition partition_from_json(const nlohmann::json& j, const Mdp& mdp) {
    auto sidx = name_index(mdp.state_names, "state");
    Partition pi;
    for (const auto& [region, members] : j.items()) { // nlohmann objects iterate in key order
        (void)region;
        std::vector<StateId> states;
        for (const auto& name : members) states.push_back(lookup(sidx, name.get<std::string>(), "state"));
        std::sort(states.begin(), states.end());
        pi.regions.push_back(std::move(states));
    }
    validate_partition(mdp, pi);
    return pi;
}

nlohmann::json partition_to_json(const Partition& pi, const Mdp& mdp) {
    nlohmann::json j = nlohmann::json::object();
    int width = static_cast<int>(std::to_string(pi.num_regions()).size());
    for (int i = 0; i < pi.num_regions(); ++i) {
        std::string id = std::to_string(i);
        id = "r" + std::string(width - static_cast<int>(id.size()), '0') + id;
        nlohmann::json members = nlohmann::json::array();
        for (StateId s : pi.regions[i]) members.push_back(mdp.state_names[s]);
        j[id] = members;
    }
    return j;
}

Partition load_partition(const std::string& path, const Mdp& mdp) {
    return partition_from_json(load_json_file(path), mdp);
}

void save_partition(const Partition& pi, const Mdp& mdp, const std::string& path) {
    save_json_file(partition_to_json(pi, mdp), path);
}

nlohmann::json decomposition_to_json(const Decomposition& d, const Mdp& mdp) {
    nlohmann::json j;
    nlohmann::json k0 = nlohmann::json::array();
    for (StateId s : d.k0) k0.push_back(mdp.state_names[s]);
    j["k0"] = k0;
    j["kernels"] = nlohmann::json::array();
    j["index_maps"] = nlohmann::json::array();
    auto index_map = [&](const std::vector<StateId>& set) {
        nlohmann::json m = nlohmann::json::object();
        for (int k = 0; k < static_cast<int>(set.size()); ++k) m[mdp.state_names[set[k]]] = k + 1;
        return m;
    };
    j["index_maps"].push_back(index_map(d.k0));
    for (const auto& kernel : d.kernels) {
        nlohmann::json names = nlohmann::json::array();
        for (StateId s : kernel) names.push_back(mdp.state_names[s]);
        j["kernels"].push_back(names);
        j["index_maps"].push_back(index_map(kernel));
    }
    j["m"] = d.pair_counts;
    j["n"] = d.state_counts;
    return j;
}

DeterministicAutomaton automaton_from_json(const nlohmann::json& j) {
    DeterministicAutomaton a;
    std::string type = j.at("type").get<std::string>();
    if (type == "rabin")
        a.kind = DeterministicAutomaton::Kind::Rabin;
    else if (type == "buchi")
        a.kind = DeterministicAutomaton::Kind::Buchi;
    else
        throw std::invalid_argument("automaton type must be \"rabin\" or \"buchi\"");

    a.state_names = j.at("states").get<std::vector<std::string>>();
    a.ap = j.at("ap").get<std::vector<std::string>>();
    if (a.ap.size() > 16) throw std::invalid_argument("at most 16 atomic propositions are supported");
    auto qidx = name_index(a.state_names, "automaton state");
    a.initial = lookup(qidx, j.at("initial").get<std::string>(), "automaton state");

    a.delta.assign(a.num_states(), std::vector<int>(a.num_letters(), -1));
    for (const auto& t : j.at("transitions")) {
        int from = lookup(qidx, t.at("from").get<std::string>(), "automaton state");
        int to = lookup(qidx, t.at("to").get<std::string>(), "automaton state");
        std::vector<int> letters;
        const auto& label = t.at("label");
        if (label.is_string() && label.get<std::string>() == "true") {
            for (int l = 0; l < a.num_letters(); ++l) letters.push_back(l);
        } else {
            for (const auto& subset : label)
                letters.push_back(letter_of(a, subset.get<std::vector<std::string>>()));
        }
        for (int l : letters) {
            if (a.delta[from][l] >= 0 && a.delta[from][l] != to)
                throw std::invalid_argument("conflicting transitions from " + a.state_names[from]);
            a.delta[from][l] = to;
        }
    }
    for (int q = 0; q < a.num_states(); ++q)
        for (int l = 0; l < a.num_letters(); ++l)
            if (a.delta[q][l] < 0)
                throw std::invalid_argument("transition table of " + a.state_names[q] +
                                            " is missing letter " + std::to_string(l));

    if (a.kind == DeterministicAutomaton::Kind::Rabin) {
        for (const auto& pair : j.at("rabin_pairs")) {
            std::vector<int> js, hs;
            for (const auto& q : pair.at("J")) js.push_back(lookup(qidx, q.get<std::string>(), "automaton state"));
            for (const auto& q : pair.at("H")) hs.push_back(lookup(qidx, q.get<std::string>(), "automaton state"));
            a.rabin_pairs.emplace_back(std::move(js), std::move(hs));
        }
    } else {
        for (const auto& q : j.at("buchi"))
            a.buchi_accepting.push_back(lookup(qidx, q.get<std::string>(), "automaton state"));
    }
    validate_automaton(a);
    return a;
}

nlohmann::json automaton_to_json(const DeterministicAutomaton& a) {
    nlohmann::json j;
    j["type"] = a.kind == DeterministicAutomaton::Kind::Rabin ? "rabin" : "buchi";
    j["states"] = a.state_names;
    j["initial"] = a.state_names[a.initial];
    j["ap"] = a.ap;

    auto subset_of = [&](int letter) {
        std::vector<std::string> props;
        for (size_t b = 0; b < a.ap.size(); ++b)
            if (letter & (1 << b)) props.push_back(a.ap[b]);
        return props;
    };
    j["transitions"] = nlohmann::json::array();
    for (int q = 0; q < a.num_states(); ++q) {
        std::map<int, std::vector<int>> by_target;
        for (int l = 0; l < a.num_letters(); ++l) by_target[a.delta[q][l]].push_back(l);
        for (const auto& [to, letters] : by_target) {
            nlohmann::json t;
            t["from"] = a.state_names[q];
            t["to"] = a.state_names[to];
            if (static_cast<int>(letters.size()) == a.num_letters()) {
                t["label"] = "true";
            } else {
                nlohmann::json label = nlohmann::json::array();
                for (int l : letters) label.push_back(subset_of(l));
                t["label"] = label;
            }
            j["transitions"].push_back(t);
        }
    }

    if (a.kind == DeterministicAutomaton::Kind::Rabin) {
        j["rabin_pairs"] = nlohmann::json::array();
        for (const auto& [js, hs] : a.rabin_pairs) {
            nlohmann::json pair;
            pair["J"] = nlohmann::json::array();
            pair["H"] = nlohmann::json::array();
            for (int q : js) pair["J"].push_back(a.state_names[q]);
            for (int q : hs) pair["H"].push_back(a.state_names[q]);
            j["rabin_pairs"].push_back(pair);
        }
    } else {
        j["buchi"] = nlohmann::json::array();
        for (int q : a.buchi_accepting) j["buchi"].push_back(a.state_names[q]);
    }
    return j;
}

DeterministicAutomaton load_automaton(const std::string& path) {
    return automaton_from_json(load_json_file(path));
}

void save_automaton(const DeterministicAutomaton& a, const std::string& path) {
    save_json_file(automaton_to_json(a), path);
}

GridSpec grid_spec_from_json(const nlohmann::json& j) {
    GridSpec spec;
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<unsigned>();

    auto cell_set = [&](const char* key) {
        std::set<Cell> cells;
        if (j.contains(key))
            for (const auto& c : j.at(key)) cells.insert(cell_from_string(c.get<std::string>()));
        return cells;
    };
    spec.walls = cell_set("walls");
    spec.targets = cell_set("targets");
    spec.restricted = cell_set("restricted");
    spec.start = cell_set("start");
    if (j.contains("terrain"))
        for (const auto& [cell, name] : j.at("terrain").items())
            spec.terrain[cell_from_string(cell)] = terrain_from_name(name.get<std::string>());
    if (j.contains("labels"))
        for (const auto& [name, cells] : j.at("labels").items())
            for (const auto& c : cells) spec.labeled_regions[name].insert(cell_from_string(c.get<std::string>()));
    validate_grid_spec(spec);
    return spec;
}

nlohmann::json grid_spec_to_json(const GridSpec& spec) {
    nlohmann::json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["seed"] = spec.seed;
    auto cells_json = [](const std::set<Cell>& cells) {
        nlohmann::json a = nlohmann::json::array();
        for (Cell c : cells) a.push_back(cell_to_string(c));
        return a;
    };
    j["walls"] = cells_json(spec.walls);
    j["targets"] = cells_json(spec.targets);
    j["restricted"] = cells_json(spec.restricted);
    if (!spec.start.empty()) j["start"] = cells_json(spec.start);
    if (!spec.terrain.empty()) {
        j["terrain"] = nlohmann::json::object();
        for (const auto& [c, t] : spec.terrain) j["terrain"][cell_to_string(c)] = terrain_name(t);
    }
    if (!spec.labeled_regions.empty()) {
        j["labels"] = nlohmann::json::object();
        for (const auto& [name, cells] : spec.labeled_regions) j["labels"][name] = cells_json(cells);
    }
    return j;
}

GridSpec load_grid_spec(const std::string& path) { return grid_spec_from_json(load_json_file(path)); }
void save_grid_spec(const GridSpec& spec, const std::string& path) {
    save_json_file(grid_spec_to_json(spec), path);
}

nlohmann::json solve_report_to_json(const SolveReport& rep, const BlockLp& lp, const Mdp& mdp) {
    nlohmann::json j;
    j["x"] = nlohmann::json::object();
    long idx = 0;
    for (int b = 0; b < lp.num_blocks(); ++b)
        for (auto [s, k] : lp.col_pairs[b]) {
            std::string key = "(" + mdp.state_names[s] + "," + mdp.action_names[mdp.choices[s][k].action] + ")";
            j["x"][key] = rep.x(idx++);
        }
    j["objective"] = rep.objective;
    j["infeasibility"] = rep.infeasibility;
    j["iterations"] = rep.iterations;
    j["converged"] = rep.converged;
    return j;
}

void save_trace_csv(const std::vector<TracePoint>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "k,objective,infeasibility,primal_res,dual_res\n";
    out.precision(12);
    for (const auto& t : trace)
        out << t.k << "," << t.objective << "," << t.infeasibility << "," << t.primal_res << ","
            << t.dual_res << "\n";
}

} // namespace dmdp
