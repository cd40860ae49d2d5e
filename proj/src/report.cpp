#include "ptawcet/report.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "ptawcet/error.hpp"

namespace ptawcet {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

ordered_json cycle_json(const AccelRecord& rec, const Pta& pta) {
    ordered_json c;
    ordered_json locs = ordered_json::array();
    for (int l : rec.cycle_locations)
        locs.push_back(pta.locations[static_cast<std::size_t>(l)].name);
    c["locations"] = locs;
    c["class"] = rec.cls.kind == CycleClass::Kind::Periodic ? "periodic" : "constant";
    c["period"] = rec.cls.period;
    c["sigma"] = rec.sigma;
    c["initial_prob"] = rec.initial_prob;
    c["k"] = rec.k;
    c["n"] = rec.n;
    c["contribution"] = rec.contribution;
    return c;
}

ordered_json to_json(const Report& rep, const Pta& pta) {
    ordered_json j;
    j["model"] = rep.model;
    j["mode"] = rep.mode;
    j["delta"] = rep.delta;
    j["wcet"] = rep.wcet;
    j["states_explored"] = rep.states_explored;
    j["rg"] = rep.rg;
    j["terminated"] = rep.terminated;
    ordered_json cycles = ordered_json::array();
    for (const AccelRecord& rec : rep.cycles) cycles.push_back(cycle_json(rec, pta));
    j["cycles"] = cycles;
    return j;
}

std::int64_t rg_from_records(const Report& rep) {
    std::int64_t total = 0;
    for (const AccelRecord& rec : rep.cycles)
        total += (rec.n - rec.k) * static_cast<std::int64_t>(rec.cycle_locations.size());
    return total;
}

// Clock labels for zone printing: user clocks, then the elapsed-time clock.
std::vector<std::string> zone_names(const Pta& pta) {
    std::vector<std::string> names = pta.clocks;
    names.push_back("CLK");
    return names;
}

}  // namespace

std::string report_json(const Report& rep, const Pta& pta) {
    return to_json(rep, pta).dump(2) + "\n";
}

std::string compare_json(const Report& accelerated, const Report& baseline, const Pta& pta) {
    std::int64_t rg = reduction_gained(accelerated, baseline);
    ordered_json j;
    j["model"] = accelerated.model;
    j["delta"] = accelerated.delta;
    j["baseline"] = ordered_json{{"wcet", baseline.wcet},
                                 {"states_explored", baseline.states_explored}};
    j["accelerated"] = ordered_json{{"wcet", accelerated.wcet},
                                    {"states_explored", accelerated.states_explored},
                                    {"cycles", to_json(accelerated, pta)["cycles"]}};
    j["rg"] = rg;
    j["rg_formula_check"] = rg_from_records(accelerated);
    return j.dump(2) + "\n";
}

std::string report_text(const Report& rep, const Pta& pta) {
    std::ostringstream os;
    os << "model:             " << rep.model << "\n";
    os << "mode:              " << rep.mode << "\n";
    os << "delta:             " << fmt(rep.delta) << "\n";
    os << "wcet:              " << fmt(rep.wcet, 15) << "\n";
    os << "states explored:   " << rep.states_explored << "\n";
    os << "reduction gained:  " << rep.rg << "\n";
    os << "terminated:        " << (rep.terminated ? "yes" : "no") << "\n";
    os << "wall time:         " << fmt(rep.wall_ms, 3) << " ms\n";
    int i = 0;
    for (const AccelRecord& rec : rep.cycles) {
        os << "cycle " << ++i << ":";
        for (int l : rec.cycle_locations)
            os << " " << pta.locations[static_cast<std::size_t>(l)].name;
        os << "\n";
        os << "  class:           "
           << (rec.cls.kind == CycleClass::Kind::Periodic
                   ? "periodic (period " + std::to_string(rec.cls.period) + ")"
                   : "constant")
           << "\n";
        os << "  sigma:           " << fmt(rec.sigma, 12) << "\n";
        os << "  initial prob:    " << fmt(rec.initial_prob, 12) << "\n";
        os << "  detected at:     k = " << rec.k << "\n";
        os << "  truncated at:    n = " << rec.n << "\n";
        // The bound the truncation drove below delta: mass of the last
        // counted block.
        double residual =
            rec.initial_prob * std::pow(rec.sigma, static_cast<double>(rec.n - rec.k + 1));
        os << "  residual mass:   " << fmt(residual) << "\n";
        os << "  contribution:    " << fmt(rec.contribution, 15) << "\n";
    }
    return os.str();
}

std::string report_dot(const Report& rep, const Pta& pta) {
    std::vector<std::string> names = zone_names(pta);

    // Merge states that differ only in their probability mass; tree
    // exploration otherwise spreads one zone over many branches.
    struct Merged {
        int loc;
        std::string zone;
        double alpha = 0.0;
        int cnt;
    };
    std::vector<Merged> merged;
    std::map<std::tuple<int, std::string, int>, int> index;
    std::vector<int> remap(rep.nodes.size(), 0);
    for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
        const GraphNode& n = rep.nodes[i];
        std::string zone = n.zone.to_string(names);
        auto key = std::make_tuple(n.loc, zone, n.cnt);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, static_cast<int>(merged.size())).first;
            merged.push_back({n.loc, zone, 0.0, n.cnt});
        }
        merged[static_cast<std::size_t>(it->second)].alpha += n.alpha;
        remap[i] = it->second;
    }

    // Merge parallel edges the same way, keeping the strongest styling and
    // any record annotation.
    struct Styled {
        bool cycle = false;
        bool restart = false;
        int record = -1;
    };
    std::map<std::tuple<int, int, int>, Styled> edges;
    for (const GraphEdge& e : rep.edges) {
        auto key = std::make_tuple(remap[static_cast<std::size_t>(e.from)],
                                   remap[static_cast<std::size_t>(e.to)], e.edge_id);
        auto it = edges.find(key);
        if (it == edges.end()) it = edges.emplace(key, Styled{}).first;
        it->second.cycle |= e.cycle;
        it->second.restart |= e.restart;
        if (e.record >= 0) it->second.record = e.record;
    }

    std::ostringstream os;
    os << "digraph wcet {\n";
    os << "  rankdir=LR;\n";
    os << "  node [shape=box, fontname=\"Courier\"];\n";
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const Merged& n = merged[i];
        os << "  n" << i << " [label=\""
           << pta.locations[static_cast<std::size_t>(n.loc)].name << "\\n"
           << n.zone << "\\nalpha " << fmt(n.alpha) << "  visit " << n.cnt << "\"];\n";
    }
    for (const auto& [key, style] : edges) {
        auto [from, to, eid] = key;
        os << "  n" << from << " -> n" << to;
        std::string label;
        if (eid >= 0) {
            const Edge& e = pta.edges[static_cast<std::size_t>(eid)];
            label = e.action + " " + fmt(e.weight);
        }
        if (style.record >= 0) {
            const AccelRecord& rec = rep.cycles[static_cast<std::size_t>(style.record)];
            label += "\\nn = " + std::to_string(rec.n) + ", k = " + std::to_string(rec.k) +
                     ", +" + fmt(rec.contribution);
        }
        os << " [label=\"" << label << "\"";
        if (style.cycle) os << ", style=bold";
        if (style.restart) os << ", style=dashed";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace ptawcet
