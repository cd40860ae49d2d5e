#ifndef PTAWCET_ENGINE_HPP
#define PTAWCET_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ptawcet/accel.hpp"
#include "ptawcet/dbm.hpp"
#include "ptawcet/model.hpp"

namespace ptawcet {

// A materialized state of the exploration, kept for graph export.
struct GraphNode {
    int loc = 0;
    Dbm zone{1};
    double alpha = 0.0;
    int cnt = 0;
};

struct GraphEdge {
    int from = 0;
    int to = 0;
    int edge_id = -1;
    bool cycle = false;    // part of a collapsed or unrolled cycle
    bool restart = false;  // reweighted seed after a cycle was cut off
    int record = -1;       // index into Report::cycles for annotated entries
};

// Result of one exploration; both modes fill the same shape so reports and
// cross-checks can treat them uniformly.
struct Report {
    std::string model;
    std::string mode;  // "accel" or "baseline"
    double delta = 0.0;
    double wcet = 0.0;
    std::int64_t states_explored = 0;
    std::int64_t rg = 0;  // states the acceleration avoided, 0 in baseline mode
    bool terminated = true;
    double wall_ms = 0.0;
    std::vector<AccelRecord> cycles;
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
};

// Maximum expected termination time with cycle acceleration: detected fixed
// points are collapsed into closed-form contributions and the search resumes
// from reweighted exit seeds.
Report wcet_accelerated(const Pta& pta, double delta);

// Reference explorer: identical up to detection, then unrolls each cycle
// explicitly to the same truncation depth instead of evaluating the formula.
Report wcet_baseline(const Pta& pta, double delta);

// States the acceleration avoided; both reports must describe the same model
// and delta.
std::int64_t reduction_gained(const Report& accelerated, const Report& baseline);

}  // namespace ptawcet

#endif
