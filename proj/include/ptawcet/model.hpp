#ifndef PTAWCET_MODEL_HPP
#define PTAWCET_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ptawcet {

// Clock ids double as DBM indices: 0 is the reference clock, user clocks are
// 1..|clocks|.  The engine appends the elapsed-time clock CLK after them.

enum class Rel { Lt, Le, Ge, Gt };

// One conjunct "left - right REL bound", where right == 0 makes it the
// absolute form "left REL bound".  Equalities are split in two by the parser.
struct AtomicConstraint {
    int left = 0;
    int right = 0;
    Rel rel = Rel::Le;
    std::int64_t bound = 0;
};

struct Guard {
    std::vector<AtomicConstraint> conjuncts;  // empty means true
};

// Invariants are restricted to absolute upper bounds (x < c or x <= c).
struct Invariant {
    std::vector<AtomicConstraint> conjuncts;  // empty means true
};

struct Location {
    std::string name;
    Invariant invariant;
    bool is_initial = false;
    bool is_final = false;
};

struct Edge {
    int id = 0;
    int source = 0;
    int target = 0;
    std::string action;
    Guard guard;
    std::vector<int> resets;  // clock ids, sorted
    double weight = 1.0;      // in (0, 1]
};

struct Pta {
    std::string name;
    std::vector<std::string> clocks;  // clocks[i] names clock id i+1
    std::vector<Location> locations;
    std::vector<Edge> edges;

    int initial_location() const;
    int location_index(const std::string& name) const;  // -1 if absent
    int clock_id(const std::string& name) const;        // -1 if absent
};

// Out-edge ids per location, in declaration order (the DFS order).
std::vector<std::vector<int>> out_edge_index(const Pta& pta);

// ---------------------------------------------------------------------------
// Parsing and printing
// ---------------------------------------------------------------------------

// Parses the textual model language.  Throws ParseError with line/column on
// syntax errors, duplicate names, unknown identifiers, or weights outside
// (0, 1].  Locations first mentioned as edge endpoints are created implicitly.
Pta parse_model(const std::string& text);

// Canonical text form; parse_model(print_model(p)) reconstructs p exactly.
std::string print_model(const Pta& pta);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    enum class Code {
        PurelyProbabilisticViolated,  // a location's out-edges mix actions or guards
        WeightOutOfRange,
        DistributionNotNormalized,  // carries the offending sum in `value`
        FlatnessViolated,           // a location lies on more than one simple cycle
        FinalNotTimeLocked,         // a final location has outgoing edges
        InvariantUnbounded,         // warning: delay at this location may diverge
        StructuralZenoRisk,         // warning: a cycle may loop without time passing
    };
    Code code;
    bool warning = false;
    std::string detail;
    double value = 0.0;

    std::string to_string() const;
};

// Statically checks the modelling assumptions.  Warning-level findings do not
// block analysis: an unbounded invariant, for instance, is only reported once
// the search actually derives an unbounded delay.
std::vector<Violation> validate(const Pta& pta);

bool has_errors(const std::vector<Violation>& violations);

// ---------------------------------------------------------------------------
// Structural cycle information
// ---------------------------------------------------------------------------

// One simple cycle of the location graph, as parallel sequences of locations
// and edge ids: edges[i] goes from locations[i] to locations[(i+1) % m].
struct SimpleCycle {
    std::vector<int> locations;
    std::vector<int> edges;
};

// Enumerates all simple cycles (distinct edge sequences, canonically rotated
// to start at the smallest location id).  Flat models have at most one per
// location; validate() reports FlatnessViolated otherwise.
std::vector<SimpleCycle> find_simple_cycles(const Pta& pta);

// Clocks that can influence a cycle's future: those tested by a cycle guard
// or bounded by a cycle location's invariant.  With reset-to-zero semantics
// no further closure is needed.  Throws if the locations do not form a cycle.
std::vector<int> active_clocks(const Pta& pta, const std::vector<int>& cycle_locations);

}  // namespace ptawcet

#endif
