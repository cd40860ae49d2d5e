#ifndef PTAWCET_EXPLORER_HPP
#define PTAWCET_EXPLORER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ptawcet/dbm.hpp"
#include "ptawcet/model.hpp"

namespace ptawcet {

// Search status of a symbolic state: unvisited, being explored (on the DFS
// path), or finished.
enum : int { kStsUnvisited = 0, kStsOpen = 1, kStsDone = 2 };

// Symbolic state of the zone-graph search.  The zone spans the reference
// clock, the user clocks, and the trailing elapsed-time clock CLK; alpha is
// the probability of reaching this state since the last chain restart; cnt
// counts completed cycle iterations at this location.
struct SymState {
    int loc = 0;
    Dbm zone{1};
    double alpha = 1.0;
    int sts = kStsUnvisited;
    int cnt = 0;
};

// Zone dimension for a model: reference + user clocks + CLK.
int zone_dim(const Pta& pta);

// Clock ids 1..|clocks| as initial DBM/valuation indices; CLK is dim-1.
int clk_index(const Pta& pta);

// Initial symbolic state: everything zero, conjoined with the initial
// location's invariant (empty zone only for degenerate invariants).
SymState initial_state(const Pta& pta);

// Tightens the zone by each conjunct; the caller re-closes.
void apply_constraints(Dbm& zone, const std::vector<AtomicConstraint>& conjuncts);

// One symbolic step: delay under the source invariant, take the edge (guard,
// resets), then conjoin the target invariant.  Returns nothing if the edge is
// disabled (empty successor zone).  alpha is multiplied by the edge weight;
// sts/cnt of the result are left at their defaults for the engine to manage.
std::optional<SymState> succ(const SymState& s, const Edge& e, const Pta& pta);

// ---------------------------------------------------------------------------
// Runs and subruns
// ---------------------------------------------------------------------------

// One step of a subrun: dwell at `location` for some time in [t_min, t_max],
// then take `edge_id` with probability `prob`.
struct SubrunStep {
    int location = 0;
    double t_min = 0.0;
    double t_max = 0.0;
    int edge_id = 0;
    double prob = 1.0;
};

struct Subrun {
    std::vector<SubrunStep> steps;
    int final_location = 0;
};

// Expected maximal delay of one subrun: each step's t_max weighted by the
// product of edge probabilities up to and including that step.  The subrun
// must end in a final location of the model.
double subrun_maxdelay(const Subrun& r, const Pta& pta);

// All subruns of an acyclic model, in DFS edge order.  Throws on cyclic
// models (enumeration would not terminate) and on branches that dead-end in a
// non-final location.
std::vector<Subrun> enumerate_subruns(const Pta& pta);

// ---------------------------------------------------------------------------
// Monte Carlo simulation
// ---------------------------------------------------------------------------

struct SimStats {
    std::int64_t trials = 0;
    double mean = 0.0;
    double std_err = 0.0;
    double terminated_fraction = 0.0;
};

// Samples `trials` concrete runs, always dwelling as long as the invariant
// and guard upper bounds permit, choosing edges by weight.  Time is integer
// valued (all bounds are integers, and maximal delays land on them; strict
// bounds round inward).  Trials that get stuck or exceed the step budget
// count as non-terminated and are excluded from the mean.  Results are
// reproducible for a fixed seed: each trial owns an RNG stream derived from
// (seed, trial index), so thread count does not affect the outcome.
SimStats simulate(const Pta& pta, std::int64_t trials, std::uint64_t seed,
                  std::int64_t step_budget = 10'000'000);

// Serial reference implementation of simulate; same trial streams, same
// sequential reduction, so its results are bit-identical to simulate's.
// Kept for testing and benchmarking the parallel version.
SimStats simulate_serial(const Pta& pta, std::int64_t trials, std::uint64_t seed,
                         std::int64_t step_budget = 10'000'000);

// True iff every explored branch (cycles truncated at probability `delta`)
// reaches a final location.
bool check_termination(const Pta& pta, double delta);

}  // namespace ptawcet

#endif
