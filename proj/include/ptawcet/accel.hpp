#ifndef PTAWCET_ACCEL_HPP
#define PTAWCET_ACCEL_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ptawcet/dbm.hpp"
#include "ptawcet/explorer.hpp"
#include "ptawcet/model.hpp"

namespace ptawcet {

// A detected zone-graph fixed point: two visits of the same location whose
// zones agree on the cycle's active clocks.
struct FixedPoint {
    SymState earlier;                 // the matched ancestor, cnt = k - gap
    SymState later;                   // the candidate revisit, cnt = k
    std::vector<int> cycle_locations;  // one iteration, fixed-point location first
    std::vector<int> cycle_edges;      // edge ids e_0..e_{m-1} along it
    std::vector<int> active;           // active clocks the zones agreed on
};

struct CycleClass {
    enum class Kind { Constant, Periodic };
    Kind kind = Kind::Constant;
    int period = 1;  // 1 for Constant, the gap k' - k for Periodic
};

// Closed-form cycle delay: evaluated as
//   sum over blocks a = start..n of
//       initial_prob * sigma^(a-start) * sum_terms(phases[(a-start) % period])
// where each phase term (prefix, t_max) contributes prefix * t_max.  Blocks
// are anchored at the state that detected the fixed point, so initial_prob is
// that state's reach probability and `start` counts the cycle iterations that
// were already explored explicitly.
struct DelayFormula {
    double sigma = 0.0;         // product of cycle edge weights
    double initial_prob = 1.0;  // probability of the anchor state
    std::int64_t start = 0;     // first block index
    int period = 1;
    struct Term {
        double prefix;  // product of edge weights earlier in the block
        double t_max;   // maximal dwell before that edge fires
    };
    std::vector<std::vector<Term>> phases;  // period entries of m terms each
};

// Everything the report needs about one accelerated cycle.
struct AccelRecord {
    std::vector<int> cycle_locations;
    CycleClass cls;
    double sigma = 0.0;
    double initial_prob = 0.0;
    std::int64_t k = 0;  // iteration at which the fixed point appeared
    std::int64_t n = 0;  // last truncated iteration
    double contribution = 0.0;
    std::vector<SymState> final_states;  // seeds the search resumed from
};

// One entry of the DFS path: the state plus the edge that produced it.
struct PathStep {
    SymState state;
    int via_edge = -1;  // -1 for the root
};

// ---------------------------------------------------------------------------
// The six acceleration steps
// ---------------------------------------------------------------------------

// Scans open ancestors (nearest first) for one at the candidate's location
// whose zone equals the candidate's on the clocks active around the loop the
// path closed.  First-iteration zones are still transient, so ancestors with
// cnt = 0 never match.  Returns the fixed point, or nothing.
std::optional<FixedPoint> detect_cycle(const PathStep& candidate,
                                       const std::vector<PathStep>& path, const Pta& pta);

// Verbatim classification on iteration counters alone: few iterations or a
// gap of one read as constant delay, anything else as periodic with the gap
// as period.  The engine additionally compares recorded per-step delays and
// overrides a Constant verdict if they disagree across the window.
CycleClass classify(const FixedPoint& fp);

// Smallest n >= 0 with initial_prob * sigma^n <= delta.  The comparison
// tolerates 1e-9 relative rounding so decimal probabilities land on the
// intended count.  Throws NonConvergingCycle if sigma >= 1.
std::int64_t compute_n(double sigma, double initial_prob, double delta);

// Builds the delay formula from the recorded window of path zones:
// zone_history holds the states from the head of iteration k - period
// through the candidate (period * m + 1 zones), and anchor_alpha is the
// reach probability of the candidate's parent.  Throws WcetUnbounded if any
// dwell in the window is unbounded.
DelayFormula synth_formula(const FixedPoint& fp, const CycleClass& cls, const Pta& pta,
                           const std::vector<Dbm>& zone_history, double anchor_alpha);

// Closed-form evaluation up to block n (geometric per phase).
double eval_formula(const DelayFormula& f, std::int64_t n);

// Term-by-term reference evaluation, kept for cross-checking the closed form.
double eval_formula_naive(const DelayFormula& f, std::int64_t n);

// Extrapolates a constant cycle's zone from its values at iterations k-1 and
// k out to iteration n: absolute rows grow linearly, diagonals are bounded by
// the printed rule and repaired by closure.  Throws AccelerationInconsistent
// if the result closes empty (the caller falls back to explicit unrolling).
Dbm accelerate_zone_constant(const Dbm& d_km1, const Dbm& d_k, std::int64_t k,
                             std::int64_t n);

// Periodic analogue over one full period of history (period + 1 zones for
// iterations c..c+period); n is relative to the first history entry.
Dbm accelerate_zone_periodic(const std::vector<Dbm>& history, int period, std::int64_t n);

// Distribution update after collapsing the cycle: exits absorb the zeroed
// cycle edges' mass, per location.  Returns the adjusted model; weights
// outside the cycle's locations are untouched.  Throws NoExitEdge if a
// sub-certain cycle edge has no sibling to take its mass.
Pta reweight(const Pta& pta, const FixedPoint& fp);

}  // namespace ptawcet

#endif
