#include "ptawcet/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ptawcet/error.hpp"

namespace ptawcet {

int zone_dim(const Pta& pta) { return static_cast<int>(pta.clocks.size()) + 2; }

int clk_index(const Pta& pta) { return zone_dim(pta) - 1; }

SymState initial_state(const Pta& pta) {
    SymState s;
    s.loc = pta.initial_location();
    s.zone = Dbm::zero(zone_dim(pta));
    apply_constraints(s.zone, pta.locations[static_cast<std::size_t>(s.loc)].invariant.conjuncts);
    s.zone.close();
    s.alpha = 1.0;
    return s;
}

void apply_constraints(Dbm& zone, const std::vector<AtomicConstraint>& conjuncts) {
    for (const AtomicConstraint& a : conjuncts) {
        switch (a.rel) {
            case Rel::Lt:
                zone.tighten(a.left, a.right, Bound::strict(a.bound));
                break;
            case Rel::Le:
                zone.tighten(a.left, a.right, Bound::weak(a.bound));
                break;
            case Rel::Ge:
                zone.tighten(a.right, a.left, Bound::weak(-a.bound));
                break;
            case Rel::Gt:
                zone.tighten(a.right, a.left, Bound::strict(-a.bound));
                break;
        }
    }
}

std::optional<SymState> succ(const SymState& s, const Edge& e, const Pta& pta) {
    const Location& src = pta.locations[static_cast<std::size_t>(s.loc)];
    Dbm z = s.zone;
    apply_constraints(z, src.invariant.conjuncts);
    if (!z.close()) return std::nullopt;
    z.up();
    apply_constraints(z, src.invariant.conjuncts);
    apply_constraints(z, e.guard.conjuncts);
    if (!z.close()) return std::nullopt;
    for (int x : e.resets) z.reset(x);
    apply_constraints(z, pta.locations[static_cast<std::size_t>(e.target)].invariant.conjuncts);
    if (!z.close()) return std::nullopt;
    SymState t;
    t.loc = e.target;
    t.zone = std::move(z);
    t.alpha = s.alpha * e.weight;
    return t;
}

// ---------------------------------------------------------------------------
// Runs and subruns
// ---------------------------------------------------------------------------

double subrun_maxdelay(const Subrun& r, const Pta& pta) {
    if (!pta.locations[static_cast<std::size_t>(r.final_location)].is_final)
        throw AnalysisError(AnalysisError::Kind::Usage,
                            "subrun_maxdelay: subrun does not end in a final location");
    double product = 1.0, sum = 0.0;
    for (const SubrunStep& step : r.steps) {
        product *= step.prob;
        sum += product * step.t_max;
    }
    return sum;
}

std::vector<Subrun> enumerate_subruns(const Pta& pta) {
    if (!find_simple_cycles(pta).empty())
        throw AnalysisError(AnalysisError::Kind::Usage,
                            "enumerate_subruns: model has cycles");
    std::vector<std::vector<int>> outs = out_edge_index(pta);
    int clk = clk_index(pta);
    std::vector<Subrun> result;
    Subrun current;
    std::function<void(const SymState&)> dfs = [&](const SymState& s) {
        if (pta.locations[static_cast<std::size_t>(s.loc)].is_final) {
            current.final_location = s.loc;
            result.push_back(current);
            return;
        }
        bool progressed = false;
        for (int eid : outs[static_cast<std::size_t>(s.loc)]) {
            const Edge& e = pta.edges[static_cast<std::size_t>(eid)];
            std::optional<SymState> t = succ(s, e, pta);
            if (!t) continue;
            progressed = true;
            SubrunStep step;
            step.location = s.loc;
            step.edge_id = eid;
            step.prob = e.weight;
            step.t_max = static_cast<double>(clk_advance(s.zone, t->zone));
            std::int64_t lb_s = -s.zone.at(0, clk).value();
            std::int64_t lb_t = -t->zone.at(0, clk).value();
            step.t_min = static_cast<double>(std::max<std::int64_t>(0, lb_t - lb_s));
            current.steps.push_back(step);
            dfs(*t);
            current.steps.pop_back();
        }
        if (!progressed)
            throw AnalysisError(AnalysisError::Kind::Usage,
                                "enumerate_subruns: dead end at non-final location " +
                                    pta.locations[static_cast<std::size_t>(s.loc)].name);
    };
    dfs(initial_state(pta));
    return result;
}

// ---------------------------------------------------------------------------
// Monte Carlo simulation
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Integer-time satisfaction of one conjunct.
bool concrete_sat(const AtomicConstraint& a, const std::vector<std::int64_t>& v) {
    std::int64_t lhs = v[static_cast<std::size_t>(a.left)] -
                       (a.right ? v[static_cast<std::size_t>(a.right)] : 0);
    switch (a.rel) {
        case Rel::Lt: return lhs < a.bound;
        case Rel::Le: return lhs <= a.bound;
        case Rel::Ge: return lhs >= a.bound;
        case Rel::Gt: return lhs > a.bound;
    }
    return false;
}

struct TrialResult {
    double total = 0.0;
    bool terminated = false;
};

TrialResult run_trial(const Pta& pta, const std::vector<std::vector<int>>& outs,
                      std::uint64_t seed, std::int64_t trial, std::int64_t step_budget) {
    // Per-trial stream: hash (seed, trial) once, then draw from splitmix64.
    std::uint64_t s0 = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(trial + 1);
    std::uint64_t state = splitmix64(s0);

    std::vector<std::int64_t> v(pta.clocks.size() + 1, 0);
    int loc = pta.initial_location();
    TrialResult res;

    // The initial location's invariant must admit the all-zero valuation.
    for (const AtomicConstraint& a :
         pta.locations[static_cast<std::size_t>(loc)].invariant.conjuncts)
        if (!concrete_sat(a, v)) return res;

    for (std::int64_t step = 0; step < step_budget; ++step) {
        const Location& here = pta.locations[static_cast<std::size_t>(loc)];
        if (here.is_final) {
            res.terminated = true;
            return res;
        }
        const std::vector<int>& edges = outs[static_cast<std::size_t>(loc)];
        if (edges.empty()) return res;  // stuck: no way onward

        // All edges of the distribution share one guard; dwell as long as the
        // invariant and guard upper bounds allow.
        const Edge& probe = pta.edges[static_cast<std::size_t>(edges[0])];
        bool bounded = false;
        std::int64_t dwell = 0;
        auto cap = [&](const AtomicConstraint& a) {
            if (a.right != 0) return;  // diagonals are delay-invariant
            if (a.rel != Rel::Lt && a.rel != Rel::Le) return;
            std::int64_t limit = a.bound - v[static_cast<std::size_t>(a.left)] -
                                 (a.rel == Rel::Lt ? 1 : 0);
            dwell = bounded ? std::min(dwell, limit) : limit;
            bounded = true;
        };
        for (const AtomicConstraint& a : here.invariant.conjuncts) cap(a);
        for (const AtomicConstraint& a : probe.guard.conjuncts) cap(a);
        if (!bounded || dwell < 0) return res;  // unbounded dwell or invariant broken

        for (std::size_t i = 1; i < v.size(); ++i) v[i] += dwell;
        res.total += static_cast<double>(dwell);

        // After dwelling maximally, the whole guard must hold to fire at all.
        bool enabled = true;
        for (const AtomicConstraint& a : probe.guard.conjuncts)
            enabled = enabled && concrete_sat(a, v);
        if (!enabled) return res;

        // Sample the outcome by weight.
        double u = uniform01(state), acc = 0.0;
        const Edge* chosen = &pta.edges[static_cast<std::size_t>(edges.back())];
        for (int eid : edges) {
            acc += pta.edges[static_cast<std::size_t>(eid)].weight;
            if (u < acc) {
                chosen = &pta.edges[static_cast<std::size_t>(eid)];
                break;
            }
        }
        for (int x : chosen->resets) v[static_cast<std::size_t>(x)] = 0;
        loc = chosen->target;
        for (const AtomicConstraint& a :
             pta.locations[static_cast<std::size_t>(loc)].invariant.conjuncts)
            if (!concrete_sat(a, v)) return res;  // target invariant rejects entry
    }
    return res;  // budget exhausted
}

SimStats reduce_trials(const std::vector<TrialResult>& results) {
    SimStats stats;
    stats.trials = static_cast<std::int64_t>(results.size());
    std::int64_t done = 0;
    double sum = 0.0;
    for (const TrialResult& r : results)
        if (r.terminated) {
            ++done;
            sum += r.total;
        }
    stats.terminated_fraction =
        stats.trials ? static_cast<double>(done) / static_cast<double>(stats.trials) : 0.0;
    if (done == 0) return stats;
    stats.mean = sum / static_cast<double>(done);
    if (done > 1) {
        double ss = 0.0;
        for (const TrialResult& r : results)
            if (r.terminated) {
                double d = r.total - stats.mean;
                ss += d * d;
            }
        double variance = ss / static_cast<double>(done - 1);
        stats.std_err = std::sqrt(variance / static_cast<double>(done));
    }
    return stats;
}

}  // namespace

SimStats simulate(const Pta& pta, std::int64_t trials, std::uint64_t seed,
                  std::int64_t step_budget) {
    std::vector<std::vector<int>> outs = out_edge_index(pta);
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < trials; ++t)
        results[static_cast<std::size_t>(t)] = run_trial(pta, outs, seed, t, step_budget);
    return reduce_trials(results);
}

SimStats simulate_serial(const Pta& pta, std::int64_t trials, std::uint64_t seed,
                         std::int64_t step_budget) {
    std::vector<std::vector<int>> outs = out_edge_index(pta);
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    for (std::int64_t t = 0; t < trials; ++t)
        results[static_cast<std::size_t>(t)] = run_trial(pta, outs, seed, t, step_budget);
    return reduce_trials(results);
}

}  // namespace ptawcet
