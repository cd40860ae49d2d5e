#include "ptawcet/accel.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "ptawcet/error.hpp"

namespace ptawcet {

namespace {

// Relative tolerance for threshold comparisons on probabilities: decimal
// weights are not exact in binary, so p^2 <= p*p must not miss by one ulp.
constexpr double kRelEps = 1e-9;

bool leq(double a, double b) { return a <= b * (1.0 + kRelEps); }

std::string fmt(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

std::optional<FixedPoint> detect_cycle(const PathStep& candidate,
                                       const std::vector<PathStep>& path, const Pta& pta) {
    const SymState& cand = candidate.state;
    if (cand.cnt < 2) return std::nullopt;  // needs a non-transient ancestor

    // Path indices of earlier visits to the candidate's location.
    std::vector<std::size_t> occurrences;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i].state.loc == cand.loc) occurrences.push_back(i);
    }
    if (occurrences.empty()) return std::nullopt;

    // The segment since the previous visit is one full turn of the loop the
    // path is winding through; flatness makes it the location's only cycle.
    std::size_t seg = occurrences.back();
    std::vector<int> cycle_locations;
    std::vector<int> cycle_edges;
    for (std::size_t i = seg; i < path.size(); ++i) {
        cycle_locations.push_back(path[i].state.loc);
        if (i > seg) cycle_edges.push_back(path[i].via_edge);
    }
    cycle_edges.push_back(candidate.via_edge);

    std::vector<int> active = active_clocks(pta, cycle_locations);
    Dbm cand_proj = cand.zone.project(active);

    // Nearest ancestor first; first-iteration zones (cnt = 0) are still
    // transient and never anchor a fixed point.
    for (auto it = occurrences.rbegin(); it != occurrences.rend(); ++it) {
        const SymState& anc = path[*it].state;
        if (anc.cnt < 1) continue;
        if (anc.zone.project(active) == cand_proj) {
            FixedPoint fp;
            fp.earlier = anc;
            fp.later = cand;
            fp.cycle_locations = cycle_locations;
            fp.cycle_edges = cycle_edges;
            fp.active = active;
            return fp;
        }
    }
    return std::nullopt;
}

CycleClass classify(const FixedPoint& fp) {
    int gap = fp.later.cnt - fp.earlier.cnt;
    if (fp.later.cnt <= 3 || gap == 1) return {CycleClass::Kind::Constant, 1};
    return {CycleClass::Kind::Periodic, gap};
}

std::int64_t compute_n(double sigma, double initial_prob, double delta) {
    if (sigma >= 1.0) {
        throw AnalysisError(AnalysisError::Kind::NonConvergingCycle,
                            "cycle weight product " + fmt(sigma) + " does not converge");
    }
    if (leq(initial_prob, delta)) return 0;
    // Logarithmic guess, then nudge until the threshold is tight under leq.
    double guess = std::ceil(std::log(delta / initial_prob) / std::log(sigma));
    std::int64_t n = guess > 0 ? static_cast<std::int64_t>(guess) : 0;
    while (!leq(initial_prob * std::pow(sigma, static_cast<double>(n)), delta)) ++n;
    while (n > 0 && leq(initial_prob * std::pow(sigma, static_cast<double>(n - 1)), delta)) --n;
    return n;
}

DelayFormula synth_formula(const FixedPoint& fp, const CycleClass& cls, const Pta& pta,
                           const std::vector<Dbm>& zone_history, double anchor_alpha) {
    int m = static_cast<int>(fp.cycle_edges.size());
    int period = cls.kind == CycleClass::Kind::Periodic ? cls.period : 1;
    if (zone_history.size() != static_cast<std::size_t>(period * m + 1)) {
        throw AnalysisError(AnalysisError::Kind::Usage,
                            "zone history must cover one full period of the cycle");
    }

    // Maximal dwell before step c of the iteration starting at history entry
    // j * m; unbounded dwell on the loop means unbounded expected time.
    auto dwell = [&](int j, int c) -> double {
        try {
            return static_cast<double>(
                clk_advance(zone_history[j * m + c], zone_history[j * m + c + 1]));
        } catch (const AnalysisError&) {
            int loc = fp.cycle_locations[c];
            throw AnalysisError(AnalysisError::Kind::WcetUnbounded,
                                "unbounded dwell on the cycle through location '" +
                                    pta.locations[loc].name + "'");
        }
    };

    DelayFormula f;
    f.initial_prob = anchor_alpha;
    f.start = fp.later.cnt - 1;
    f.period = period;
    f.sigma = 1.0;
    for (int e : fp.cycle_edges) f.sigma *= pta.edges[e].weight;

    // Blocks are anchored at the candidate's parent, i.e. the loop rotated to
    // fire its closing edge first.  Block `start + a` therefore takes the
    // closing step of iteration start + a followed by the first m - 1 steps
    // of iteration start + a + 1; each delay is read from the recorded
    // iteration congruent to it modulo the period.
    for (int phi = 0; phi < period; ++phi) {
        std::vector<DelayFormula::Term> terms;
        terms.push_back({1.0, dwell((period - 1 + phi) % period, m - 1)});
        double prefix = pta.edges[fp.cycle_edges[m - 1]].weight;
        for (int c = 0; c + 1 < m; ++c) {
            terms.push_back({prefix, dwell(phi, c)});
            prefix *= pta.edges[fp.cycle_edges[c]].weight;
        }
        f.phases.push_back(std::move(terms));
    }
    return f;
}

namespace {

double phase_delay(const DelayFormula& f, int phi) {
    double d = 0.0;
    for (const auto& t : f.phases[phi]) d += t.prefix * t.t_max;
    return d;
}

}  // namespace

double eval_formula(const DelayFormula& f, std::int64_t n) {
    std::int64_t span = n - f.start;
    if (span < 0) return 0.0;
    int period = static_cast<int>(f.phases.size());
    double ratio = std::pow(f.sigma, period);
    double total = 0.0;
    for (int phi = 0; phi < period && phi <= span; ++phi) {
        // Blocks congruent to phi: a geometric series in sigma^period.
        std::int64_t count = (span - phi) / period + 1;
        double geo = ratio == 1.0 ? static_cast<double>(count)
                                  : (1.0 - std::pow(ratio, static_cast<double>(count))) /
                                        (1.0 - ratio);
        total += f.initial_prob * std::pow(f.sigma, phi) * phase_delay(f, phi) * geo;
    }
    return total;
}

double eval_formula_naive(const DelayFormula& f, std::int64_t n) {
    std::int64_t span = n - f.start;
    if (span < 0) return 0.0;
    int period = static_cast<int>(f.phases.size());
    double weight = f.initial_prob;
    double total = 0.0;
    for (std::int64_t a = 0; a <= span; ++a) {
        total += weight * phase_delay(f, static_cast<int>(a % period));
        weight *= f.sigma;
    }
    return total;
}

namespace {

// Linear growth of a single difference bound: infinities stay put, finite
// bounds keep their strictness and move by rate per iteration.
Bound stretch(Bound base, std::int64_t rate, std::int64_t steps) {
    if (base.is_inf()) return base;
    std::int64_t value = base.value() + rate * steps;
    return base.is_strict() ? Bound::strict(value) : Bound::weak(value);
}

}  // namespace

Dbm accelerate_zone_constant(const Dbm& d_km1, const Dbm& d_k, std::int64_t k,
                             std::int64_t n) {
    if (d_km1.dim() != d_k.dim() || n < k) {
        throw AnalysisError(AnalysisError::Kind::Usage, "invalid extrapolation arguments");
    }
    std::int64_t steps = n - k;
    Dbm out = d_k;
    int dim = d_k.dim();
    for (int z = 1; z < dim; ++z) {
        // Absolute bounds drift by their per-iteration difference.
        if (!d_k.at(z, 0).is_inf() && !d_km1.at(z, 0).is_inf()) {
            out.set(z, 0, stretch(d_k.at(z, 0), d_k.at(z, 0).value() - d_km1.at(z, 0).value(),
                                  steps));
        }
        if (!d_k.at(0, z).is_inf() && !d_km1.at(0, z).is_inf()) {
            out.set(0, z, stretch(d_k.at(0, z), d_k.at(0, z).value() - d_km1.at(0, z).value(),
                                  steps));
        }
    }
    // Clock differences get a safe linear over-approximation; closure tightens
    // them back against the exact absolute rows.
    for (int z1 = 1; z1 < dim; ++z1) {
        for (int z2 = 1; z2 < dim; ++z2) {
            if (z1 == z2 || d_k.at(z1, z2).is_inf()) continue;
            if (d_k.at(z1, 0).is_inf() || d_k.at(0, z2).is_inf()) continue;
            std::int64_t rate = d_k.at(z1, 0).value() - d_k.at(0, z2).value();
            if (rate < 0) rate = 0;
            out.set(z1, z2, stretch(d_k.at(z1, z2), rate, steps));
        }
    }
    if (!out.close()) {
        throw AnalysisError(AnalysisError::Kind::AccelerationInconsistent,
                            "extrapolated zone is empty at iteration " + fmt(double(n)));
    }
    return out;
}

Dbm accelerate_zone_periodic(const std::vector<Dbm>& history, int period, std::int64_t n) {
    if (period < 1 || history.size() != static_cast<std::size_t>(period + 1) || n < 0) {
        throw AnalysisError(AnalysisError::Kind::Usage, "invalid extrapolation arguments");
    }
    std::int64_t turns = n / period;
    int rest = static_cast<int>(n % period);
    Dbm out = history[static_cast<std::size_t>(rest)];
    if (turns == 0) return out;
    int dim = out.dim();
    const Dbm& first = history.front();
    const Dbm& last = history.back();
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (i == j || out.at(i, j).is_inf()) continue;
            // Phase value plus the per-period drift, taken over whole turns.
            if (first.at(i, j).is_inf() || last.at(i, j).is_inf()) {
                out.set(i, j, Bound::inf());
                continue;
            }
            std::int64_t drift = last.at(i, j).value() - first.at(i, j).value();
            out.set(i, j, stretch(out.at(i, j), drift, turns));
        }
    }
    if (!out.close()) {
        throw AnalysisError(AnalysisError::Kind::AccelerationInconsistent,
                            "extrapolated zone is empty at iteration " + fmt(double(n)));
    }
    return out;
}

Pta reweight(const Pta& pta, const FixedPoint& fp) {
    Pta out = pta;
    for (int ei : fp.cycle_edges) {
        const Edge& loop = pta.edges[ei];
        if (loop.weight == 1.0) continue;  // nothing branches off here

        std::vector<int> exits;
        double exit_sum = 0.0;
        for (const Edge& e : pta.edges) {
            if (e.source == loop.source && e.id != ei) {
                exits.push_back(e.id);
                exit_sum += e.weight;
            }
        }
        if (exits.empty()) {
            throw AnalysisError(AnalysisError::Kind::NoExitEdge,
                                "no exit edge to absorb the cycle mass at location '" +
                                    pta.locations[loop.source].name + "'");
        }
        // Exits absorb the loop's mass in proportion to their own weight, so
        // the distribution stays normalized once the loop edge is zeroed.
        for (int ej : exits) {
            double w = out.edges[ej].weight;
            if (w < 1.0) out.edges[ej].weight = w + w * loop.weight / exit_sum;
        }
        out.edges[ei].weight = 0.0;
    }
    return out;
}

}  // namespace ptawcet
