#include "ptawcet/engine.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <utility>

#include "ptawcet/error.hpp"
#include "ptawcet/explorer.hpp"

namespace ptawcet {

namespace {

constexpr double kRelEps = 1e-9;

bool leq(double a, double b) { return a <= b * (1.0 + kRelEps); }

// Depth-first exploration shared by both modes; only the cycle collapse
// differs.  The search is a tree: states are never merged across branches,
// which keeps reach probabilities and the state count well defined.
class Search {
  public:
    Search(const Pta& pta, double delta, bool accelerate)
        : pta_(pta), delta_(delta), accelerate_(accelerate) {
        rep_.model = pta.name;
        rep_.mode = accelerate ? "accel" : "baseline";
        rep_.delta = delta;
        out_.resize(pta.locations.size());
        for (const Edge& e : pta.edges) out_[static_cast<std::size_t>(e.source)].push_back(e.id);
    }

    Report run() {
        SymState root = initial_state(pta_);
        if (root.zone.is_empty()) return rep_;  // invariant excludes even time zero
        int node = add_node(root);
        rep_.states_explored = 1;
        expand({root, -1}, node);
        return rep_;
    }

  private:
    const Pta& pta_;
    double delta_;
    bool accelerate_;
    Report rep_;
    std::vector<PathStep> path_;
    std::vector<std::vector<int>> out_;

    int add_node(const SymState& s) {
        rep_.nodes.push_back({s.loc, s.zone, s.alpha, s.cnt});
        return static_cast<int>(rep_.nodes.size()) - 1;
    }

    int add_edge(int from, int to, int eid, bool cycle, bool restart) {
        rep_.edges.push_back({from, to, eid, cycle, restart, -1});
        return static_cast<int>(rep_.edges.size()) - 1;
    }

    int occurrences(int loc) const {
        int n = 0;
        for (const PathStep& p : path_) n += p.state.loc == loc ? 1 : 0;
        return n;
    }

    std::int64_t dwell(const Dbm& before, const Dbm& after, int loc) const {
        try {
            return clk_advance(before, after);
        } catch (const AnalysisError&) {
            throw AnalysisError(AnalysisError::Kind::WcetUnbounded,
                                "unbounded dwell at location '" + pta_.locations[loc].name +
                                    "'; WCET may be unbounded");
        }
    }

    void expand(PathStep cur, int node) {
        if (pta_.locations[cur.state.loc].is_final) return;
        path_.push_back(cur);

        struct Cand {
            const Edge* e;
            SymState s;
        };
        std::vector<Cand> cands;
        for (int eid : out_[static_cast<std::size_t>(cur.state.loc)]) {
            std::optional<SymState> s = succ(cur.state, pta_.edges[eid], pta_);
            if (!s) continue;
            s->cnt = occurrences(s->loc);
            cands.push_back({&pta_.edges[eid], std::move(*s)});
        }
        if (cands.empty()) {
            rep_.terminated = false;  // non-final dead end
            path_.pop_back();
            return;
        }

        // Fixed points are looked for before any edge is processed.  A
        // detected fixed point always collapses, even at negligible mass:
        // the formula truncates it consistently and the cycle is recorded.
        for (const Cand& c : cands) {
            if (c.s.cnt < 2) continue;
            std::optional<FixedPoint> fp = detect_cycle({c.s, c.e->id}, path_, pta_);
            if (fp) {
                collapse(*fp, cur, node, c.s);
                path_.pop_back();
                return;
            }
        }

        for (const Cand& c : cands) {
            std::int64_t d = dwell(cur.state.zone, c.s.zone, cur.state.loc);
            rep_.wcet += cur.state.alpha * c.e->weight * static_cast<double>(d);
            if (c.s.cnt >= 1 && leq(c.s.alpha, delta_)) {
                delta_cut(c.s, c.e->id, node);
            } else {
                int child = add_node(c.s);
                rep_.states_explored += 1;
                add_edge(node, child, c.e->id, false, false);
                expand({c.s, c.e->id}, child);
            }
        }
        path_.pop_back();
    }

    // The loop the path wound through since the previous visit of `loc`:
    // under flatness this is the location's unique simple cycle.
    std::pair<std::vector<int>, std::vector<int>> last_turn(int loc, int closing_edge) const {
        std::size_t seg = path_.size();
        while (seg > 0 && path_[seg - 1].state.loc != loc) --seg;
        if (seg == 0) {
            throw AnalysisError(AnalysisError::Kind::Usage,
                                "no previous visit of '" + pta_.locations[loc].name + "'");
        }
        std::vector<int> locs;
        std::vector<int> edges;
        for (std::size_t i = seg - 1; i < path_.size(); ++i) {
            locs.push_back(path_[i].state.loc);
            if (i > seg - 1) edges.push_back(path_[i].via_edge);
        }
        edges.push_back(closing_edge);
        return {locs, edges};
    }

    struct Seed {
        SymState state;
        int via_edge;
        int attach;
    };

    void sprout(std::vector<Seed>& seeds) {
        for (Seed& s : seeds) {
            int child = add_node(s.state);
            rep_.states_explored += 1;
            add_edge(s.attach, child, s.via_edge, false, true);
            expand({s.state, s.via_edge}, child);
        }
    }

    // Collects the exit successors of one cycle position, reweighted and with
    // a fresh iteration counter.  `scale` is the probability mass restarting
    // through this position; the reweighted edge weights split it among the
    // position's exits.
    void collect_exits(const SymState& src, int cycle_edge, const Pta& rw, int attach,
                       double scale, std::vector<Seed>& seeds) {
        for (int eid : out_[static_cast<std::size_t>(src.loc)]) {
            if (eid == cycle_edge) continue;
            std::optional<SymState> t = succ(src, pta_.edges[eid], pta_);
            if (!t) continue;
            t->alpha = scale * rw.edges[static_cast<std::size_t>(eid)].weight;
            t->cnt = 0;
            seeds.push_back({std::move(*t), eid, attach});
        }
    }

    // Mass restarting through rotated cycle position i, counted from the
    // anchor: exits before the position's cycle edge fires, summed over all
    // truncated iterations.  `prefix` is the weight product of the rotated
    // edges before position i; the per-position masses telescope to the
    // anchor mass exactly.
    double restart_mass(double anchor, double prefix, int cycle_edge, double sigma) const {
        double exits = 1.0 - pta_.edges[static_cast<std::size_t>(cycle_edge)].weight;
        return anchor * prefix * exits / (1.0 - sigma);
    }

    // A revisit whose probability already dropped below delta: its dwell mass
    // is counted once more, the loop branch is pruned, and the remaining mass
    // restarts into the reweighted exits as if it left right here.  The error
    // of that shortcut is bounded by delta times the exit subtree's length.
    // No state is materialized for the revisit.
    void delta_cut(const SymState& s, int via_edge, int parent_node) {
        auto [locs, edges] = last_turn(s.loc, via_edge);
        FixedPoint pseudo;
        pseudo.cycle_locations = locs;
        pseudo.cycle_edges = edges;
        Pta rw = reweight(pta_, pseudo);
        int loop_edge = edges.front();
        std::vector<Seed> seeds;
        for (int eid : out_[static_cast<std::size_t>(s.loc)]) {
            std::optional<SymState> t = succ(s, pta_.edges[eid], pta_);
            if (!t) continue;
            std::int64_t d = dwell(s.zone, t->zone, s.loc);
            rep_.wcet += s.alpha * pta_.edges[eid].weight * static_cast<double>(d);
        }
        collect_exits(s, loop_edge, rw, parent_node, s.alpha, seeds);
        sprout(seeds);
    }

    // True if the per-step delays of the last `gap` iterations all agree, in
    // which case a constant-delay reading of the window is sound.
    bool window_uniform(const std::vector<std::size_t>& occ, const SymState& cand, int gap,
                        int m) const {
        auto zone_at = [&](std::size_t idx) -> const Dbm& {
            return idx < path_.size() ? path_[idx].state.zone : cand.zone;
        };
        int k = static_cast<int>(occ.size());
        for (int j = k - gap; j + 1 < k; ++j) {
            for (int c = 0; c < m; ++c) {
                std::size_t ia = occ[static_cast<std::size_t>(j)] + static_cast<std::size_t>(c);
                std::size_t ib =
                    occ[static_cast<std::size_t>(j + 1)] + static_cast<std::size_t>(c);
                int loc = path_[ia].state.loc;
                std::int64_t da = dwell(zone_at(ia), zone_at(ia + 1), loc);
                std::int64_t db = dwell(zone_at(ib), zone_at(ib + 1), loc);
                if (da != db) return false;
            }
        }
        return true;
    }

    void collapse(const FixedPoint& fp, const PathStep& cur, int node, const SymState& cand) {
        int k = fp.later.cnt;
        int m = static_cast<int>(fp.cycle_edges.size());
        int head = fp.cycle_locations.front();

        std::vector<std::size_t> occ;
        for (std::size_t i = 0; i < path_.size(); ++i) {
            if (path_[i].state.loc == head) occ.push_back(i);
        }

        CycleClass cls = classify(fp);
        int gap = k - fp.earlier.cnt;
        if (cls.kind == CycleClass::Kind::Constant && gap > 1 &&
            !window_uniform(occ, cand, gap, m)) {
            cls = {CycleClass::Kind::Periodic, gap};  // delays disagree across the window
        }
        int kp = cls.kind == CycleClass::Kind::Periodic ? cls.period : 1;

        std::size_t base = occ[static_cast<std::size_t>(k - kp)];
        if (path_.size() - base != static_cast<std::size_t>(kp * m)) {
            throw AnalysisError(AnalysisError::Kind::Usage,
                                "cycle structure changed between visits of '" +
                                    pta_.locations[head].name + "'");
        }
        std::vector<Dbm> history;
        for (std::size_t i = base; i < path_.size(); ++i) history.push_back(path_[i].state.zone);
        history.push_back(cand.zone);

        DelayFormula f = synth_formula(fp, cls, pta_, history, cur.state.alpha);
        std::int64_t n_rel = compute_n(f.sigma, f.initial_prob, delta_);
        std::int64_t n = f.start + n_rel;
        Pta rw = reweight(pta_, fp);

        if (accelerate_) {
            try {
                collapse_formula(fp, cls, f, node, n_rel, n, rw, occ, cand);
                return;
            } catch (const AnalysisError& e) {
                if (e.kind() != AnalysisError::Kind::AccelerationInconsistent) throw;
                // fall through to the explicit unroll; no cycle record then,
                // so the reduction bookkeeping stays consistent
            }
            collapse_explicit(fp, cls, f, cur, node, n_rel, n, rw, false);
        } else {
            collapse_explicit(fp, cls, f, cur, node, n_rel, n, rw, true);
        }
    }

    // Accelerated collapse: closed-form contribution, extrapolated final
    // turn, reweighted seeds.  Everything is computed transiently before the
    // report is touched, so AccelerationInconsistent can still fall back to
    // the explicit unroll.
    void collapse_formula(const FixedPoint& fp, const CycleClass& cls, const DelayFormula& f,
                          int node, std::int64_t n_rel, std::int64_t n, const Pta& rw,
                          const std::vector<std::size_t>& occ, const SymState& cand) {
        int k = fp.later.cnt;
        int m = static_cast<int>(fp.cycle_edges.size());
        double contribution = eval_formula(f, n);

        // Head zone of the last materialized turn, iteration n.
        Dbm z0{1};
        if (cls.kind == CycleClass::Kind::Constant) {
            const Dbm& prev = path_[occ[static_cast<std::size_t>(k - 1)]].state.zone;
            z0 = accelerate_zone_constant(prev, cand.zone, k, n);
        } else {
            std::vector<Dbm> heads;
            for (int j = k - cls.period; j < k; ++j) {
                heads.push_back(path_[occ[static_cast<std::size_t>(j)]].state.zone);
            }
            heads.push_back(cand.zone);
            z0 = accelerate_zone_periodic(heads, cls.period, n - (k - cls.period));
        }

        auto blocked = [&](int loc) {
            return AnalysisError(AnalysisError::Kind::AccelerationInconsistent,
                                 "extrapolated cycle step is disabled at '" +
                                     pta_.locations[loc].name + "'");
        };

        // Walk the remaining m - 1 steps of that turn on real successor
        // zones, starting from the extrapolated head.
        std::vector<SymState> walk;
        SymState w;
        w.loc = fp.cycle_locations.front();
        w.zone = z0;
        w.alpha = f.initial_prob * std::pow(f.sigma, static_cast<double>(n_rel - 1)) *
                  pta_.edges[static_cast<std::size_t>(fp.cycle_edges.back())].weight;
        w.cnt = static_cast<int>(n);
        walk.push_back(std::move(w));
        for (int c = 0; c + 1 < m; ++c) {
            std::optional<SymState> next =
                succ(walk.back(), pta_.edges[static_cast<std::size_t>(fp.cycle_edges[c])], pta_);
            if (!next) throw blocked(walk.back().loc);
            next->cnt = static_cast<int>(n);
            walk.push_back(std::move(*next));
        }

        // Seeds leave from the turn's closing position and from the phantom
        // positions one step beyond it; attach is a walk index for now.
        std::vector<Seed> seeds;
        SymState pos = walk.back();
        double prefix = 1.0;
        for (int i = 0; i < m; ++i) {
            int cyc = fp.cycle_edges[static_cast<std::size_t>((m - 1 + i) % m)];
            collect_exits(pos, cyc, rw, i == 0 ? m - 1 : i - 1,
                          restart_mass(f.initial_prob, prefix, cyc, f.sigma), seeds);
            if (i + 1 < m) {
                std::optional<SymState> next =
                    succ(pos, pta_.edges[static_cast<std::size_t>(cyc)], pta_);
                if (!next) throw blocked(pos.loc);
                prefix *= pta_.edges[static_cast<std::size_t>(cyc)].weight;
                pos = std::move(*next);
            }
        }

        // Commit: materialize the walk, record the cycle, then resume from
        // the seeds.
        std::vector<int> walk_nodes;
        int prev = node;
        for (int c = 0; c < m; ++c) {
            int id = add_node(walk[static_cast<std::size_t>(c)]);
            rep_.states_explored += 1;
            int via = c == 0 ? fp.cycle_edges.back() : fp.cycle_edges[static_cast<std::size_t>(c - 1)];
            int ge = add_edge(prev, id, via, true, false);
            if (c == 0) {
                rep_.edges[static_cast<std::size_t>(ge)].record =
                    static_cast<int>(rep_.cycles.size());
            }
            walk_nodes.push_back(id);
            prev = id;
        }
        for (Seed& s : seeds) s.attach = walk_nodes[static_cast<std::size_t>(s.attach)];

        rep_.wcet += contribution;
        rep_.rg += (n - k) * m;
        AccelRecord rec;
        rec.cycle_locations = fp.cycle_locations;
        rec.cls = cls;
        rec.sigma = f.sigma;
        rec.initial_prob = f.initial_prob;
        rec.k = k;
        rec.n = n;
        rec.contribution = contribution;
        for (const Seed& s : seeds) rec.final_states.push_back(s.state);
        rep_.cycles.push_back(std::move(rec));

        sprout(seeds);
    }

    // Reference collapse: steps through the same blocks with real zones,
    // counting every branch's dwell, and seeds the exits of the final
    // (phantom) block.  The term set is identical to the closed form's.
    void collapse_explicit(const FixedPoint& fp, const CycleClass& cls, const DelayFormula& f,
                           const PathStep& cur, int node, std::int64_t n_rel, std::int64_t n,
                           const Pta& rw, bool record) {
        int k = fp.later.cnt;
        int m = static_cast<int>(fp.cycle_edges.size());
        double contribution = 0.0;

        SymState cursor = cur.state;
        int cursor_node = node;
        int entry_edge = -1;
        std::vector<Seed> seeds;
        double prefix = 1.0;
        for (std::int64_t a = 0; a <= n_rel; ++a) {
            for (int i = 0; i < m; ++i) {
                int cyc = fp.cycle_edges[static_cast<std::size_t>((m - 1 + i) % m)];
                std::optional<SymState> next =
                    succ(cursor, pta_.edges[static_cast<std::size_t>(cyc)], pta_);
                if (!next) {
                    throw AnalysisError(AnalysisError::Kind::AccelerationInconsistent,
                                        "cycle step unexpectedly disabled at '" +
                                            pta_.locations[cursor.loc].name + "'");
                }
                std::int64_t d = dwell(cursor.zone, next->zone, cursor.loc);
                for (int eid : out_[static_cast<std::size_t>(cursor.loc)]) {
                    contribution +=
                        cursor.alpha * pta_.edges[static_cast<std::size_t>(eid)].weight *
                        static_cast<double>(d);
                }
                if (a == n_rel) {
                    collect_exits(cursor, cyc, rw, cursor_node,
                                  restart_mass(f.initial_prob, prefix, cyc, f.sigma), seeds);
                    prefix *= pta_.edges[static_cast<std::size_t>(cyc)].weight;
                    cursor = std::move(*next);  // phantom continuation
                } else {
                    next->cnt = static_cast<int>(k + a);
                    int child = add_node(*next);
                    rep_.states_explored += 1;
                    int ge = add_edge(cursor_node, child, cyc, true, false);
                    if (entry_edge < 0) entry_edge = ge;
                    cursor = std::move(*next);
                    cursor_node = child;
                }
            }
        }

        rep_.wcet += contribution;
        if (record) {
            if (entry_edge >= 0) {
                rep_.edges[static_cast<std::size_t>(entry_edge)].record =
                    static_cast<int>(rep_.cycles.size());
            }
            AccelRecord rec;
            rec.cycle_locations = fp.cycle_locations;
            rec.cls = cls;
            rec.sigma = f.sigma;
            rec.initial_prob = f.initial_prob;
            rec.k = k;
            rec.n = n;
            rec.contribution = contribution;
            for (const Seed& s : seeds) rec.final_states.push_back(s.state);
            rep_.cycles.push_back(std::move(rec));
        }
        sprout(seeds);
    }
};

Report explore(const Pta& pta, double delta, bool accelerate) {
    auto start = std::chrono::steady_clock::now();
    Search search(pta, delta, accelerate);
    Report rep = search.run();
    auto stop = std::chrono::steady_clock::now();
    rep.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return rep;
}

}  // namespace

Report wcet_accelerated(const Pta& pta, double delta) { return explore(pta, delta, true); }

Report wcet_baseline(const Pta& pta, double delta) { return explore(pta, delta, false); }

std::int64_t reduction_gained(const Report& accelerated, const Report& baseline) {
    if (accelerated.mode != "accel" || baseline.mode != "baseline" ||
        accelerated.model != baseline.model || accelerated.delta != baseline.delta) {
        throw AnalysisError(AnalysisError::Kind::Usage,
                            "reduction requires accel and baseline reports of the same "
                            "model and delta");
    }
    return baseline.states_explored - accelerated.states_explored;
}

bool check_termination(const Pta& pta, double delta) {
    return wcet_accelerated(pta, delta).terminated;
}

}  // namespace ptawcet
