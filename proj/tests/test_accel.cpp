#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>

#include "ptawcet/accel.hpp"
#include "ptawcet/error.hpp"
#include "ptawcet/explorer.hpp"
#include "ptawcet/model.hpp"
#include "test_util.hpp"

using namespace ptawcet;
using ptawcet_test::load_model;

namespace {

FixedPoint counters_only(int earlier, int later) {
    FixedPoint fp;
    fp.earlier.cnt = earlier;
    fp.later.cnt = later;
    return fp;
}

// Steps the loop edge of a single-location cycle j times from the initial
// state, keeping every intermediate zone.
std::vector<SymState> loop_orbit(const Pta& p, int loop_edge, int count) {
    std::vector<SymState> orbit{initial_state(p)};
    for (int j = 0; j < count; ++j) {
        std::optional<SymState> next = succ(orbit.back(), p.edges[loop_edge], p);
        REQUIRE(next.has_value());
        next->cnt = orbit.back().loc == next->loc ? orbit.back().cnt + 1 : 0;
        orbit.push_back(*next);
    }
    return orbit;
}

Dbm clk_point(std::int64_t value) {
    Dbm d(2);
    d.set(1, 0, Bound::weak(value));
    d.set(0, 1, Bound::weak(-value));
    REQUIRE(d.close());
    return d;
}

}  // namespace

TEST_CASE("classification splits on iteration count and gap") {
    CycleClass c1 = classify(counters_only(1, 2));
    CHECK(c1.kind == CycleClass::Kind::Constant);
    CHECK(c1.period == 1);

    CycleClass c2 = classify(counters_only(2, 5));
    CHECK(c2.kind == CycleClass::Kind::Periodic);
    CHECK(c2.period == 3);

    // Early revisits always read as constant, whatever the gap.
    CycleClass c3 = classify(counters_only(0, 3));
    CHECK(c3.kind == CycleClass::Kind::Constant);
    CHECK(c3.period == 1);
}

TEST_CASE("truncation depth on the bundled probabilities") {
    CHECK(compute_n(0.001, 1.0, 1e-6) == 2);
    CHECK(compute_n(0.999, 1.0, 1e-6) == 13809);
    CHECK(compute_n(0.001, 0.001, 1e-6) == 1);
    CHECK(compute_n(0.999, 0.999, 1e-6) == 13808);
    CHECK(compute_n(0.5, 2e-6, 1e-6) == 1);
    CHECK(compute_n(0.5, 1e-7, 1e-6) == 0);
}

TEST_CASE("truncation depth rejects non-contracting cycles") {
    CHECK_THROWS_AS(compute_n(1.0, 0.5, 1e-6), AnalysisError);
    try {
        compute_n(1.5, 0.5, 1e-6);
        FAIL("expected an error");
    } catch (const AnalysisError& e) {
        CHECK(e.kind() == AnalysisError::Kind::NonConvergingCycle);
    }
}

TEST_CASE("truncation depth is the tight threshold") {
    std::mt19937 gen(4242);
    std::uniform_real_distribution<double> sig(0.01, 0.995);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double delta = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        double sigma = sig(gen);
        double initial = delta + uni(gen) * (1.0 - delta);
        std::int64_t n = compute_n(sigma, initial, delta);
        double at_n = initial * std::pow(sigma, static_cast<double>(n));
        CHECK(at_n <= delta * (1.0 + 1e-9));
        if (n > 0) {
            double before = initial * std::pow(sigma, static_cast<double>(n - 1));
            CHECK(before > delta * (1.0 - 1e-9));
        }
    }
}

TEST_CASE("fixed point detection on a resetting loop") {
    Pta p = load_model("geometric_c.pta");
    std::vector<SymState> orbit = loop_orbit(p, 0, 2);

    // First revisit: only a transient cnt = 0 ancestor, nothing to match.
    std::vector<PathStep> path{{orbit[0], -1}};
    CHECK_FALSE(detect_cycle({orbit[1], 0}, path, p).has_value());

    // Second revisit closes on the cnt = 1 ancestor with the same zone.
    path.push_back({orbit[1], 0});
    std::optional<FixedPoint> fp = detect_cycle({orbit[2], 0}, path, p);
    REQUIRE(fp.has_value());
    CHECK(fp->earlier.cnt == 1);
    CHECK(fp->later.cnt == 2);
    CHECK(fp->cycle_locations == std::vector<int>{0});
    CHECK(fp->cycle_edges == std::vector<int>{0});
    CHECK(fp->active == std::vector<int>{1});
}

TEST_CASE("no fixed point while active zones still drift") {
    // x is never reset and the guard keeps it active, so each turn of the
    // loop starts from a strictly later x and no two visits ever agree.
    Pta p = parse_model(
        "pta \"drift\"\nclocks x, y\nlocation L initial invariant y <= 2\n"
        "location E final\n"
        "edge L -> L action a guard y >= 1 & x >= 2 reset y weight 0.9\n"
        "edge L -> E action a guard y >= 1 & x >= 2 weight 0.1\n");
    std::vector<SymState> orbit = loop_orbit(p, 0, 3);
    std::vector<PathStep> path{{orbit[0], -1}, {orbit[1], 0}, {orbit[2], 0}};
    CHECK_FALSE(detect_cycle({orbit[3], 0}, path, p).has_value());
}

TEST_CASE("formula synthesis on the resetting loop") {
    Pta p = load_model("geometric_c.pta");
    std::vector<SymState> orbit = loop_orbit(p, 0, 2);
    std::vector<PathStep> path{{orbit[0], -1}, {orbit[1], 0}};
    std::optional<FixedPoint> fp = detect_cycle({orbit[2], 0}, path, p);
    REQUIRE(fp.has_value());

    CycleClass cls = classify(*fp);
    std::vector<Dbm> history{orbit[1].zone, orbit[2].zone};
    DelayFormula f = synth_formula(*fp, cls, p, history, orbit[1].alpha);
    CHECK(f.sigma == doctest::Approx(0.999).epsilon(1e-12));
    CHECK(f.initial_prob == doctest::Approx(0.999).epsilon(1e-12));
    CHECK(f.start == 1);
    REQUIRE(f.phases.size() == 1);
    REQUIRE(f.phases[0].size() == 1);
    CHECK(f.phases[0][0].prefix == 1.0);
    CHECK(f.phases[0][0].t_max == 1.0);

    // Truncated at n = 13809 the tail sums to just under 999.
    double tail = eval_formula(f, 13809);
    CHECK(tail == doctest::Approx(998.999).epsilon(1e-5));
    CHECK(tail == doctest::Approx(eval_formula_naive(f, 13809)).epsilon(1e-12));
}

TEST_CASE("formula synthesis flags unbounded dwell") {
    Pta p = load_model("geometric_c.pta");
    std::vector<SymState> orbit = loop_orbit(p, 0, 2);
    std::vector<PathStep> path{{orbit[0], -1}, {orbit[1], 0}};
    std::optional<FixedPoint> fp = detect_cycle({orbit[2], 0}, path, p);
    REQUIRE(fp.has_value());

    std::vector<Dbm> history{Dbm::unconstrained(3), Dbm::unconstrained(3)};
    try {
        synth_formula(*fp, classify(*fp), p, history, 1.0);
        FAIL("expected an error");
    } catch (const AnalysisError& e) {
        CHECK(e.kind() == AnalysisError::Kind::WcetUnbounded);
        CHECK(std::string(e.what()).find("Start") != std::string::npos);
    }
}

TEST_CASE("formula evaluation on pinned values") {
    // Single unit-delay phase at sigma = 0.001, anchored after one explicit
    // turn: two blocks remain below the default cutoff.
    DelayFormula f;
    f.sigma = 0.001;
    f.initial_prob = 0.001;
    f.start = 1;
    f.phases = {{{1.0, 1.0}}};
    CHECK(eval_formula(f, 2) == doctest::Approx(0.001001).epsilon(1e-12));
    CHECK(eval_formula(f, 0) == 0.0);

    // A single block collapses to initial_prob times the phase delay.
    DelayFormula g;
    g.sigma = 0.5;
    g.initial_prob = 1.0;
    g.start = 0;
    g.phases = {{{1.0, 2.0}, {0.9, 3.0}}};
    CHECK(eval_formula(g, 0) == doctest::Approx(4.7).epsilon(1e-12));
}

TEST_CASE("closed form matches naive summation") {
    std::mt19937 gen(777);
    std::uniform_real_distribution<double> sig(0.05, 0.995);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> period(1, 4);
    std::uniform_int_distribution<int> terms(1, 3);
    std::uniform_int_distribution<int> start(0, 3);
    std::uniform_int_distribution<std::int64_t> span(0, 2000);
    std::uniform_int_distribution<std::int64_t> dwell(0, 10);
    for (int trial = 0; trial < 1000; ++trial) {
        DelayFormula f;
        f.sigma = sig(gen);
        f.initial_prob = 0.001 + uni(gen) * 0.999;
        f.start = start(gen);
        f.period = period(gen);
        for (int phi = 0; phi < f.period; ++phi) {
            std::vector<DelayFormula::Term> phase;
            int count = terms(gen);
            for (int t = 0; t < count; ++t) {
                phase.push_back({0.01 + uni(gen) * 0.99, static_cast<double>(dwell(gen))});
            }
            f.phases.push_back(phase);
        }
        std::int64_t n = f.start + span(gen);
        double closed = eval_formula(f, n);
        double naive = eval_formula_naive(f, n);
        REQUIRE(std::abs(closed - naive) <= 1e-9 * std::max(1.0, std::abs(naive)));
    }
}

TEST_CASE("constant extrapolation of a drifting clock") {
    // Global clock at 5 after the first turn and 10 after the second keeps
    // drifting by 5, so 98 more turns land exactly at 500.
    Dbm far = accelerate_zone_constant(clk_point(5), clk_point(10), 2, 100);
    CHECK(far.at(1, 0) == Bound::weak(500));
    CHECK(far.at(0, 1) == Bound::weak(-500));

    // n = k is the identity, as is a fully stationary zone.
    CHECK(accelerate_zone_constant(clk_point(5), clk_point(10), 2, 2) == clk_point(10));
    CHECK(accelerate_zone_constant(clk_point(7), clk_point(7), 2, 50) == clk_point(7));
}

TEST_CASE("constant extrapolation repairs loose differences via closure") {
    Dbm d_km1(3);
    d_km1.set(1, 0, Bound::weak(0));
    d_km1.set(0, 1, Bound::weak(0));
    d_km1.set(2, 0, Bound::weak(1));
    d_km1.set(0, 2, Bound::weak(-1));
    REQUIRE(d_km1.close());
    Dbm d_k(3);
    d_k.set(1, 0, Bound::weak(0));
    d_k.set(0, 1, Bound::weak(0));
    d_k.set(2, 0, Bound::weak(2));
    d_k.set(0, 2, Bound::weak(-2));
    REQUIRE(d_k.close());

    // The difference rule alone would put CLK - x at 27616; the exact
    // absolute rows pull it back to 13809 when the result is closed.
    Dbm far = accelerate_zone_constant(d_km1, d_k, 2, 13809);
    CHECK(far.at(2, 0) == Bound::weak(13809));
    CHECK(far.at(0, 2) == Bound::weak(-13809));
    CHECK(far.at(2, 1) == Bound::weak(13809));
    CHECK(far.at(1, 2) == Bound::weak(-13809));
}

TEST_CASE("constant extrapolation matches stepping the loop") {
    Pta p = load_model("geometric_c.pta");
    std::vector<SymState> orbit = loop_orbit(p, 0, 10);
    Dbm one_more = accelerate_zone_constant(orbit[1].zone, orbit[2].zone, 2, 3);
    CHECK(one_more == orbit[3].zone);
    Dbm many_more = accelerate_zone_constant(orbit[1].zone, orbit[2].zone, 2, 10);
    CHECK(many_more == orbit[10].zone);
}

TEST_CASE("contracting bounds make the extrapolation inconsistent") {
    Dbm d_km1 = Dbm::unconstrained(2);
    d_km1.set(1, 0, Bound::weak(10));
    REQUIRE(d_km1.close());
    Dbm d_k = Dbm::unconstrained(2);
    d_k.set(1, 0, Bound::weak(5));
    REQUIRE(d_k.close());
    try {
        accelerate_zone_constant(d_km1, d_k, 2, 5);
        FAIL("expected an error");
    } catch (const AnalysisError& e) {
        CHECK(e.kind() == AnalysisError::Kind::AccelerationInconsistent);
    }
}

TEST_CASE("periodic extrapolation interleaves phase and drift") {
    // Clock values 0, 3, 5 over one period of two: seven iterations out is
    // three whole periods of drift 5 plus the phase-1 offset, i.e. 18.
    std::vector<Dbm> history{clk_point(0), clk_point(3), clk_point(5)};
    Dbm far = accelerate_zone_periodic(history, 2, 7);
    CHECK(far.at(1, 0) == Bound::weak(18));
    CHECK(far.at(0, 1) == Bound::weak(-18));

    CHECK(accelerate_zone_periodic(history, 2, 0) == history[0]);
    CHECK(accelerate_zone_periodic(history, 2, 1) == history[1]);
    CHECK(accelerate_zone_periodic(history, 2, 2) == history[2]);
    Dbm next = accelerate_zone_periodic(history, 2, 3);
    CHECK(next.at(1, 0) == Bound::weak(8));
}

TEST_CASE("reweighting folds the loop mass into its exit") {
    Pta p = load_model("geometric_c.pta");
    FixedPoint fp;
    fp.cycle_locations = {0};
    fp.cycle_edges = {0};
    Pta adjusted = reweight(p, fp);
    CHECK(adjusted.edges[0].weight == 0.0);
    CHECK(adjusted.edges[1].weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reweighting splits mass across several exits") {
    Pta p = parse_model(
        "pta \"split\"\nclocks x\nlocation S initial invariant x <= 1\n"
        "location A final\nlocation B final\n"
        "edge S -> S action a guard x >= 1 reset x weight 0.5\n"
        "edge S -> A action a guard x >= 1 weight 0.3\n"
        "edge S -> B action a guard x >= 1 weight 0.2\n");
    FixedPoint fp;
    fp.cycle_locations = {0};
    fp.cycle_edges = {0};
    Pta adjusted = reweight(p, fp);
    CHECK(adjusted.edges[0].weight == 0.0);
    CHECK(adjusted.edges[1].weight == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(adjusted.edges[2].weight == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("weight-one cycle edges are left alone") {
    Pta p = parse_model(
        "pta \"chain\"\nclocks x\nlocation S initial invariant x <= 1\n"
        "location T invariant x <= 2\nlocation E final\n"
        "edge S -> T action a guard x >= 1 reset x weight 1\n"
        "edge T -> S action b guard x >= 2 reset x weight 0.8\n"
        "edge T -> E action b guard x >= 2 weight 0.2\n");
    FixedPoint fp;
    fp.cycle_locations = {0, 1};
    fp.cycle_edges = {0, 1};
    Pta adjusted = reweight(p, fp);
    CHECK(adjusted.edges[0].weight == 1.0);
    CHECK(adjusted.edges[1].weight == 0.0);
    CHECK(adjusted.edges[2].weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a sub-certain loop without exits cannot be reweighted") {
    Pta p;
    p.name = "stuck";
    p.clocks = {"x"};
    Location only;
    only.name = "S";
    only.is_initial = true;
    p.locations.push_back(only);
    Edge loop;
    loop.id = 0;
    loop.source = 0;
    loop.target = 0;
    loop.weight = 0.7;
    p.edges.push_back(loop);
    FixedPoint fp;
    fp.cycle_locations = {0};
    fp.cycle_edges = {0};
    try {
        reweight(p, fp);
        FAIL("expected an error");
    } catch (const AnalysisError& e) {
        CHECK(e.kind() == AnalysisError::Kind::NoExitEdge);
    }
}

TEST_CASE("reweighted distributions stay normalized") {
    std::mt19937 gen(90210);
    std::uniform_real_distribution<double> uni(0.05, 1.0);
    std::uniform_int_distribution<int> fanout(2, 6);
    for (int trial = 0; trial < 1000; ++trial) {
        int edges = fanout(gen);
        std::vector<double> raw(edges);
        double sum = 0.0;
        for (double& w : raw) sum += (w = uni(gen));

        Pta p;
        p.name = "fan";
        Location s;
        s.name = "S";
        s.is_initial = true;
        p.locations.push_back(s);
        for (int i = 0; i < edges; ++i) {
            Edge e;
            e.id = i;
            e.source = 0;
            e.target = 0;
            e.weight = raw[i] / sum;
            p.edges.push_back(e);
        }
        FixedPoint fp;
        fp.cycle_locations = {0};
        fp.cycle_edges = {0};
        Pta adjusted = reweight(p, fp);
        double total = 0.0;
        for (const Edge& e : adjusted.edges) total += e.weight;
        REQUIRE(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}
