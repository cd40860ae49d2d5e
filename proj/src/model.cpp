#include "ptawcet/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <tuple>

#include "ptawcet/error.hpp"

namespace ptawcet {

namespace {

// ---------------------------------------------------------------------------
// Line tokenizer
// ---------------------------------------------------------------------------

enum class TokKind { Ident, Number, String, Arrow, Rel, Minus, Amp, Comma, End };

struct Tok {
    TokKind kind;
    std::string text;
    int col;  // 1-based
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

std::vector<Tok> tokenize(const std::string& line, int lineno) {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        int col = static_cast<int>(i) + 1;
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
        } else if (c == '#') {
            break;  // comment to end of line
        } else if (ident_start(c)) {
            std::size_t j = i;
            while (j < line.size() && ident_char(line[j])) ++j;
            out.push_back({TokKind::Ident, line.substr(i, j - i), col});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < line.size() && (std::isdigit(static_cast<unsigned char>(line[j])) ||
                                       line[j] == '.' || line[j] == 'e' || line[j] == 'E' ||
                                       ((line[j] == '+' || line[j] == '-') && j > i &&
                                        (line[j - 1] == 'e' || line[j - 1] == 'E'))))
                ++j;
            out.push_back({TokKind::Number, line.substr(i, j - i), col});
            i = j;
        } else if (c == '"') {
            std::size_t j = line.find('"', i + 1);
            if (j == std::string::npos) throw ParseError(lineno, col, "unterminated string");
            out.push_back({TokKind::String, line.substr(i + 1, j - i - 1), col});
            i = j + 1;
        } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
            out.push_back({TokKind::Arrow, "->", col});
            i += 2;
        } else if (c == '-') {
            out.push_back({TokKind::Minus, "-", col});
            ++i;
        } else if (c == '&') {
            out.push_back({TokKind::Amp, "&", col});
            ++i;
        } else if (c == ',') {
            out.push_back({TokKind::Comma, ",", col});
            ++i;
        } else if (c == '<' || c == '>') {
            if (i + 1 < line.size() && line[i + 1] == '=') {
                out.push_back({TokKind::Rel, std::string(1, c) + "=", col});
                i += 2;
            } else {
                out.push_back({TokKind::Rel, std::string(1, c), col});
                ++i;
            }
        } else if (c == '=') {
            out.push_back({TokKind::Rel, "=", col});
            ++i;
        } else {
            throw ParseError(lineno, col, std::string("unexpected character '") + c + "'");
        }
    }
    out.push_back({TokKind::End, "", static_cast<int>(line.size()) + 1});
    return out;
}

const std::set<std::string> kKeywords = {"pta",     "clocks", "location", "edge",
                                         "initial", "final",  "invariant", "action",
                                         "guard",   "reset",  "weight"};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
    Pta parse(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        bool saw_header = false;
        for (lineno_ = 1; std::getline(in, line); ++lineno_) {
            toks_ = tokenize(line, lineno_);
            pos_ = 0;
            if (peek().kind == TokKind::End) continue;
            std::string kw = expect_keyword();
            if (!saw_header && kw != "pta")
                throw ParseError(lineno_, 1, "model must start with: pta \"name\"");
            if (kw == "pta") {
                if (saw_header) throw ParseError(lineno_, 1, "duplicate pta header");
                pta_.name = expect(TokKind::String, "quoted model name").text;
                saw_header = true;
            } else if (kw == "clocks") {
                parse_clocks();
            } else if (kw == "location") {
                parse_location();
            } else if (kw == "edge") {
                parse_edge();
            } else {
                throw ParseError(lineno_, 1, "expected pta, clocks, location, or edge");
            }
            expect_end();
        }
        if (!saw_header) throw ParseError(1, 1, "model must start with: pta \"name\"");
        int initials = 0;
        for (const Location& l : pta_.locations) initials += l.is_initial ? 1 : 0;
        if (initials != 1)
            throw ParseError(lineno_, 1,
                             "model must have exactly one initial location, found " +
                                 std::to_string(initials));
        return pta_;
    }

private:
    const Tok& peek() const { return toks_[pos_]; }
    const Tok& next() { return toks_[pos_++]; }

    const Tok& expect(TokKind kind, const std::string& what) {
        if (peek().kind != kind)
            throw ParseError(lineno_, peek().col, "expected " + what);
        return next();
    }

    std::string expect_keyword() {
        const Tok& t = expect(TokKind::Ident, "keyword");
        return t.text;
    }

    void expect_end() {
        if (peek().kind != TokKind::End)
            throw ParseError(lineno_, peek().col, "trailing input: '" + peek().text + "'");
    }

    bool at_keyword(const std::string& kw) const {
        return peek().kind == TokKind::Ident && peek().text == kw;
    }

    bool at_any_keyword() const {
        return peek().kind == TokKind::Ident && kKeywords.count(peek().text) > 0;
    }

    std::string expect_name(const std::string& what) {
        const Tok& t = expect(TokKind::Ident, what);
        if (kKeywords.count(t.text))
            throw ParseError(lineno_, t.col, "'" + t.text + "' is a reserved keyword");
        return t.text;
    }

    void parse_clocks() {
        while (peek().kind != TokKind::End) {
            const Tok& t = peek();
            std::string name = expect_name("clock name");
            if (pta_.clock_id(name) != -1)
                throw ParseError(lineno_, t.col, "duplicate clock '" + name + "'");
            pta_.clocks.push_back(name);
            if (peek().kind == TokKind::Comma) next();
        }
    }

    int ensure_location(const std::string& name) {
        int idx = pta_.location_index(name);
        if (idx >= 0) return idx;
        pta_.locations.push_back(Location{name, {}, false, false});
        return static_cast<int>(pta_.locations.size()) - 1;
    }

    void parse_location() {
        const Tok& t = peek();
        std::string name = expect_name("location name");
        int idx = pta_.location_index(name);
        if (idx >= 0 && declared_.count(idx))
            throw ParseError(lineno_, t.col, "duplicate location '" + name + "'");
        idx = ensure_location(name);
        declared_.insert(idx);
        Location& loc = pta_.locations[static_cast<std::size_t>(idx)];
        while (peek().kind != TokKind::End) {
            std::string kw = expect_keyword();
            if (kw == "initial") {
                loc.is_initial = true;
            } else if (kw == "final") {
                loc.is_final = true;
            } else if (kw == "invariant") {
                int col = peek().col;
                std::vector<AtomicConstraint> conj = parse_conjunction();
                for (const AtomicConstraint& a : conj)
                    if (a.right != 0 || (a.rel != Rel::Lt && a.rel != Rel::Le))
                        throw ParseError(lineno_, col,
                                         "invariant constraints must be absolute upper "
                                         "bounds (x < c or x <= c)");
                loc.invariant.conjuncts = std::move(conj);
            } else {
                throw ParseError(lineno_, peek().col,
                                 "expected initial, final, or invariant, got '" + kw + "'");
            }
        }
    }

    void parse_edge() {
        Edge e;
        e.id = static_cast<int>(pta_.edges.size());
        e.source = ensure_location(expect_name("source location"));
        expect(TokKind::Arrow, "'->'");
        e.target = ensure_location(expect_name("target location"));
        bool have_weight = false;
        while (peek().kind != TokKind::End) {
            const Tok& kwtok = peek();
            std::string kw = expect_keyword();
            if (kw == "action") {
                if (!e.action.empty())
                    throw ParseError(lineno_, kwtok.col, "duplicate action clause");
                e.action = expect_name("action name");
            } else if (kw == "guard") {
                if (!e.guard.conjuncts.empty())
                    throw ParseError(lineno_, kwtok.col, "duplicate guard clause");
                e.guard.conjuncts = parse_conjunction();
            } else if (kw == "reset") {
                if (!e.resets.empty())
                    throw ParseError(lineno_, kwtok.col, "duplicate reset clause");
                e.resets = parse_reset_list();
            } else if (kw == "weight") {
                if (have_weight)
                    throw ParseError(lineno_, kwtok.col, "duplicate weight clause");
                e.weight = parse_weight();
                have_weight = true;
            } else {
                throw ParseError(lineno_, kwtok.col,
                                 "expected action, guard, reset, or weight, got '" + kw + "'");
            }
        }
        if (!have_weight)
            throw ParseError(lineno_, peek().col, "edge requires a weight clause");
        pta_.edges.push_back(std::move(e));
    }

    std::vector<AtomicConstraint> parse_conjunction() {
        std::vector<AtomicConstraint> out;
        while (true) {
            parse_atom(out);
            if (peek().kind != TokKind::Amp) break;
            next();
        }
        return out;
    }

    int expect_clock() {
        const Tok& t = peek();
        std::string name = expect_name("clock name");
        int id = pta_.clock_id(name);
        if (id == -1)
            throw ParseError(lineno_, t.col, "unknown identifier '" + name + "'");
        return id;
    }

    void parse_atom(std::vector<AtomicConstraint>& out) {
        AtomicConstraint a;
        a.left = expect_clock();
        if (peek().kind == TokKind::Minus) {
            next();
            a.right = expect_clock();
        }
        const Tok& rel = expect(TokKind::Rel, "comparison operator");
        a.bound = parse_integer();
        if (rel.text == "=") {
            a.rel = Rel::Le;
            out.push_back(a);
            a.rel = Rel::Ge;
            out.push_back(a);
            return;
        }
        a.rel = rel.text == "<"    ? Rel::Lt
                : rel.text == "<=" ? Rel::Le
                : rel.text == ">=" ? Rel::Ge
                                   : Rel::Gt;
        out.push_back(a);
    }

    std::int64_t parse_integer() {
        bool neg = false;
        if (peek().kind == TokKind::Minus) {
            next();
            neg = true;
        }
        const Tok& t = expect(TokKind::Number, "integer bound");
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size())
            throw ParseError(lineno_, t.col, "integer bound expected, got '" + t.text + "'");
        return neg ? -v : v;
    }

    double parse_weight() {
        const Tok& t = expect(TokKind::Number, "probability literal");
        double w = 0.0;
        try {
            std::size_t used = 0;
            w = std::stod(t.text, &used);
            if (used != t.text.size()) throw std::invalid_argument(t.text);
        } catch (const std::exception&) {
            throw ParseError(lineno_, t.col, "malformed probability '" + t.text + "'");
        }
        if (!(w > 0.0) || w > 1.0)
            throw ParseError(lineno_, t.col, "probability out of range: " + t.text);
        return w;
    }

    std::vector<int> parse_reset_list() {
        std::vector<int> out;
        out.push_back(expect_clock());
        while (peek().kind == TokKind::Comma) {
            next();
            out.push_back(expect_clock());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    Pta pta_;
    std::set<int> declared_;
    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
    int lineno_ = 1;
};

std::string rel_text(Rel r) {
    switch (r) {
        case Rel::Lt: return "<";
        case Rel::Le: return "<=";
        case Rel::Ge: return ">=";
        case Rel::Gt: return ">";
    }
    return "?";
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

void print_conjunction(std::ostringstream& os, const Pta& pta,
                       const std::vector<AtomicConstraint>& conj) {
    for (std::size_t i = 0; i < conj.size(); ++i) {
        if (i) os << " & ";
        const AtomicConstraint& a = conj[i];
        os << pta.clocks[static_cast<std::size_t>(a.left) - 1];
        if (a.right != 0) os << " - " << pta.clocks[static_cast<std::size_t>(a.right) - 1];
        os << " " << rel_text(a.rel) << " " << a.bound;
    }
}

bool constraint_lt(const AtomicConstraint& a, const AtomicConstraint& b) {
    return std::tie(a.left, a.right, a.rel, a.bound) < std::tie(b.left, b.right, b.rel, b.bound);
}

bool same_guard(const Guard& a, const Guard& b) {
    std::vector<AtomicConstraint> x = a.conjuncts, y = b.conjuncts;
    std::sort(x.begin(), x.end(), constraint_lt);
    std::sort(y.begin(), y.end(), constraint_lt);
    auto eq = [](const AtomicConstraint& p, const AtomicConstraint& q) {
        return p.left == q.left && p.right == q.right && p.rel == q.rel && p.bound == q.bound;
    };
    return std::equal(x.begin(), x.end(), y.begin(), y.end(), eq);
}

}  // namespace

// ---------------------------------------------------------------------------
// Pta accessors
// ---------------------------------------------------------------------------

int Pta::initial_location() const {
    int found = -1;
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (locations[i].is_initial) {
            if (found != -1)
                throw AnalysisError(AnalysisError::Kind::Usage, "multiple initial locations");
            found = static_cast<int>(i);
        }
    if (found == -1)
        throw AnalysisError(AnalysisError::Kind::Usage, "no initial location");
    return found;
}

int Pta::location_index(const std::string& n) const {
    for (std::size_t i = 0; i < locations.size(); ++i)
        if (locations[i].name == n) return static_cast<int>(i);
    return -1;
}

int Pta::clock_id(const std::string& n) const {
    for (std::size_t i = 0; i < clocks.size(); ++i)
        if (clocks[i] == n) return static_cast<int>(i) + 1;
    return -1;
}

std::vector<std::vector<int>> out_edge_index(const Pta& pta) {
    std::vector<std::vector<int>> out(pta.locations.size());
    for (const Edge& e : pta.edges) out[static_cast<std::size_t>(e.source)].push_back(e.id);
    return out;
}

Pta parse_model(const std::string& text) { return Parser().parse(text); }

std::string print_model(const Pta& pta) {
    std::ostringstream os;
    os << "pta \"" << pta.name << "\"\n";
    if (!pta.clocks.empty()) {
        os << "clocks ";
        for (std::size_t i = 0; i < pta.clocks.size(); ++i) {
            if (i) os << ", ";
            os << pta.clocks[i];
        }
        os << "\n";
    }
    for (const Location& l : pta.locations) {
        os << "location " << l.name;
        if (l.is_initial) os << " initial";
        if (l.is_final) os << " final";
        if (!l.invariant.conjuncts.empty()) {
            os << " invariant ";
            print_conjunction(os, pta, l.invariant.conjuncts);
        }
        os << "\n";
    }
    for (const Edge& e : pta.edges) {
        os << "edge " << pta.locations[static_cast<std::size_t>(e.source)].name << " -> "
           << pta.locations[static_cast<std::size_t>(e.target)].name;
        if (!e.action.empty()) os << " action " << e.action;
        if (!e.guard.conjuncts.empty()) {
            os << " guard ";
            print_conjunction(os, pta, e.guard.conjuncts);
        }
        if (!e.resets.empty()) {
            os << " reset ";
            for (std::size_t i = 0; i < e.resets.size(); ++i) {
                if (i) os << ", ";
                os << pta.clocks[static_cast<std::size_t>(e.resets[i]) - 1];
            }
        }
        os << " weight " << format_double(e.weight) << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::string Violation::to_string() const {
    return std::string(warning ? "warning: " : "error: ") + detail;
}

std::vector<SimpleCycle> find_simple_cycles(const Pta& pta) {
    std::vector<SimpleCycle> cycles;
    int n = static_cast<int>(pta.locations.size());
    std::vector<std::vector<int>> out = out_edge_index(pta);
    // Classic start-anchored enumeration: from each anchor s, walk simple
    // paths through locations > s and record every edge sequence closing at
    // s.  Each cycle is found once, rotated to its smallest location.
    constexpr std::size_t kCap = 64;  // plenty for flat models; guards blowup
    for (int s = 0; s < n && cycles.size() < kCap; ++s) {
        std::vector<int> loc_path{s};
        std::vector<int> edge_path;
        std::vector<bool> on_path(static_cast<std::size_t>(n), false);
        on_path[static_cast<std::size_t>(s)] = true;
        std::function<void(int)> dfs = [&](int at) {
            if (cycles.size() >= kCap) return;
            for (int eid : out[static_cast<std::size_t>(at)]) {
                const Edge& e = pta.edges[static_cast<std::size_t>(eid)];
                if (e.target == s) {
                    edge_path.push_back(eid);
                    cycles.push_back({loc_path, edge_path});
                    edge_path.pop_back();
                } else if (e.target > s && !on_path[static_cast<std::size_t>(e.target)]) {
                    on_path[static_cast<std::size_t>(e.target)] = true;
                    loc_path.push_back(e.target);
                    edge_path.push_back(eid);
                    dfs(e.target);
                    edge_path.pop_back();
                    loc_path.pop_back();
                    on_path[static_cast<std::size_t>(e.target)] = false;
                }
            }
        };
        dfs(s);
    }
    return cycles;
}

std::vector<Violation> validate(const Pta& pta) {
    std::vector<Violation> out;
    std::vector<std::vector<int>> outs = out_edge_index(pta);

    for (const Edge& e : pta.edges)
        if (!(e.weight > 0.0) || e.weight > 1.0)
            out.push_back({Violation::Code::WeightOutOfRange, false,
                           "edge " + pta.locations[static_cast<std::size_t>(e.source)].name +
                               " -> " + pta.locations[static_cast<std::size_t>(e.target)].name +
                               " has weight " + format_double(e.weight) +
                               " outside (0, 1]",
                           e.weight});

    for (std::size_t li = 0; li < pta.locations.size(); ++li) {
        const Location& loc = pta.locations[li];
        const std::vector<int>& edges = outs[li];
        if (loc.is_final && !edges.empty())
            out.push_back({Violation::Code::FinalNotTimeLocked, false,
                           "final location " + loc.name + " has outgoing edges", 0.0});
        if (edges.empty()) continue;

        const Edge& first = pta.edges[static_cast<std::size_t>(edges[0])];
        for (int eid : edges) {
            const Edge& e = pta.edges[static_cast<std::size_t>(eid)];
            if (e.action != first.action || !same_guard(e.guard, first.guard)) {
                out.push_back({Violation::Code::PurelyProbabilisticViolated, false,
                               "location " + loc.name +
                                   " mixes actions or guards across outgoing edges; they "
                                   "must form a single distribution",
                               0.0});
                break;
            }
        }

        double sum = 0.0;
        for (int eid : edges) sum += pta.edges[static_cast<std::size_t>(eid)].weight;
        if (std::abs(sum - 1.0) > 1e-12)
            out.push_back({Violation::Code::DistributionNotNormalized, false,
                           "outgoing weights of location " + loc.name + " sum to " +
                               format_double(sum) + ", expected 1",
                           sum});

        if (!loc.is_final && loc.invariant.conjuncts.empty())
            out.push_back({Violation::Code::InvariantUnbounded, true,
                           "location " + loc.name +
                               " has no invariant upper bound; delay here may be unbounded",
                           0.0});
    }

    std::vector<SimpleCycle> cycles = find_simple_cycles(pta);
    std::vector<int> cycle_count(pta.locations.size(), 0);
    for (const SimpleCycle& c : cycles)
        for (int l : c.locations) ++cycle_count[static_cast<std::size_t>(l)];
    for (std::size_t li = 0; li < pta.locations.size(); ++li)
        if (cycle_count[li] > 1)
            out.push_back({Violation::Code::FlatnessViolated, false,
                           "location " + pta.locations[li].name + " lies on " +
                               std::to_string(cycle_count[li]) +
                               " simple cycles; the model must be flat",
                           static_cast<double>(cycle_count[li])});

    for (const SimpleCycle& c : cycles) {
        // Structurally non-zeno: some clock is reset on the cycle and later
        // forced above a positive constant before the cycle can close again.
        bool safe = false;
        for (int eid : c.edges) {
            for (int z : pta.edges[static_cast<std::size_t>(eid)].resets) {
                for (int gid : c.edges)
                    for (const AtomicConstraint& a :
                         pta.edges[static_cast<std::size_t>(gid)].guard.conjuncts)
                        if (a.left == z && a.right == 0 && a.bound > 0 &&
                            (a.rel == Rel::Ge || a.rel == Rel::Gt))
                            safe = true;
            }
        }
        if (!safe) {
            std::string names;
            for (int l : c.locations)
                names += (names.empty() ? "" : ", ") + pta.locations[static_cast<std::size_t>(l)].name;
            out.push_back({Violation::Code::StructuralZenoRisk, true,
                           "cycle through " + names +
                               " never both resets a clock and guards it above zero; it "
                               "may loop without time passing",
                           0.0});
        }
    }

    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    for (const Violation& v : violations)
        if (!v.warning) return true;
    return false;
}

std::vector<int> active_clocks(const Pta& pta, const std::vector<int>& cycle_locations) {
    if (cycle_locations.empty())
        throw AnalysisError(AnalysisError::Kind::Usage, "active_clocks: empty cycle");
    std::set<int> active;
    std::size_t m = cycle_locations.size();
    for (std::size_t i = 0; i < m; ++i) {
        int from = cycle_locations[i];
        int to = cycle_locations[(i + 1) % m];
        for (const AtomicConstraint& a :
             pta.locations[static_cast<std::size_t>(from)].invariant.conjuncts) {
            active.insert(a.left);
            if (a.right != 0) active.insert(a.right);
        }
        bool connected = false;
        for (const Edge& e : pta.edges) {
            if (e.source != from || e.target != to) continue;
            connected = true;
            for (const AtomicConstraint& a : e.guard.conjuncts) {
                active.insert(a.left);
                if (a.right != 0) active.insert(a.right);
            }
        }
        if (!connected)
            throw AnalysisError(AnalysisError::Kind::Usage,
                                "active_clocks: locations do not form a cycle (no edge " +
                                    pta.locations[static_cast<std::size_t>(from)].name + " -> " +
                                    pta.locations[static_cast<std::size_t>(to)].name + ")");
    }
    return std::vector<int>(active.begin(), active.end());
}

}  // namespace ptawcet
