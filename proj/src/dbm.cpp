#include "ptawcet/dbm.hpp"

#include <cstdlib>
#include <sstream>

#include "ptawcet/error.hpp"

namespace ptawcet {

std::string Bound::to_string() const {
    if (is_inf()) return "inf";
    std::ostringstream os;
    os << (is_strict() ? "<" : "<=") << value();
    return os.str();
}

Dbm::Dbm(int dim) : dim_(dim), m_(static_cast<std::size_t>(dim) * dim, Bound::inf()) {}

Dbm Dbm::zero(int dim) {
    Dbm z(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) z.set(i, j, Bound::zero());
    return z;
}

Dbm Dbm::unconstrained(int dim) {
    Dbm z(dim);
    for (int i = 0; i < dim; ++i) z.set(i, i, Bound::zero());
    for (int j = 0; j < dim; ++j) z.set(0, j, Bound::zero());  // x_j >= 0
    return z;
}

bool Dbm::close() {
    for (int k = 0; k < dim_; ++k)
        for (int i = 0; i < dim_; ++i) {
            Bound ik = at(i, k);
            if (ik.is_inf()) continue;
            for (int j = 0; j < dim_; ++j) {
                Bound via = ik + at(k, j);
                if (via < at(i, j)) set(i, j, via);
            }
        }
    return !is_empty();
}

bool Dbm::is_empty() const {
    for (int i = 0; i < dim_; ++i)
        if (at(i, i) < Bound::zero()) return true;
    return false;
}

void Dbm::up() {
    for (int i = 1; i < dim_; ++i) set(i, 0, Bound::inf());
}

bool Dbm::tighten(int i, int j, Bound b) {
    if (b < at(i, j)) {
        set(i, j, b);
        return true;
    }
    return false;
}

void Dbm::reset(int x) {
    for (int j = 0; j < dim_; ++j) {
        set(x, j, at(0, j));
        set(j, x, at(j, 0));
    }
}

ZoneRelation Dbm::relation(const Dbm& other) const {
    bool le = true, ge = true;
    for (std::size_t n = 0; n < m_.size(); ++n) {
        if (other.m_[n] < m_[n]) le = false;
        if (m_[n] < other.m_[n]) ge = false;
    }
    if (le && ge) return ZoneRelation::Equal;
    if (le) return ZoneRelation::Subset;
    if (ge) return ZoneRelation::Superset;
    return ZoneRelation::Incomparable;
}

Dbm Dbm::project(const std::vector<int>& keep) const {
    std::vector<int> idx;
    idx.reserve(keep.size() + 1);
    idx.push_back(0);
    idx.insert(idx.end(), keep.begin(), keep.end());
    Dbm out(static_cast<int>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out.set(static_cast<int>(i), static_cast<int>(j), at(idx[i], idx[j]));
    return out;
}

std::string Dbm::to_string(const std::vector<std::string>& names) const {
    if (is_empty()) return "false";
    if (dim_ <= 1) return "true";
    std::ostringstream os;
    for (int i = 1; i < dim_; ++i) {
        if (i > 1) os << " & ";
        Bound lo = at(0, i);  // x0 - x_i, i.e. the negated lower bound of x_i
        os << -lo.value() << (lo.is_strict() ? "<" : "<=")
           << names[static_cast<std::size_t>(i) - 1];
        Bound hi = at(i, 0);
        if (!hi.is_inf()) os << (hi.is_strict() ? "<" : "<=") << hi.value();
    }
    for (int i = 1; i < dim_; ++i)
        for (int j = 1; j < dim_; ++j) {
            if (i == j) continue;
            Bound b = at(i, j);
            if (b.is_inf() || b == at(i, 0) + at(0, j)) continue;  // implied
            os << " & " << names[static_cast<std::size_t>(i) - 1] << "-"
               << names[static_cast<std::size_t>(j) - 1] << (b.is_strict() ? "<" : "<=")
               << b.value();
        }
    return os.str();
}

std::int64_t clk_advance(const Dbm& prev, const Dbm& next) {
    if (prev.dim() != next.dim())
        throw AnalysisError(AnalysisError::Kind::Usage, "clk_advance: dimension mismatch");
    int clk = prev.dim() - 1;
    Bound a = prev.at(clk, 0), b = next.at(clk, 0);
    if (a.is_inf() || b.is_inf())
        throw AnalysisError(AnalysisError::Kind::UnboundedDelay,
                            "CLK has no finite upper bound; WCET may be unbounded");
    return std::abs(b.value() - a.value());
}

}  // namespace ptawcet
