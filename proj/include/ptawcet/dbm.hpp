#ifndef PTAWCET_DBM_HPP
#define PTAWCET_DBM_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "ptawcet/bounds.hpp"

namespace ptawcet {

// How two closed zones compare, entrywise.
enum class ZoneRelation { Equal, Subset, Superset, Incomparable };

// Difference bound matrix over clock indices 0..dim-1, where index 0 is the
// reference clock (constant zero).  Entry (i, j) bounds x_i - x_j.  All
// mutating operations except close() and tighten() preserve canonical form;
// callers that tighten entries must re-close before relying on relation(),
// project(), or emptiness.
class Dbm {
public:
    explicit Dbm(int dim);

    // All clocks exactly zero.
    static Dbm zero(int dim);
    // Only the implicit x >= 0 constraints.
    static Dbm unconstrained(int dim);

    int dim() const { return dim_; }

    Bound at(int i, int j) const { return m_[static_cast<std::size_t>(i) * dim_ + j]; }
    void set(int i, int j, Bound b) { m_[static_cast<std::size_t>(i) * dim_ + j] = b; }

    // Floyd-Warshall shortest closure.  Returns false iff the zone is empty
    // (some diagonal went negative); an empty zone's entries are unspecified.
    bool close();

    // True iff some diagonal entry is negative.  Meaningful on closed zones
    // and on zones where tighten() just introduced a contradiction.
    bool is_empty() const;

    // Delay operation: remove all upper bounds, letting time pass.
    // Preserves canonical form.
    void up();

    // Intersect with x_i - x_j <[=] b.  Returns true if the entry changed
    // (the caller must eventually re-close).
    bool tighten(int i, int j, Bound b);

    // Reset clock x to zero.  Requires canonical form; preserves it.
    void reset(int x);

    // Entrywise comparison of closed zones; Subset means this one is smaller.
    ZoneRelation relation(const Dbm& other) const;

    // Existentially project onto the reference clock plus the given clock
    // indices (sorted, each in 1..dim-1).  On a closed DBM this is just the
    // submatrix, and the result is closed.
    Dbm project(const std::vector<int>& keep) const;

    bool operator==(const Dbm& other) const { return dim_ == other.dim_ && m_ == other.m_; }
    bool operator!=(const Dbm& other) const { return !(*this == other); }

    // Human-readable conjunction such as "0<=x<=5 & 0<=y & x-y<1": one range
    // per clock in index order, then non-implied difference bounds row-major.
    // names[i] labels clock index i+1.
    std::string to_string(const std::vector<std::string>& names) const;

private:
    int dim_;
    std::vector<Bound> m_;
};

// Maximal time elapsing between two zones, read off the global elapsed-time
// clock CLK, which by convention occupies the last matrix index.  Throws
// AnalysisError(UnboundedDelay) if either CLK upper bound is infinite.
std::int64_t clk_advance(const Dbm& prev, const Dbm& next);

}  // namespace ptawcet

#endif
