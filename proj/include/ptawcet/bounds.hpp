#ifndef PTAWCET_BOUNDS_HPP
#define PTAWCET_BOUNDS_HPP

#include <cstdint>
#include <string>

namespace ptawcet {

// A difference bound "(value, strictness)" packed into one int64 so that the
// natural integer order coincides with bound tightness:
//   (m, <) < (m, <=) < (m+1, <)
// Encoding: raw = 2*value + (strict ? 0 : 1).  Infinity is a large sentinel
// that survives additions without overflowing.
class Bound {
public:
    static constexpr std::int64_t kInfRaw = INT64_MAX / 4;

    constexpr Bound() : raw_(kInfRaw) {}

    static constexpr Bound strict(std::int64_t value) { return Bound(2 * value); }
    static constexpr Bound weak(std::int64_t value) { return Bound(2 * value + 1); }
    static constexpr Bound inf() { return Bound(kInfRaw); }
    static constexpr Bound zero() { return weak(0); }  // (0, <=)
    static constexpr Bound from_raw(std::int64_t raw) { return Bound(raw); }

    constexpr bool is_inf() const { return raw_ >= kInfRaw; }
    constexpr bool is_strict() const { return !is_inf() && (raw_ & 1) == 0; }
    constexpr std::int64_t value() const { return raw_ >> 1; }  // floor division on purpose
    constexpr std::int64_t raw() const { return raw_; }

    // Bound addition: values add, the result is weak only if both operands are.
    friend constexpr Bound operator+(Bound a, Bound b) {
        if (a.is_inf() || b.is_inf()) return inf();
        return Bound(a.raw_ + b.raw_ - ((a.raw_ | b.raw_) & 1));
    }

    friend constexpr bool operator==(Bound a, Bound b) { return a.raw_ == b.raw_; }
    friend constexpr bool operator<(Bound a, Bound b) { return a.raw_ < b.raw_; }
    friend constexpr bool operator<=(Bound a, Bound b) { return a.raw_ <= b.raw_; }
    friend constexpr bool operator>(Bound a, Bound b) { return a.raw_ > b.raw_; }
    friend constexpr bool operator>=(Bound a, Bound b) { return a.raw_ >= b.raw_; }

    friend constexpr Bound min(Bound a, Bound b) { return a < b ? a : b; }

    std::string to_string() const;

private:
    explicit constexpr Bound(std::int64_t raw) : raw_(raw) {}
    std::int64_t raw_;
};

}  // namespace ptawcet

#endif
