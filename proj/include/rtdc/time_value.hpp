#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rtdc {

/// Exact rational time value, possibly +inf or -inf.
///
/// Stored as a reduced fraction num/den with den > 0. Infinities use den == 0
/// and num == +1 / -1. Arithmetic throws std::overflow_error instead of
/// silently wrapping, and throws std::domain_error for inf - inf.
class TimeValue {
public:
    constexpr TimeValue() noexcept = default;
    constexpr TimeValue(std::int64_t integer) noexcept : num_(integer), den_(1) {}  // NOLINT
    TimeValue(std::int64_t num, std::int64_t den);

    static constexpr TimeValue infinity() noexcept { return TimeValue(1, 0, Raw{}); }
    static constexpr TimeValue neg_infinity() noexcept { return TimeValue(-1, 0, Raw{}); }

    /// Parses "12", "-3.25", "7/4", "inf", "+inf", "-inf".
    static TimeValue parse(std::string_view text);

    /// Closest rational with the given denominator (used for sampled times).
    static TimeValue from_double(double value, std::int64_t denominator = 1'000'000);

    [[nodiscard]] constexpr bool is_finite() const noexcept { return den_ != 0; }
    [[nodiscard]] constexpr bool is_pos_inf() const noexcept { return den_ == 0 && num_ > 0; }
    [[nodiscard]] constexpr bool is_neg_inf() const noexcept { return den_ == 0 && num_ < 0; }
    [[nodiscard]] constexpr std::int64_t numerator() const noexcept { return num_; }
    [[nodiscard]] constexpr std::int64_t denominator() const noexcept { return den_; }

    [[nodiscard]] double to_double() const noexcept;
    /// "inf", "-inf", "5", "-7/4".
    [[nodiscard]] std::string to_string() const;
    /// Decimal rendering when the value has a terminating expansion of at most
    /// 15 significant digits; empty otherwise.
    [[nodiscard]] std::string to_decimal() const;

    TimeValue operator-() const noexcept { return TimeValue(-num_, den_, Raw{}); }
    friend TimeValue operator+(const TimeValue& a, const TimeValue& b);
    friend TimeValue operator-(const TimeValue& a, const TimeValue& b);
    /// Division by a positive finite value; only needed for normalisation.
    friend TimeValue operator/(const TimeValue& a, const TimeValue& b);
    TimeValue& operator+=(const TimeValue& o) { return *this = *this + o; }
    TimeValue& operator-=(const TimeValue& o) { return *this = *this - o; }

    friend std::strong_ordering operator<=>(const TimeValue& a, const TimeValue& b) noexcept;
    friend bool operator==(const TimeValue& a, const TimeValue& b) noexcept = default;

    /// floor(value) for finite values.
    [[nodiscard]] std::int64_t floor() const;

private:
    struct Raw {};
    constexpr TimeValue(std::int64_t num, std::int64_t den, Raw) noexcept : num_(num), den_(den) {}

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const TimeValue& v);

inline const TimeValue& min(const TimeValue& a, const TimeValue& b) { return b < a ? b : a; }
inline const TimeValue& max(const TimeValue& a, const TimeValue& b) { return a < b ? b : a; }

/// Closed interval [lo, hi]; either end may be infinite.
struct Interval {
    TimeValue lo;
    TimeValue hi;

    [[nodiscard]] bool empty() const noexcept { return hi < lo; }
    [[nodiscard]] bool contains(const TimeValue& v) const noexcept { return lo <= v && v <= hi; }
    [[nodiscard]] bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }
    [[nodiscard]] bool intersects(const Interval& o) const noexcept { return !(o.hi < lo || hi < o.lo); }
    friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace rtdc

template <>
struct std::hash<rtdc::TimeValue> {
    std::size_t operator()(const rtdc::TimeValue& v) const noexcept
    {
        return std::hash<std::int64_t>{}(v.numerator()) * 31u ^ std::hash<std::int64_t>{}(v.denominator());
    }
};
