#include "rtdc/time_value.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace rtdc {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v)
{
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw std::overflow_error("TimeValue arithmetic overflow");
    return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b)
{
    if (a < 0)
        a = -a;
    if (b < 0)
        b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

TimeValue make_reduced(i128 num, i128 den)
{
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (i128 g = gcd128(num, den); g > 1) {
        num /= g;
        den /= g;
    }
    return TimeValue(narrow(num), narrow(den));
}

}  // namespace

TimeValue::TimeValue(std::int64_t num, std::int64_t den)
{
    if (den == 0)
        throw std::domain_error("TimeValue with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    num_ = num;
    den_ = den;
}

TimeValue operator+(const TimeValue& a, const TimeValue& b)
{
    if (!a.is_finite() || !b.is_finite()) {
        if (!a.is_finite() && !b.is_finite() && a.num_ != b.num_)
            throw std::domain_error("inf - inf is undefined");
        return a.is_finite() ? b : a;
    }
    if (a.den_ == b.den_) {
        if (a.den_ == 1)
            return TimeValue(narrow(static_cast<i128>(a.num_) + b.num_), 1, TimeValue::Raw{});
        return make_reduced(static_cast<i128>(a.num_) + b.num_, a.den_);
    }
    return make_reduced(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                        static_cast<i128>(a.den_) * b.den_);
}

TimeValue operator-(const TimeValue& a, const TimeValue& b) { return a + (-b); }

TimeValue operator/(const TimeValue& a, const TimeValue& b)
{
    if (!b.is_finite() || b.num_ <= 0)
        throw std::domain_error("TimeValue division requires a positive finite divisor");
    if (!a.is_finite())
        return a;
    return make_reduced(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const TimeValue& a, const TimeValue& b) noexcept
{
    if (a.den_ == b.den_)
        return a.num_ <=> b.num_;  // also covers inf vs inf
    if (!a.is_finite())
        return a.num_ > 0 ? std::strong_ordering::greater : std::strong_ordering::less;
    if (!b.is_finite())
        return b.num_ > 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    return static_cast<i128>(a.num_) * b.den_ <=> static_cast<i128>(b.num_) * a.den_;
}

std::int64_t TimeValue::floor() const
{
    if (!is_finite())
        throw std::domain_error("floor of infinite TimeValue");
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0)
        --q;
    return q;
}

double TimeValue::to_double() const noexcept
{
    if (!is_finite())
        return num_ > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string TimeValue::to_string() const
{
    if (is_pos_inf())
        return "inf";
    if (is_neg_inf())
        return "-inf";
    if (den_ == 1)
        return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string TimeValue::to_decimal() const
{
    if (!is_finite())
        return {};
    if (den_ == 1)
        return std::to_string(num_);
    // Terminating iff den = 2^a 5^b; scale to a power of ten.
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++twos;
    }
    while (d % 5 == 0) {
        d /= 5;
        ++fives;
    }
    if (d != 1)
        return {};
    int digits = std::max(twos, fives);
    if (digits > 15)
        return {};
    i128 scale = 1;
    for (int i = 0; i < digits; ++i)
        scale *= 10;
    i128 scaled = static_cast<i128>(num_) * (scale / den_);
    bool negative = scaled < 0;
    if (negative)
        scaled = -scaled;
    std::string frac;
    for (int i = 0; i < digits; ++i) {
        frac.insert(frac.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
        scaled /= 10;
    }
    std::string whole = std::to_string(static_cast<std::int64_t>(scaled));
    if (whole.size() + frac.size() > 15)
        return {};
    return (negative ? "-" : "") + whole + "." + frac;
}

TimeValue TimeValue::parse(std::string_view text)
{
    auto fail = [&]() -> TimeValue {
        throw std::invalid_argument("malformed time value '" + std::string(text) + "'");
    };
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (text == "inf" || text == "+inf" || text == "infinity")
        return infinity();
    if (text == "-inf" || text == "-infinity")
        return neg_infinity();
    if (text.empty())
        return fail();

    auto parse_int = [&](std::string_view s) -> std::int64_t {
        std::int64_t v = 0;
        if (!s.empty() && s.front() == '+')
            s.remove_prefix(1);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
            fail();
        return v;
    };

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::int64_t den = parse_int(text.substr(slash + 1));
        if (den == 0)
            return fail();
        return TimeValue(parse_int(text.substr(0, slash)), den);
    }

    // Decimal, optionally with exponent.
    std::string_view mantissa = text;
    int exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        mantissa = text.substr(0, e);
        exponent = static_cast<int>(parse_int(text.substr(e + 1)));
    }
    bool negative = false;
    if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
        negative = mantissa.front() == '-';
        mantissa.remove_prefix(1);
    }
    i128 num = 0;
    int frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (char c : mantissa) {
        if (c == '.') {
            if (seen_dot)
                return fail();
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            seen_digit = true;
            num = num * 10 + (c - '0');
            if (seen_dot)
                ++frac_digits;
            if (num > (static_cast<i128>(1) << 100))
                throw std::overflow_error("time value too large");
        } else {
            return fail();
        }
    }
    if (!seen_digit)
        return fail();
    exponent -= frac_digits;
    i128 den = 1;
    if (exponent < -30 || exponent > 30)
        throw std::overflow_error("time value exponent out of range");
    for (; exponent > 0; --exponent)
        num *= 10;
    for (; exponent < 0; ++exponent)
        den *= 10;
    return make_reduced(negative ? -num : num, den);
}

TimeValue TimeValue::from_double(double value, std::int64_t denominator)
{
    if (std::isinf(value))
        return value > 0 ? infinity() : neg_infinity();
    if (std::isnan(value))
        throw std::domain_error("NaN time value");
    return TimeValue(static_cast<std::int64_t>(std::llround(value * static_cast<double>(denominator))), denominator);
}

std::ostream& operator<<(std::ostream& os, const TimeValue& v) { return os << v.to_string(); }

}  // namespace rtdc
