#pragma once

// JSON encoding of TimeValue: plain numbers where the decimal form is exact,
// otherwise "p/q" strings; infinities as "inf" / "-inf".

#include "rtdc/time_value.hpp"

#include <array>
#include <charconv>
#include <json.hpp>
#include <stdexcept>

namespace rtdc {

template <typename Json>
TimeValue time_from_json(const Json& j)
{
    if (j.is_number_integer())
        return TimeValue(j.template get<std::int64_t>());
    if (j.is_number_float()) {
        // Shortest round-trip text recovers the decimal the writer used.
        std::array<char, 64> buf{};
        auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), j.template get<double>());
        if (ec != std::errc{})
            throw std::invalid_argument("unrepresentable number");
        return TimeValue::parse(std::string_view(buf.data(), static_cast<std::size_t>(end - buf.data())));
    }
    if (j.is_string())
        return TimeValue::parse(j.template get<std::string>());
    throw std::invalid_argument("expected a number or a numeric string");
}

inline nlohmann::ordered_json time_to_json(const TimeValue& v)
{
    if (!v.is_finite())
        return v.is_pos_inf() ? "inf" : "-inf";
    if (v.denominator() == 1)
        return v.numerator();
    if (auto dec = v.to_decimal(); !dec.empty()) {
        double d = 0;
        std::from_chars(dec.data(), dec.data() + dec.size(), d);
        return d;
    }
    return v.to_string();
}

}  // namespace rtdc
