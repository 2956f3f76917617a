#pragma once

// SI-suffixed quantity literals: "82.5uA", "10us", "0.25V", "38.3fF", "5k".

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

namespace mottsim::units {

enum class Dim { None, Time, Current, Voltage, Resistance, Capacitance, Frequency, Length, Power, Energy, CapDensity };

inline std::string_view to_string(Dim d) {
    switch (d) {
        case Dim::None: return "dimensionless";
        case Dim::Time: return "time";
        case Dim::Current: return "current";
        case Dim::Voltage: return "voltage";
        case Dim::Resistance: return "resistance";
        case Dim::Capacitance: return "capacitance";
        case Dim::Frequency: return "frequency";
        case Dim::Length: return "length";
        case Dim::Power: return "power";
        case Dim::Energy: return "energy";
        case Dim::CapDensity: return "capacitance density";
    }
    return "?";
}

struct Quantity {
    double value = 0;  ///< SI base units
    Dim dim = Dim::None;
};

namespace detail {

inline std::optional<double> prefix_scale(char c) {
    switch (c) {
        case 'f': return 1e-15;
        case 'p': return 1e-12;
        case 'n': return 1e-9;
        case 'u': return 1e-6;
        case 'm': return 1e-3;
        case 'k': return 1e3;
        case 'M': return 1e6;
        case 'G': return 1e9;
        default: return std::nullopt;
    }
}

struct UnitName {
    std::string_view name;
    Dim dim;
    double scale;
};

// Longest names first so "fF/um2" wins over "F".
inline constexpr std::array<UnitName, 12> kUnits{{
    {"F/um2", Dim::CapDensity, 1e12},
    {"F/m2", Dim::CapDensity, 1.0},
    {"Ohm", Dim::Resistance, 1.0},
    {"Hz", Dim::Frequency, 1.0},
    {"s", Dim::Time, 1.0},
    {"A", Dim::Current, 1.0},
    {"V", Dim::Voltage, 1.0},
    {"F", Dim::Capacitance, 1.0},
    {"m", Dim::Length, 1.0},
    {"W", Dim::Power, 1.0},
    {"J", Dim::Energy, 1.0},
    {"R", Dim::Resistance, 1.0},
}};

}  // namespace detail

/// Parses a number with an optional SI prefix and unit. A bare prefix ("5k")
/// yields a dimensionless scaled number. Returns nullopt on malformed input.
inline std::optional<Quantity> parse_quantity(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    double v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) return std::nullopt;
    std::string_view rest(ptr, static_cast<std::size_t>(last - ptr));
    if (rest.empty()) return Quantity{v, Dim::None};
    for (const auto& u : detail::kUnits) {
        if (rest == u.name) return Quantity{v * u.scale, u.dim};
        if (rest.size() == u.name.size() + 1 && rest.substr(1) == u.name) {
            // "m" alone is metres, "ms" is milliseconds, "mm" millimetres
            if (auto s = detail::prefix_scale(rest[0])) return Quantity{v * *s * u.scale, u.dim};
        }
    }
    if (rest.size() == 1) {
        if (auto s = detail::prefix_scale(rest[0])) return Quantity{v * *s, Dim::None};
    }
    return std::nullopt;
}

}  // namespace mottsim::units
