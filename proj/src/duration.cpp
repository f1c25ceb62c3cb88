#include "partsim/duration.hpp"

#include <array>
#include <charconv>
#include <limits>
#include <utility>

namespace partsim {

namespace {

struct UnitScale {
    std::string_view suffix;
    Duration::rep scale;
};

// Largest first so format_duration picks the coarsest exact unit.
constexpr std::array<UnitScale, 4> kUnits{{
    {"s", 1'000'000'000},
    {"ms", 1'000'000},
    {"us", 1'000},
    {"ns", 1},
}};

}  // namespace

Duration parse_duration(std::string_view text)
{
    const std::string original{text};
    if (!text.empty() && text.front() == '-') {
        throw DurationFormatError(DurationParseError::Negative, "negative duration '" + original + "'");
    }

    std::size_t digits = 0;
    while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') {
        ++digits;
    }
    if (digits == 0) {
        throw DurationFormatError(DurationParseError::BadSyntax, "duration '" + original + "' has no integer value");
    }

    const std::string_view suffix = text.substr(digits);
    const UnitScale* unit = nullptr;
    for (const auto& u : kUnits) {
        if (u.suffix == suffix) {
            unit = &u;
        }
    }
    if (unit == nullptr) {
        throw DurationFormatError(DurationParseError::BadUnit,
                                  "duration '" + original + "' needs a unit suffix of ns, us, ms or s");
    }

    Duration::rep value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + digits, value);
    if (ec != std::errc{} || ptr != text.data() + digits ||
        value > std::numeric_limits<Duration::rep>::max() / unit->scale) {
        throw DurationFormatError(DurationParseError::Overflow, "duration '" + original + "' out of range");
    }
    return Duration{value * unit->scale};
}

std::string format_duration(Duration d)
{
    const auto ns = d.count();
    if (ns == 0) {
        return "0ns";
    }
    for (const auto& u : kUnits) {
        if (ns % u.scale == 0) {
            return std::to_string(ns / u.scale) + std::string{u.suffix};
        }
    }
    return std::to_string(ns) + "ns";
}

}  // namespace partsim
