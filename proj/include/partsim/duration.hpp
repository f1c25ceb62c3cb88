#pragma once

#include <compare>
#include <cstdint>
#include <exception>
#include <string>
#include <string_view>
#include <utility>

namespace partsim {

/// Simulated time span in integer nanoseconds. There are no fractional ticks
/// anywhere in the simulator; every quantity of time is one of these.
class Duration {
public:
    using rep = std::int64_t;

    constexpr Duration() = default;
    constexpr explicit Duration(rep ns) : ns_(ns) {}

    [[nodiscard]] constexpr rep count() const { return ns_; }

    constexpr Duration& operator+=(Duration o) { ns_ += o.ns_; return *this; }
    constexpr Duration& operator-=(Duration o) { ns_ -= o.ns_; return *this; }

    friend constexpr Duration operator+(Duration a, Duration b) { return Duration{a.ns_ + b.ns_}; }
    friend constexpr Duration operator-(Duration a, Duration b) { return Duration{a.ns_ - b.ns_}; }
    friend constexpr Duration operator*(Duration a, rep k) { return Duration{a.ns_ * k}; }
    friend constexpr Duration operator*(rep k, Duration a) { return Duration{a.ns_ * k}; }
    friend constexpr Duration operator%(Duration a, Duration b) { return Duration{a.ns_ % b.ns_}; }
    friend constexpr rep operator/(Duration a, Duration b) { return a.ns_ / b.ns_; }

    friend constexpr auto operator<=>(Duration, Duration) = default;
    friend constexpr bool operator==(Duration, Duration) = default;

private:
    rep ns_ = 0;
};

namespace literals {
constexpr Duration operator""_ns(unsigned long long v) { return Duration{static_cast<Duration::rep>(v)}; }
constexpr Duration operator""_us(unsigned long long v) { return Duration{static_cast<Duration::rep>(v) * 1'000}; }
constexpr Duration operator""_ms(unsigned long long v) { return Duration{static_cast<Duration::rep>(v) * 1'000'000}; }
constexpr Duration operator""_s(unsigned long long v) { return Duration{static_cast<Duration::rep>(v) * 1'000'000'000}; }
}  // namespace literals

enum class DurationParseError { BadSyntax, BadUnit, Negative, Overflow };

/// Parses "<integer><unit>" with unit in {ns, us, ms, s}. Throws
/// DurationFormatError carrying the failure class.
Duration parse_duration(std::string_view text);

/// Formats using the largest unit that represents the value exactly, e.g.
/// 1'000'000 ns -> "1ms", 1'500 ns -> "1500ns".
std::string format_duration(Duration d);

class DurationFormatError : public std::exception {
public:
    DurationFormatError(DurationParseError kind, std::string message)
        : kind_(kind), message_(std::move(message)) {}
    [[nodiscard]] DurationParseError kind() const { return kind_; }
    [[nodiscard]] const char* what() const noexcept override { return message_.c_str(); }

private:
    DurationParseError kind_;
    std::string message_;
};

}  // namespace partsim
