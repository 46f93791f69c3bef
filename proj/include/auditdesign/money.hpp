#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace auditdesign {

/// Exact currency amount in integer cents.
struct Cents {
  std::int64_t value = 0;

  constexpr auto operator<=>(const Cents&) const = default;
  constexpr Cents& operator+=(Cents other) {
    value += other.value;
    return *this;
  }
  friend constexpr Cents operator+(Cents a, Cents b) { return Cents{a.value + b.value}; }
  friend constexpr Cents operator-(Cents a, Cents b) { return Cents{a.value - b.value}; }

  constexpr double dollars() const { return static_cast<double>(value) / 100.0; }
};

/// Parses a claims-file amount: optional leading '-', digits, '.', exactly two
/// fraction digits ("45.00"). Throws ValidationError otherwise.
Cents parse_cents_strict(std::string_view text);

/// Parses a dollar amount given on the command line; zero, one or two fraction
/// digits are accepted ("110000", "12.5", "12.50").
Cents parse_dollars(std::string_view text);

/// Formats as "-12.34" / "0.05".
std::string format_cents(Cents amount);

}  // namespace auditdesign
