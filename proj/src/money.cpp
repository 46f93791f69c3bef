#include "auditdesign/money.hpp"

#include <cctype>
#include <limits>

#include <fmt/format.h>

#include "auditdesign/error.hpp"

namespace auditdesign {
namespace {

Cents parse_amount(std::string_view text, int min_fraction, int max_fraction) {
  const std::string original(text);
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  const auto all_digits = [](std::string_view s) {
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
  };
  if (whole.empty() || !all_digits(whole) || !all_digits(frac) ||
      static_cast<int>(frac.size()) < min_fraction ||
      static_cast<int>(frac.size()) > max_fraction ||
      (dot != std::string_view::npos && frac.empty())) {
    throw ValidationError("invalid amount '" + original + "'");
  }
  constexpr std::int64_t limit = std::numeric_limits<std::int64_t>::max() / 1000;
  std::int64_t cents = 0;
  for (char c : whole) {
    cents = cents * 10 + (c - '0');
    if (cents > limit) throw ValidationError("amount out of range '" + original + "'");
  }
  std::int64_t fraction = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    fraction = fraction * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  }
  cents = cents * 100 + fraction;
  return Cents{negative ? -cents : cents};
}

}  // namespace

Cents parse_cents_strict(std::string_view text) { return parse_amount(text, 2, 2); }

Cents parse_dollars(std::string_view text) { return parse_amount(text, 0, 2); }

std::string format_cents(Cents amount) {
  const std::int64_t v = amount.value;
  const std::uint64_t mag = v < 0 ? static_cast<std::uint64_t>(-(v + 1)) + 1 : static_cast<std::uint64_t>(v);
  return fmt::format("{}{}.{:02d}", v < 0 ? "-" : "", mag / 100, mag % 100);
}

}  // namespace auditdesign
