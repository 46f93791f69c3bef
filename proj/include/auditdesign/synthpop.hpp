#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "auditdesign/population.hpp"

namespace auditdesign {

enum class SynthKind { edwards, neter, clinic };

/// Throws ValidationError for anything but "edwards", "neter", "clinic".
SynthKind parse_synth_kind(std::string_view name);
std::string_view to_string(SynthKind kind);

struct SynthSpec {
  SynthKind kind = SynthKind::edwards;
  std::uint64_t seed = 0;
  std::optional<std::size_t> size_override;
};

std::size_t default_size(SynthKind kind);

/// Seeded simulated audit populations calibrated to summary statistics:
///  - edwards: 9000 one-line claims, lognormal body plus a uniform $100-150
///    spike, total $1.1M (scaled with size);
///  - neter: 4033 one-line claims, heavier lognormal, total $7.5M;
///  - clinic: 1000 claims with 1/2/3 lines in proportion .63/.33/.04, claim
///    totals mean $30.54 sd $13.43, line probable errors mean $8.54 sd $6.45.
/// Edwards and Neter claims carry all-or-nothing lines (probable error equals
/// the claimed amount).
ClaimPopulation generate(const SynthSpec& spec);

/// Replaces every claim total by one of `levels` values (the rounded mean of
/// its quantile bin), producing a population with few distinct values, each
/// repeated many times. Claims become single all-or-nothing lines.
ClaimPopulation coarsen(const ClaimPopulation& pop, std::size_t levels);

}  // namespace auditdesign
