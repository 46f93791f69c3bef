#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "auditdesign/money.hpp"

namespace auditdesign {

__extension__ typedef __int128 Int128;

/// One billed line: the claimed amount and the most probable error amount
/// (the full amount for all-or-nothing lines, the downgrade difference for
/// downgradable ones).
struct LineItem {
  Cents claimed;
  Cents probable_error;
};

struct Claim {
  std::string id;
  std::vector<LineItem> lines;

  Cents total() const;
  Cents probable_error_total() const;
};

/// The audit frame. Immutable once constructed; the constructor enforces
/// every claim/line invariant and throws ValidationError on violation.
class ClaimPopulation {
 public:
  explicit ClaimPopulation(std::vector<Claim> claims);

  std::span<const Claim> claims() const { return claims_; }
  std::size_t size() const { return claims_.size(); }
  const Claim& operator[](std::size_t i) const { return claims_[i]; }
  std::size_t line_count() const { return line_count_; }

 private:
  std::vector<Claim> claims_;
  std::size_t line_count_ = 0;
};

/// Exact additive integer sums over a set of claims, in cents (cents^2,
/// cents^3). Every closed-form coefficient in the design modules is a function
/// of these, so strata can be summarized by prefix differences.
struct ClaimSums {
  std::size_t count = 0;
  Int128 x = 0;     // sum X_i
  Int128 x2 = 0;    // sum X_i^2
  Int128 x3 = 0;    // sum X_i^3
  Int128 t = 0;     // sum Xt_i (claim probable-error totals)
  Int128 t2 = 0;    // sum Xt_i^2
  Int128 xt = 0;    // sum X_i Xt_i
  Int128 x2t = 0;   // sum X_i^2 Xt_i
  Int128 xt2 = 0;   // sum X_i Xt_i^2
  Int128 l2 = 0;    // sum_i sum_j Xt_ij^2
  Int128 xl2 = 0;   // sum_i X_i sum_j Xt_ij^2

  void add(const Claim& claim);
  ClaimSums& operator+=(const ClaimSums& other);
  friend ClaimSums operator-(ClaimSums a, const ClaimSums& b);
};

ClaimSums accumulate_sums(const ClaimPopulation& pop);

/// Population moments of the claim totals, in dollars. Variances use the 1/N
/// convention.
struct PopulationMoments {
  std::size_t n_pop = 0;
  double mu_x = 0;
  double sigma2_x = 0;
  double mu_x2 = 0;  // (1/N) sum X_i^2
  double tau_x = 0;
  double tau_x2 = 0;  // sum X_i^2
  double g1_skew = 0;
  double sum_xt_sq = 0;
  double sum_line_xt_sq = 0;

  double sigma_x() const;
};

PopulationMoments compute_moments(const ClaimPopulation& pop);

/// Same moments from additive sums; G1 is formed from raw moments, which is
/// less accurate than the two-pass value compute_moments produces.
PopulationMoments moments_from_sums(const ClaimSums& sums);

struct DistinctValueGroup {
  Cents value;
  std::size_t count = 0;
  double c_value = 0;  // X (X - mu - sigma^2 / (2 mu)), dollars^2
};

struct DistinctValueGroups {
  std::vector<DistinctValueGroup> groups;  // strictly increasing values

  std::size_t min_count() const;
};

DistinctValueGroups distinct_value_groups(const ClaimPopulation& pop);

/// Claims CSV: header `claim_id,line_index,claimed_amount,probable_error_amount`.
ClaimPopulation parse_claims_csv(const std::filesystem::path& path);
ClaimPopulation parse_claims_csv(std::istream& in, std::string_view source = "<stream>");
void write_claims_csv(std::ostream& out, const ClaimPopulation& pop);

}  // namespace auditdesign
