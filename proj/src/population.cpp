#include "auditdesign/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "auditdesign/error.hpp"

namespace auditdesign {
namespace {

constexpr long double kCentsPerDollar = 100.0L;

long double dollars(Int128 cents, int power) {
  return static_cast<long double>(cents) / std::pow(kCentsPerDollar, power);
}

std::vector<std::string_view> split_fields(std::string_view row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = row.find(',', start);
    fields.push_back(row.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

Cents Claim::total() const {
  Cents sum;
  for (const auto& line : lines) sum += line.claimed;
  return sum;
}

Cents Claim::probable_error_total() const {
  Cents sum;
  for (const auto& line : lines) sum += line.probable_error;
  return sum;
}

ClaimPopulation::ClaimPopulation(std::vector<Claim> claims) : claims_(std::move(claims)) {
  if (claims_.empty()) throw ValidationError("empty population");
  std::unordered_set<std::string> seen;
  for (const auto& claim : claims_) {
    if (!seen.insert(claim.id).second) {
      throw ValidationError(fmt::format("duplicate claim id '{}'", claim.id));
    }
    if (claim.lines.empty()) {
      throw ValidationError(fmt::format("claim '{}' has no line items", claim.id));
    }
    for (std::size_t j = 0; j < claim.lines.size(); ++j) {
      const auto& line = claim.lines[j];
      if (line.claimed.value < 0 || line.probable_error.value < 0) {
        throw ValidationError(fmt::format("claim '{}' line {}: negative amount", claim.id, j + 1));
      }
      if (line.probable_error > line.claimed) {
        throw ValidationError(fmt::format(
            "claim '{}' line {}: probable error amount {} exceeds claimed amount {}", claim.id,
            j + 1, format_cents(line.probable_error), format_cents(line.claimed)));
      }
    }
    if (claim.total().value <= 0) {
      throw ValidationError(fmt::format("claim '{}' has a zero total", claim.id));
    }
    line_count_ += claim.lines.size();
  }
}

void ClaimSums::add(const Claim& claim) {
  const Int128 x = claim.total().value;
  const Int128 t = claim.probable_error_total().value;
  Int128 l2_claim = 0;
  for (const auto& line : claim.lines) {
    const Int128 v = line.probable_error.value;
    l2_claim += v * v;
  }
  ++count;
  this->x += x;
  this->x2 += x * x;
  this->x3 += x * x * x;
  this->t += t;
  this->t2 += t * t;
  this->xt += x * t;
  this->x2t += x * x * t;
  this->xt2 += x * t * t;
  this->l2 += l2_claim;
  this->xl2 += x * l2_claim;
}

ClaimSums& ClaimSums::operator+=(const ClaimSums& o) {
  count += o.count;
  x += o.x;
  x2 += o.x2;
  x3 += o.x3;
  t += o.t;
  t2 += o.t2;
  xt += o.xt;
  x2t += o.x2t;
  xt2 += o.xt2;
  l2 += o.l2;
  xl2 += o.xl2;
  return *this;
}

ClaimSums operator-(ClaimSums a, const ClaimSums& b) {
  a.count -= b.count;
  a.x -= b.x;
  a.x2 -= b.x2;
  a.x3 -= b.x3;
  a.t -= b.t;
  a.t2 -= b.t2;
  a.xt -= b.xt;
  a.x2t -= b.x2t;
  a.xt2 -= b.xt2;
  a.l2 -= b.l2;
  a.xl2 -= b.xl2;
  return a;
}

ClaimSums accumulate_sums(const ClaimPopulation& pop) {
  ClaimSums sums;
  for (const auto& claim : pop.claims()) sums.add(claim);
  return sums;
}

double PopulationMoments::sigma_x() const { return std::sqrt(std::max(sigma2_x, 0.0)); }

namespace {

// Everything except G1, which callers fill in by their own route.
PopulationMoments moments_without_skew(const ClaimSums& s) {
  if (s.count == 0) throw ValidationError("empty population");
  const auto n = static_cast<Int128>(s.count);
  const long double nd = static_cast<long double>(s.count);
  PopulationMoments m;
  m.n_pop = s.count;
  m.tau_x = static_cast<double>(dollars(s.x, 1));
  m.tau_x2 = static_cast<double>(dollars(s.x2, 2));
  m.mu_x = static_cast<double>(dollars(s.x, 1) / nd);
  m.mu_x2 = static_cast<double>(dollars(s.x2, 2) / nd);
  // N * sum X^2 - (sum X)^2 is an exact nonnegative integer.
  m.sigma2_x = static_cast<double>(dollars(n * s.x2 - s.x * s.x, 2) / (nd * nd));
  m.sum_xt_sq = static_cast<double>(dollars(s.t2, 2));
  m.sum_line_xt_sq = static_cast<double>(dollars(s.l2, 2));
  return m;
}

}  // namespace

PopulationMoments compute_moments(const ClaimPopulation& pop) {
  PopulationMoments m = moments_without_skew(accumulate_sums(pop));
  if (m.sigma2_x > 0) {
    const long double mu = static_cast<long double>(m.mu_x);
    long double third = 0;
    for (const auto& claim : pop.claims()) {
      const long double d = static_cast<long double>(claim.total().dollars()) - mu;
      third += d * d * d;
    }
    const long double sigma = std::sqrt(static_cast<long double>(m.sigma2_x));
    m.g1_skew = static_cast<double>(third / (static_cast<long double>(m.n_pop) * sigma * sigma * sigma));
  }
  return m;
}

PopulationMoments moments_from_sums(const ClaimSums& sums) {
  PopulationMoments m = moments_without_skew(sums);
  if (m.sigma2_x > 0) {
    const long double nd = static_cast<long double>(sums.count);
    const long double mu = dollars(sums.x, 1) / nd;
    const long double raw2 = dollars(sums.x2, 2) / nd;
    const long double raw3 = dollars(sums.x3, 3) / nd;
    const long double central3 = raw3 - 3 * mu * raw2 + 2 * mu * mu * mu;
    const long double sigma = std::sqrt(static_cast<long double>(m.sigma2_x));
    m.g1_skew = static_cast<double>(central3 / (sigma * sigma * sigma));
  }
  return m;
}

std::size_t DistinctValueGroups::min_count() const {
  std::size_t best = 0;
  for (const auto& g : groups) {
    if (best == 0 || g.count < best) best = g.count;
  }
  return best;
}

DistinctValueGroups distinct_value_groups(const ClaimPopulation& pop) {
  const auto m = compute_moments(pop);
  if (m.mu_x == 0) throw ValidationError("mean claim amount is zero");
  std::map<Cents, std::size_t> counts;
  for (const auto& claim : pop.claims()) ++counts[claim.total()];
  const double shift = m.mu_x + m.sigma2_x / (2 * m.mu_x);
  DistinctValueGroups out;
  out.groups.reserve(counts.size());
  for (const auto& [value, count] : counts) {
    const double x = value.dollars();
    out.groups.push_back({value, count, x * (x - shift)});
  }
  return out;
}

ClaimPopulation parse_claims_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open claims file '" + path.string() + "'");
  return parse_claims_csv(in, path.string());
}

ClaimPopulation parse_claims_csv(std::istream& in, std::string_view source) {
  static constexpr std::string_view kHeader = "claim_id,line_index,claimed_amount,probable_error_amount";
  std::string row;
  std::size_t line_no = 0;
  bool have_header = false;

  std::vector<std::string> order;
  std::unordered_map<std::string, std::map<long, LineItem>> lines_by_claim;

  const auto fail = [&](const std::string& what) {
    throw ValidationError(fmt::format("{}:{}: {}", source, line_no, what));
  };

  while (std::getline(in, row)) {
    ++line_no;
    std::string_view view = trim(row);
    if (!have_header) {
      if (view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
      if (view.empty()) continue;
      if (view != kHeader) fail("expected header '" + std::string(kHeader) + "'");
      have_header = true;
      continue;
    }
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() != 4) fail(fmt::format("expected 4 fields, found {}", fields.size()));
    const std::string id(trim(fields[0]));
    if (id.empty()) fail("empty claim_id");

    const std::string_view index_text = trim(fields[1]);
    long index = 0;
    if (index_text.empty() || index_text.size() > 9) fail("invalid line_index");
    for (char c : index_text) {
      if (c < '0' || c > '9') fail("invalid line_index '" + std::string(index_text) + "'");
      index = index * 10 + (c - '0');
    }
    if (index < 1) fail("line_index must be 1-based");

    LineItem item;
    try {
      item.claimed = parse_cents_strict(trim(fields[2]));
      item.probable_error = parse_cents_strict(trim(fields[3]));
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    if (item.claimed.value < 0 || item.probable_error.value < 0) fail("negative amount");
    if (item.probable_error > item.claimed) {
      fail(fmt::format("probable_error_amount {} exceeds claimed_amount {}",
                       format_cents(item.probable_error), format_cents(item.claimed)));
    }

    auto [it, inserted] = lines_by_claim.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.emplace(index, item).second) {
      fail(fmt::format("duplicate (claim_id, line_index) = ({}, {})", id, index));
    }
  }
  if (!have_header) throw ValidationError(fmt::format("{}: missing header", source));
  if (order.empty()) throw ValidationError(fmt::format("{}: empty population", source));

  std::vector<Claim> claims;
  claims.reserve(order.size());
  for (const auto& id : order) {
    Claim claim{id, {}};
    for (const auto& [index, item] : lines_by_claim[id]) claim.lines.push_back(item);
    claims.push_back(std::move(claim));
  }
  return ClaimPopulation(std::move(claims));
}

void write_claims_csv(std::ostream& out, const ClaimPopulation& pop) {
  out << "claim_id,line_index,claimed_amount,probable_error_amount\n";
  for (const auto& claim : pop.claims()) {
    for (std::size_t j = 0; j < claim.lines.size(); ++j) {
      out << claim.id << ',' << (j + 1) << ',' << format_cents(claim.lines[j].claimed) << ','
          << format_cents(claim.lines[j].probable_error) << '\n';
    }
  }
}

}  // namespace auditdesign
