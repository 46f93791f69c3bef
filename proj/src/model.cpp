#include "auditdesign/model.hpp"

#include <cmath>
#include <string>

#include "auditdesign/error.hpp"

namespace auditdesign {
namespace {

void check_rate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

void validate(const ErrorModel& model) {
  check_rate(claim_rate(model), "error rate");
  check_rate(line_rate(model), "line-item error rate");
}

double claim_rate(const ErrorModel& model) {
  return std::visit([](const auto& m) { return m.pi; }, model);
}

double line_rate(const ErrorModel& model) {
  if (const auto* m = std::get_if<LineItemModel>(&model)) return m->pi_l;
  return 0.0;
}

Estimator parse_estimator(std::string_view name) {
  if (name == "simple" || name == "simple_expansion" || name == "simple-expansion") {
    return Estimator::simple_expansion;
  }
  if (name == "ratio") return Estimator::ratio;
  throw ValidationError("unknown estimator '" + std::string(name) + "'");
}

std::string_view to_string(Estimator estimator) {
  return estimator == Estimator::ratio ? "ratio" : "simple_expansion";
}

std::string_view to_string(VarianceKind kind) {
  switch (kind) {
    case VarianceKind::roberts: return "roberts";
    case VarianceKind::total: return "total";
    case VarianceKind::partial_y: return "partial_y";
    case VarianceKind::roberts_ratio: return "roberts_ratio";
    case VarianceKind::partial_r: return "partial_r";
  }
  return "unknown";
}

double clamp_variance(double value, double scale) {
  if (value < 0 && value >= -1e-9 * std::max(std::abs(scale), 1.0)) return 0.0;
  return value;
}

}  // namespace auditdesign
