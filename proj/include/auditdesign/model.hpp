#pragma once

#include <optional>
#include <string_view>
#include <variant>

namespace auditdesign {

/// Claim-level all-or-nothing errors: each claim is wholly in error with
/// probability pi, independently.
struct AonModel {
  double pi = 0;
};

/// Line-item model: a claim is wholly in error with probability pi; otherwise
/// each line independently errs by its probable error amount with
/// probability pi_l.
struct LineItemModel {
  double pi = 0;
  double pi_l = 0;
};

using ErrorModel = std::variant<AonModel, LineItemModel>;

/// Throws ValidationError unless every rate lies in [0, 1].
void validate(const ErrorModel& model);
double claim_rate(const ErrorModel& model);
double line_rate(const ErrorModel& model);  // 0 for AonModel

enum class Estimator { simple_expansion, ratio };

Estimator parse_estimator(std::string_view name);
std::string_view to_string(Estimator estimator);

enum class VarianceKind { roberts, total, partial_y, roberts_ratio, partial_r };

std::string_view to_string(VarianceKind kind);

/// A predicted per-claim variance (sigma_y^2 or sigma_R^2, dollars^2) and the
/// error rates at which it was evaluated or maximized.
struct VariancePrediction {
  double value = 0;
  double at_pi = 0;
  std::optional<double> at_pi_l;
  VarianceKind kind = VarianceKind::roberts;
  bool conservative = false;

  // Diagnostics, filled where meaningful.
  std::optional<double> expected_mean;  // E(Y) for total_variance
  std::optional<double> large_n_form;   // pi (1 - pi) mu_x^(2) for roberts_ratio
};

/// Clamps tiny negative round-off (>= -1e-9 relative to `scale`) to zero.
double clamp_variance(double value, double scale);

}  // namespace auditdesign
