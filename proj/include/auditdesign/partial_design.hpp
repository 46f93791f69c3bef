#pragma once

#include "auditdesign/model.hpp"
#include "auditdesign/population.hpp"
#include "auditdesign/surface.hpp"

namespace auditdesign {

/// Coefficients of E(sigma_y^2) under the line-item model (dollars^2):
///   c1 = (1/N - 1/N^2) sum X_i^2        c4 = -1/N^2 sum_{i != i'} X_i X_i'
///   c2 = (1/N - 1/N^2) sum Xt_i^2       c5 = -1/N^2 sum_{i != i'} (X_i' Xt_i + X_i Xt_i')
///   c3 = (1/N - 1/N^2) sum_ij Xt_ij^2   c6 = -1/N^2 sum_{i != i'} Xt_i Xt_i'
struct PartialYCoefficients {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0;

  SurfaceCoefficients surface() const { return {c1, c2, c3, c4, c5, c6}; }
};

PartialYCoefficients partial_y_coefficients(const ClaimPopulation& pop);
PartialYCoefficients partial_y_coefficients(const ClaimSums& sums);

/// h(pi, pl) = E(sigma_y^2) under the line-item model.
VariancePrediction expected_var_y(const PartialYCoefficients& coef, double pi, double pi_l);

struct ConservativeSurface {
  VariancePrediction prediction;
  SurfaceMaximum surface;
};

/// Maximum of h over [0,1]^2, with the per-edge maxima and every interior
/// stationary candidate.
ConservativeSurface conservative_variance_partial(const PartialYCoefficients& coef,
                                                  const PopulationMoments& m);

/// E(sigma_y^2) for populations whose lines are all-or-nothing (probable
/// error equal to the claimed amount), evaluated from claim and line sums
/// directly. Throws ValidationError if any line is not all-or-nothing.
VariancePrediction expected_var_y_aon_lines(const ClaimPopulation& pop, double pi, double pi_l);

}  // namespace auditdesign
