#pragma once

#include <cstddef>
#include <optional>

#include "auditdesign/model.hpp"
#include "auditdesign/population.hpp"

namespace auditdesign {

/// Expected population variance of the error amounts over all error
/// realizations (Roberts):
///   pi mu2 - (pi mu)^2 - pi (1 - pi) (sigma^2 + mu^2) / N.
VariancePrediction roberts_variance(const PopulationMoments& m, double pi);

/// Variance of one error amount drawn from a random realization:
///   pi mu2 - (pi mu)^2, with E(Y) = pi mu in `expected_mean`.
VariancePrediction total_variance(const PopulationMoments& m, double pi);

struct PiCrit {
  std::optional<double> value;  // empty when the denominator vanishes
  bool interior = false;        // value lies in [0, 1]
  std::optional<double> large_n_approx;  // mu2 / (2 mu^2)
};

/// Stationary point of roberts_variance in pi:
///   (1/2) (mu2 - mu2/N) / (mu^2 - mu2/N).
PiCrit pi_crit(const PopulationMoments& m);

/// max over pi in [0, 1] of roberts_variance; ties go to the smaller pi.
VariancePrediction conservative_variance_aon(const PopulationMoments& m);

struct SampleSizePlan {
  std::size_t n = 0;
  double unclamped = 0;  // formula value before rounding and clamping
  double margin = 0;
  double confidence = 0;
  Estimator estimator = Estimator::simple_expansion;
  VariancePrediction variance_used;
  bool census_required = false;  // clamped at N
};

/// Half-width z sqrt(N^2 v / n (N - n)/(N - 1)) of the interval for a sample
/// of size n.
double achieved_margin(std::size_t population, double variance, std::size_t n, double confidence);

/// n = ceil(z^2 N^3 v / (E^2 (N - 1) + z^2 N^2 v)), clamped to [2, N].
SampleSizePlan sample_size(const PopulationMoments& m, const VariancePrediction& variance,
                           double margin, double confidence, Estimator estimator);

}  // namespace auditdesign
