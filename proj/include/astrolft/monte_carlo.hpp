#pragma once

#include "astrolft/lft.hpp"
#include "astrolft/mu.hpp"

namespace astrolft {

/// Sample-based estimate of P(banded peak gain > threshold) under uniform
/// deltas on the unit box. A statistical estimate with a Clopper-Pearson
/// interval, NOT a guaranteed bound.
struct McResult {
  int n_samples = 0;
  int violations = 0;
  double fraction = 0.0;
  double ci_lo = 0.0;   // two-sided 95% Clopper-Pearson
  double ci_hi = 0.0;
  double threshold = 0.0;
  double band_lo = 0.0, band_hi = 0.0;
  unsigned seed = 0;
  double wall_seconds = 0.0;
};

McResult monte_carlo_violation_probability(const LftModel& perf_lft,
                                           double threshold, int n_samples,
                                           const FrequencyGrid& band,
                                           unsigned seed);

/// Exact two-sided Clopper-Pearson interval at confidence 1-alpha.
std::pair<double, double> clopper_pearson(int successes, int trials,
                                          double alpha = 0.05);

}  // namespace astrolft
