#include "astrolft/monte_carlo.hpp"

#include "astrolft/norms.hpp"
#include "astrolft/threading.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace astrolft {

namespace {

double log_binom_cdf_le(int x, int n, double p) {
  // log P(X <= x) for X ~ Bin(n, p), stable summation in log space
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return x >= n ? 0.0 : -std::numeric_limits<double>::infinity();
  double lt = n * std::log1p(-p);  // k = 0 term
  double lsum = lt;
  for (int k = 1; k <= x; ++k) {
    lt += std::log((n - k + 1.0) / k) + std::log(p) - std::log1p(-p);
    const double m = std::max(lsum, lt);
    lsum = m + std::log(std::exp(lsum - m) + std::exp(lt - m));
  }
  return lsum;
}

}  // namespace

std::pair<double, double> clopper_pearson(int x, int n, double alpha) {
  double lo = 0.0, hi = 1.0;
  if (x > 0) {
    // lo: P(X >= x | p) = alpha/2  <=>  P(X <= x-1 | p) = 1 - alpha/2
    double a = 0.0, b = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      (std::exp(log_binom_cdf_le(x - 1, n, mid)) > 1.0 - alpha / 2 ? a : b) =
          mid;
    }
    lo = 0.5 * (a + b);
  }
  if (x < n) {
    // hi: P(X <= x | p) = alpha/2
    double a = 0.0, b = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      (std::exp(log_binom_cdf_le(x, n, mid)) > alpha / 2 ? a : b) = mid;
    }
    hi = 0.5 * (a + b);
  }
  return {lo, hi};
}

McResult monte_carlo_violation_probability(const LftModel& perf_lft,
                                           double threshold, int n_samples,
                                           const FrequencyGrid& band,
                                           unsigned seed) {
  band.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto names = perf_lft.delta.parameter_names();
  McResult r;
  r.n_samples = n_samples;
  r.threshold = threshold;
  r.band_lo = band.omegas.front();
  r.band_hi = band.omegas.back();
  r.seed = seed;

  std::vector<char> hit(n_samples, 0);
  parallel_for(static_cast<size_t>(n_samples), [&](size_t i) {
    // one independent, reproducible stream per sample
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (i + 1));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::map<std::string, double> sample;
    for (const auto& nm : names) sample[nm] = unif(rng);
    const StateSpaceModel closed = close_lft(perf_lft, sample);
    const HinfResult peak = peak_gain_on_band(closed, band.omegas);
    hit[i] = peak.value > threshold ? 1 : 0;
  });
  for (char h : hit) r.violations += h;
  r.fraction = static_cast<double>(r.violations) / n_samples;
  std::tie(r.ci_lo, r.ci_hi) = clopper_pearson(r.violations, n_samples);
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return r;
}

}  // namespace astrolft
