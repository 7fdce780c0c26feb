#pragma once

#include "astrolft/lft.hpp"

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace astrolft {

struct FrequencyGrid {
  std::vector<double> omegas;  // strictly increasing, positive
  std::string kind;            // "log" | "linear" | "custom"
  double lo = 0.0, hi = 0.0;

  static FrequencyGrid log_space(double lo, double hi, int n);
  static FrequencyGrid linear_space(double lo, double hi, int n);
  void validate() const;
};

/// Bounds on the worst-case gain of the selected performance channel over the
/// normalized uncertainty box (the worst-case-performance mu of the paper's
/// analyses, with a full complex block appended for the gain channel).
struct MuResult {
  double lower = 0.0;      // certified by worst_delta: a gain actually reached
  double upper = std::numeric_limits<double>::quiet_NaN();
  double peak_omega_lower = 0.0;
  double peak_omega_upper = 0.0;
  std::map<std::string, double> worst_delta;     // normalized sample
  std::map<std::string, double> worst_physical;  // filled when a registry is given
  std::vector<double> omegas;                    // lower-bound grid
  std::vector<double> lower_curve;               // per-frequency achieved gain
  std::vector<double> upper_omegas;              // final (possibly refined) grid
  std::vector<double> upper_curve;
  int upper_flagged_points = 0;  // frequencies where scaling failed (bound inf)
  bool upper_computed = false;
  double wall_seconds = 0.0;
  unsigned seed = 0;
  std::string grid_note;  // grid-density caveat for the upper bound
};

struct MuOptions {
  unsigned seed = 12345;
  // lower bound (coordinate-ascent worst-case search)
  int coord_points = 9;
  int ascent_cycles = 2;
  int intensify_top = 2;      // number of peak frequencies intensified
  int intensify_starts = 6;   // ascents kept from the vertex/random ranking
  int n_random_starts = 50;
  int refine_rounds = 2;
  // upper bound (skewed D-G scaling bisection)
  double bisect_rtol = 0.02;
  int dg_max_iter = 260;
  int adaptive_extra = 120;   // added points where neighbours differ > 5 %
  double beta_cap_factor = 1e4;
};

/// Restricts the physical channels of a closed-loop LFT to one performance
/// channel pair and groups every repetition of each parameter contiguously.
LftModel performance_channel(const LftModel& closed,
                             const std::vector<int>& phys_in,
                             const std::vector<int>& phys_out);

/// Lower bound: per-frequency coordinate ascent over the real unit box with
/// warm starts along the grid, vertex + random multistarts at the peak
/// frequencies and local frequency refinement. The returned sample is a
/// certificate: closing the LFT at it reproduces `lower`.
MuResult mu_lower_bound(const LftModel& perf_lft, const FrequencyGrid& grid,
                        const MuOptions& opt = {},
                        const std::map<std::string, UncertainReal>* registry =
                            nullptr);

/// Upper bound: per-frequency bisection on the gain level, each feasibility
/// test a D-G scaled structured-singular-value certificate for the mixed
/// real/complex structure (real parameter blocks + one full complex
/// performance block). Values are guaranteed at grid points only; the grid
/// caveat is recorded in grid_note. Frequencies where no finite certificate
/// is found are flagged and reported as +inf.
MuResult mu_upper_bound(const LftModel& perf_lft, const FrequencyGrid& grid,
                        const MuOptions& opt = {},
                        const std::vector<double>* lower_hint = nullptr);

/// Independent re-check of a lower-bound certificate: closes the LFT at the
/// sample (state-space route) and evaluates the gain at `omega`.
double certificate_gain(const LftModel& perf_lft,
                        const std::map<std::string, double>& sample,
                        double omega);

struct ThetaSweepEntry {
  double theta_deg = 0.0;
  MuResult result;
  bool ok = false;
  std::string error;
};

/// Closes the sigma4 blocks on an n_theta grid (theta = -180 + 360 k/n deg,
/// k = 1..n; n = 72 reproduces the 5-degree grid) and runs the mu bounds on
/// the remaining mechanical parameters. Per-theta failures are isolated.
std::vector<ThetaSweepEntry> grid_sigma4_sweep(
    const LftModel& perf_lft, int n_theta, const FrequencyGrid& grid,
    const MuOptions& opt, bool with_upper,
    const std::string& sigma4_name = "sigma4",
    const std::map<std::string, UncertainReal>* registry = nullptr);

}  // namespace astrolft
