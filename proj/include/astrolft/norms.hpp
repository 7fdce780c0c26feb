#pragma once

#include "astrolft/state_space.hpp"

namespace astrolft {

struct HinfResult {
  double value = 0.0;
  double peak_omega = 0.0;  // rad/s; 0 for static systems peaking at DC
};

/// True if every pole has strictly negative real part.
bool is_stable(const StateSpaceModel& g, double tol = 1e-9);

/// H-infinity norm by Hamiltonian imaginary-axis tests with
/// Bruinsma-Steinbuch lower-bound updates. Throws on unstable systems
/// (message lists the unstable poles). tol is relative, in (0, 1e-2].
HinfResult hinf_norm(const StateSpaceModel& g, double tol = 1e-6);

/// H2 norm via the controllability Lyapunov equation. Requires a stable,
/// strictly proper system.
double h2_norm(const StateSpaceModel& g);

/// Solves A X + X A^T + Q = 0 for stable A (Bartels-Stewart on the complex
/// Schur form).
Eigen::MatrixXd lyapunov_continuous(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Q);

/// Largest singular value of G(jw).
double sigma_max(const StateSpaceModel& g, double omega);

/// Max of sigma_max over a frequency list plus golden-section refinement
/// around the best grid point; returns value and achieving frequency.
HinfResult peak_gain_on_band(const StateSpaceModel& g,
                             const std::vector<double>& omegas);

}  // namespace astrolft
