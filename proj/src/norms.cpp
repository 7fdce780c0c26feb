#include "astrolft/norms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace astrolft {

bool is_stable(const StateSpaceModel& g, double tol) {
  if (g.n_states() == 0) return true;
  const double scale = std::max(1.0, g.A().cwiseAbs().maxCoeff());
  Eigen::VectorXcd p = g.poles();
  for (int i = 0; i < p.size(); ++i)
    if (p[i].real() > -tol * scale) return false;
  return true;
}

namespace {

std::string unstable_pole_list(const StateSpaceModel& g) {
  std::ostringstream os;
  Eigen::VectorXcd p = g.poles();
  for (int i = 0; i < p.size(); ++i)
    if (p[i].real() >= 0.0) os << " " << p[i].real() << (p[i].imag() >= 0 ? "+" : "") << p[i].imag() << "j";
  return os.str();
}

}  // namespace

double sigma_max(const StateSpaceModel& g, double omega) {
  return eval_freq(g, omega).value.jacobiSvd().singularValues()(0);
}

HinfResult peak_gain_on_band(const StateSpaceModel& g,
                             const std::vector<double>& omegas) {
  HinfResult best{-1.0, 0.0};
  size_t best_i = 0;
  for (size_t i = 0; i < omegas.size(); ++i) {
    const double v = sigma_max(g, omegas[i]);
    if (v > best.value) {
      best.value = v;
      best.peak_omega = omegas[i];
      best_i = i;
    }
  }
  if (omegas.size() >= 2) {
    // golden-section refine in the bracket around the best grid point
    double lo = omegas[best_i == 0 ? 0 : best_i - 1];
    double hi = omegas[std::min(best_i + 1, omegas.size() - 1)];
    if (hi > lo) {
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = lo, b = hi;
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      double f1 = sigma_max(g, x1), f2 = sigma_max(g, x2);
      for (int it = 0; it < 40 && (b - a) > 1e-9 * (1.0 + b); ++it) {
        if (f1 < f2) {
          a = x1; x1 = x2; f1 = f2;
          x2 = a + gr * (b - a); f2 = sigma_max(g, x2);
        } else {
          b = x2; x2 = x1; f2 = f1;
          x1 = b - gr * (b - a); f1 = sigma_max(g, x1);
        }
      }
      const double xm = 0.5 * (a + b), fm = sigma_max(g, xm);
      if (fm > best.value) { best.value = fm; best.peak_omega = xm; }
    }
  }
  return best;
}

HinfResult hinf_norm(const StateSpaceModel& g, double tol) {
  if (tol <= 0.0 || tol > 1e-2)
    throw std::invalid_argument("hinf_norm: tol must lie in (0, 1e-2]");
  if (!is_stable(g))
    throw std::runtime_error("hinf_norm: unstable system, poles:" +
                             unstable_pole_list(g));
  const int n = g.n_states();
  const Eigen::MatrixXd& A = g.A();
  const Eigen::MatrixXd& B = g.B();
  const Eigen::MatrixXd& C = g.C();
  const Eigen::MatrixXd& D = g.D();
  const double sD = D.size() ? D.jacobiSvd().singularValues()(0) : 0.0;
  if (n == 0) return {sD, 0.0};

  // Seed the lower bound from a few structured samples.
  double glb = std::max(sD, sigma_max(g, 0.0));
  double w_at = 0.0;
  Eigen::VectorXcd p = g.poles();
  for (int i = 0; i < p.size(); ++i) {
    const double wi = std::abs(p[i].imag()) > 1e-12 * std::abs(p[i])
                          ? std::abs(p[i].imag())
                          : std::abs(p[i]);
    if (wi <= 0.0) continue;
    const double v = sigma_max(g, wi);
    if (v > glb) { glb = v; w_at = wi; }
  }
  if (glb <= 0.0) return {0.0, 0.0};

  const Eigen::MatrixXd I_u = Eigen::MatrixXd::Identity(g.n_inputs(), g.n_inputs());
  for (int iter = 0; iter < 60; ++iter) {
    const double gamma = glb * (1.0 + 2.0 * tol);
    const Eigen::MatrixXd R = gamma * gamma * I_u - D.transpose() * D;
    Eigen::LLT<Eigen::MatrixXd> llt(R);
    if (llt.info() != Eigen::Success) {
      // gamma <= sigma_max(D): push up and retry
      glb = gamma;
      continue;
    }
    const Eigen::MatrixXd Rinv = llt.solve(I_u);
    const Eigen::MatrixXd ARD = A + B * Rinv * D.transpose() * C;
    Eigen::MatrixXd H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = ARD;
    H.topRightCorner(n, n) = B * Rinv * B.transpose();
    H.bottomLeftCorner(n, n) =
        -C.transpose() * (Eigen::MatrixXd::Identity(C.rows(), C.rows()) +
                          D * Rinv * D.transpose()) *
        C;
    H.bottomRightCorner(n, n) = -ARD.transpose();

    Eigen::EigenSolver<Eigen::MatrixXd> es(H, false);
    const Eigen::VectorXcd ev = es.eigenvalues();
    const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
    std::vector<double> wc;
    for (int i = 0; i < ev.size(); ++i) {
      if (std::abs(ev[i].real()) < 1e-8 * hscale && ev[i].imag() > 1e-12)
        wc.push_back(ev[i].imag());
    }
    if (wc.empty()) {
      // No imaginary-axis crossings: norm within (glb, gamma].
      return {glb * (1.0 + tol), w_at};
    }
    std::sort(wc.begin(), wc.end());
    double improved = glb;
    // test midpoints of consecutive crossing frequencies
    for (size_t i = 0; i + 1 < wc.size(); ++i) {
      const double m = std::sqrt(wc[i] * wc[i + 1]);
      const double v = sigma_max(g, m);
      if (v > improved) { improved = v; w_at = m; }
    }
    const double v0 = sigma_max(g, wc.front());
    if (v0 > improved) { improved = v0; w_at = wc.front(); }
    const double v1 = sigma_max(g, wc.back());
    if (v1 > improved) { improved = v1; w_at = wc.back(); }
    if (improved <= glb * (1.0 + 1e-14)) {
      // Stalled (crossings at the current level): accept gamma.
      return {gamma, w_at};
    }
    glb = improved;
  }
  return {glb * (1.0 + tol), w_at};
}

Eigen::MatrixXd lyapunov_continuous(const Eigen::MatrixXd& A,
                                    const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(A, true);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("lyapunov: Schur decomposition failed");
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  const Eigen::MatrixXcd F = U.adjoint() * Q.cast<std::complex<double>>() * U;

  // Solve T Y + Y T^* + F = 0 column-by-column from the last column.
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (int k = n - 1; k >= 0; --k) {
    Eigen::VectorXcd rhs = -F.col(k);
    for (int j = k + 1; j < n; ++j) rhs -= Y.col(j) * std::conj(T(k, j));
    Eigen::MatrixXcd Tk = T;
    Tk.diagonal().array() += std::conj(T(k, k));
    Y.col(k) = Tk.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (U * Y * U.adjoint()).real();
}

double h2_norm(const StateSpaceModel& g) {
  if (g.D().size() && g.D().cwiseAbs().maxCoeff() > 0.0)
    throw std::runtime_error("h2_norm: H2 undefined for nonzero feedthrough");
  if (!is_stable(g))
    throw std::runtime_error("h2_norm: unstable system, poles:" +
                             unstable_pole_list(g));
  if (g.n_states() == 0) return 0.0;
  const Eigen::MatrixXd P = lyapunov_continuous(g.A(), g.B() * g.B().transpose());
  const double tr = (g.C() * P * g.C().transpose()).trace();
  return std::sqrt(std::max(0.0, tr));
}

}  // namespace astrolft
