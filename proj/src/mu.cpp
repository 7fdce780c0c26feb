#include "astrolft/mu.hpp"

#include "astrolft/threading.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace astrolft {

FrequencyGrid FrequencyGrid::log_space(double lo, double hi, int n) {
  FrequencyGrid g;
  g.kind = "log";
  g.lo = lo;
  g.hi = hi;
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("FrequencyGrid: invalid log range");
  for (int i = 0; i < n; ++i)
    g.omegas.push_back(
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
  return g;
}

FrequencyGrid FrequencyGrid::linear_space(double lo, double hi, int n) {
  FrequencyGrid g;
  g.kind = "linear";
  g.lo = lo;
  g.hi = hi;
  if (!(lo > 0.0) || !(hi > lo) || n < 2)
    throw std::invalid_argument("FrequencyGrid: invalid linear range");
  for (int i = 0; i < n; ++i)
    g.omegas.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

void FrequencyGrid::validate() const {
  double prev = 0.0;
  for (double w : omegas) {
    if (!(w > prev))
      throw std::invalid_argument(
          "FrequencyGrid: frequencies must be positive and increasing");
    prev = w;
  }
}

LftModel performance_channel(const LftModel& closed,
                             const std::vector<int>& phys_in,
                             const std::vector<int>& phys_out) {
  const int nd = closed.n_delta();
  std::vector<int> in_idx, out_idx;
  for (int i = 0; i < nd; ++i) {
    in_idx.push_back(i);
    out_idx.push_back(i);
  }
  for (int j : phys_in) in_idx.push_back(nd + j);
  for (int i : phys_out) out_idx.push_back(nd + i);
  return group_by_parameter(
      LftModel{closed.m.select(in_idx, out_idx), closed.delta});
}

namespace {

struct Groups {
  std::vector<std::string> names;
  std::vector<int> counts;
  int nd = 0;
  Eigen::VectorXi owner;  // delta channel -> parameter index
};

Groups make_groups(const UncertainBlockStructure& s) {
  Groups g;
  g.nd = s.total_dim();
  g.owner.resize(g.nd);
  int off = 0;
  for (const auto& b : s.blocks()) {
    auto it = std::find(g.names.begin(), g.names.end(), b.name);
    int idx;
    if (it == g.names.end()) {
      idx = static_cast<int>(g.names.size());
      g.names.push_back(b.name);
      g.counts.push_back(b.count);
    } else {
      idx = static_cast<int>(it - g.names.begin());
      if (idx != static_cast<int>(g.names.size()) - 1)
        throw std::invalid_argument(
            "mu: delta blocks must be grouped by parameter (use "
            "performance_channel)");
      g.counts[idx] += b.count;
    }
    for (int k = 0; k < b.count; ++k) g.owner(off + k) = idx;
    off += b.count;
  }
  return g;
}

struct FreqMatrices {
  double omega = 0.0;
  Eigen::MatrixXcd m11, m12, m21, m22;
};

FreqMatrices eval_partitioned(const StateSpaceModel& m, int nd, double omega) {
  FreqMatrices f;
  f.omega = omega;
  const Eigen::MatrixXcd full = eval_freq(m, omega).value;
  const int nz = static_cast<int>(full.rows()) - nd;
  const int nw = static_cast<int>(full.cols()) - nd;
  f.m11 = full.topLeftCorner(nd, nd);
  f.m12 = full.topRightCorner(nd, nw);
  f.m21 = full.bottomLeftCorner(nz, nd);
  f.m22 = full.bottomRightCorner(nz, nw);
  return f;
}

/// Gain of the performance channel at one frequency and one real sample.
double wc_gain(const FreqMatrices& f, const Groups& g,
               const Eigen::VectorXd& dpar) {
  const int nd = g.nd;
  if (nd == 0) return f.m22.jacobiSvd().singularValues()(0);
  Eigen::VectorXd dchan(nd);
  for (int c = 0; c < nd; ++c) dchan(c) = dpar(g.owner(c));
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Identity(nd, nd);
  for (int c = 0; c < nd; ++c) T.col(c) -= f.m11.col(c) * dchan(c);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
  Eigen::MatrixXcd X = lu.solve(f.m12);
  X.array().colwise() *= dchan.array().cast<std::complex<double>>();
  const Eigen::MatrixXcd F = f.m22 + f.m21 * X;
  return F.jacobiSvd().singularValues()(0);
}

/// Gauss-Seidel coordinate ascent over the unit box.
double coord_ascent(const FreqMatrices& f, const Groups& g,
                    Eigen::VectorXd& d, int cycles, int pts) {
  const int k = static_cast<int>(g.names.size());
  double best = wc_gain(f, g, d);
  for (int cyc = 0; cyc < cycles; ++cyc) {
    const double before = best;
    for (int i = 0; i < k; ++i) {
      double bi = d(i);
      for (int p = 0; p < pts; ++p) {
        const double v = -1.0 + 2.0 * p / (pts - 1);
        if (v == bi) continue;
        d(i) = v;
        const double gval = wc_gain(f, g, d);
        if (gval > best) {
          best = gval;
          bi = v;
        }
      }
      d(i) = bi;
      // local golden refinement in the winning sub-interval
      const double h = 2.0 / (pts - 1);
      double a = std::max(-1.0, bi - h), b = std::min(1.0, bi + h);
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
      d(i) = x1;
      double f1 = wc_gain(f, g, d);
      d(i) = x2;
      double f2 = wc_gain(f, g, d);
      for (int it = 0; it < 12; ++it) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + gr * (b - a);
          d(i) = x2;
          f2 = wc_gain(f, g, d);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - gr * (b - a);
          d(i) = x1;
          f1 = wc_gain(f, g, d);
        }
      }
      const double xm = std::clamp(0.5 * (a + b), -1.0, 1.0);
      d(i) = xm;
      const double fm = wc_gain(f, g, d);
      if (fm >= best) {
        best = fm;
      } else {
        d(i) = bi;
      }
    }
    if (best <= before * (1.0 + 1e-6)) break;
  }
  return best;
}

/// Vertex + random multistart intensification at one frequency.
double intensify(const FreqMatrices& f, const Groups& g, std::mt19937_64& rng,
                 const MuOptions& opt, Eigen::VectorXd& d_best) {
  const int k = static_cast<int>(g.names.size());
  double best = wc_gain(f, g, d_best);
  std::vector<std::pair<double, Eigen::VectorXd>> ranked;
  const size_t n_vert = size_t{1} << std::min(k, 10);
  for (size_t v = 0; v < n_vert; ++v) {
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) d(i) = (v >> i) & 1 ? 1.0 : -1.0;
    ranked.emplace_back(wc_gain(f, g, d), d);
  }
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int r = 0; r < opt.n_random_starts; ++r) {
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) d(i) = unif(rng);
    ranked.emplace_back(wc_gain(f, g, d), d);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const int keep = std::min<int>(opt.intensify_starts, ranked.size());
  for (int s = 0; s < keep; ++s) {
    Eigen::VectorXd d = ranked[s].second;
    const double v = coord_ascent(f, g, d, opt.ascent_cycles + 2, 17);
    if (v > best) {
      best = v;
      d_best = d;
    }
  }
  return best;
}

std::vector<size_t> chunk_bounds(size_t n, size_t chunks) {
  std::vector<size_t> b;
  for (size_t c = 0; c <= chunks; ++c) b.push_back(n * c / chunks);
  return b;
}

}  // namespace

double certificate_gain(const LftModel& perf_lft,
                        const std::map<std::string, double>& sample,
                        double omega) {
  const StateSpaceModel closed = close_lft(perf_lft, sample);
  return eval_freq(closed, omega).value.jacobiSvd().singularValues()(0);
}

MuResult mu_lower_bound(const LftModel& perf_lft, const FrequencyGrid& grid,
                        const MuOptions& opt,
                        const std::map<std::string, UncertainReal>* registry) {
  grid.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const LftModel lft = group_by_parameter(perf_lft);
  const Groups g = make_groups(lft.delta);
  const int k = static_cast<int>(g.names.size());
  const size_t nf = grid.omegas.size();

  std::vector<FreqMatrices> fm(nf);
  parallel_for(nf, [&](size_t i) {
    fm[i] = eval_partitioned(lft.m, g.nd, grid.omegas[i]);
  });

  MuResult res;
  res.seed = opt.seed;
  res.omegas = grid.omegas;
  res.lower_curve.assign(nf, 0.0);
  std::vector<Eigen::VectorXd> dsol(nf, Eigen::VectorXd::Zero(k));

  // Warm-started sweeps in a fixed number of chunks (results independent of
  // the worker count).
  const size_t nchunks = std::min<size_t>(8, nf);
  const auto bounds = chunk_bounds(nf, nchunks);
  parallel_for(nchunks, [&](size_t c) {
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(k);
    for (size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
      Eigen::VectorXd d = warm;
      double v = coord_ascent(fm[i], g, d, opt.ascent_cycles, opt.coord_points);
      Eigen::VectorXd dz = Eigen::VectorXd::Zero(k);
      const double vz = coord_ascent(fm[i], g, dz, 1, opt.coord_points);
      if (vz > v) {
        v = vz;
        d = dz;
      }
      res.lower_curve[i] = v;
      dsol[i] = d;
      warm = d;
    }
  });

  // Intensify the highest local maxima.
  std::vector<size_t> order(nf);
  for (size_t i = 0; i < nf; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return res.lower_curve[a] > res.lower_curve[b];
  });
  std::vector<size_t> picks;
  for (size_t i : order) {
    bool near = false;
    for (size_t p : picks) {
      const size_t d = p > i ? p - i : i - p;
      if (d < std::max<size_t>(2, nf / 20)) near = true;
    }
    if (!near) picks.push_back(i);
    if (static_cast<int>(picks.size()) >= std::max(1, opt.intensify_top)) break;
  }
  parallel_for(picks.size(), [&](size_t pi) {
    const size_t i = picks[pi];
    std::mt19937_64 rng(opt.seed + 1000003u * static_cast<unsigned>(i));
    Eigen::VectorXd d = dsol[i];
    const double v = intensify(fm[i], g, rng, opt, d);
    if (v > res.lower_curve[i]) {
      res.lower_curve[i] = v;
      dsol[i] = d;
    }
  });

  size_t ibest = 0;
  for (size_t i = 1; i < nf; ++i)
    if (res.lower_curve[i] > res.lower_curve[ibest]) ibest = i;
  double best = res.lower_curve[ibest];
  Eigen::VectorXd dbest = dsol[ibest];
  double wbest = grid.omegas[ibest];

  // Local frequency refinement around the peak at the found sample.
  for (int round = 0; round < opt.refine_rounds; ++round) {
    const double wlo = ibest > 0 ? grid.omegas[ibest - 1] : wbest * 0.8;
    const double whi =
        ibest + 1 < nf ? grid.omegas[ibest + 1] : wbest * 1.25;
    auto gain_at = [&](double w) {
      return wc_gain(eval_partitioned(lft.m, g.nd, w), g, dbest);
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = wlo, b = whi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = gain_at(x1), f2 = gain_at(x2);
    for (int it = 0; it < 24; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = gain_at(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = gain_at(x1);
      }
    }
    const double wm = 0.5 * (a + b);
    FreqMatrices fw = eval_partitioned(lft.m, g.nd, wm);
    Eigen::VectorXd d = dbest;
    const double v = coord_ascent(fw, g, d, opt.ascent_cycles, 17);
    if (v > best) {
      best = v;
      dbest = d;
      wbest = wm;
    } else {
      break;
    }
  }

  res.lower = best;
  res.peak_omega_lower = wbest;
  for (int i = 0; i < k; ++i) {
    res.worst_delta[g.names[i]] = dbest(i);
    if (registry) {
      auto it = registry->find(g.names[i]);
      if (it != registry->end())
        res.worst_physical[g.names[i]] = it->second.value_at(dbest(i));
    }
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

// ---------------------------------------------------------------------------
// Upper bound: skewed D-G scaled test.
// wc-gain(w) <= beta if there are structured D > 0, hermitian G with
//   F = N' D N + j (G N - N' G) - D < 0,   N = [[M11, M12],[M21, M22/..]/beta]
// (performance rows scaled by 1/beta; G vanishes on the complex block).
// Any (D, G) satisfying F < 0 is a certificate, so local optimization of the
// scalings can only make the bound looser, never wrong.
// ---------------------------------------------------------------------------

namespace {

struct DgWork {
  std::vector<Eigen::MatrixXcd> L;  // D_i = L_i L_i^* + eps I
  std::vector<Eigen::MatrixXcd> H;  // G_i = (H_i + H_i^*)/2
  double t = 0.0;                   // perf scaling d = exp(t)
  void init(const Groups& g) {
    L.clear();
    H.clear();
    for (int c : g.counts) {
      L.push_back(Eigen::MatrixXcd::Identity(c, c));
      H.push_back(Eigen::MatrixXcd::Zero(c, c));
    }
    t = 0.0;
  }
};

constexpr double kDgEps = 1e-10;

/// Assembles F(D,G) and its exact top eigenvalue; when grad != nullptr also
/// the gradient of the log-sum-exp smoothed top eigenvalue w.r.t. (L, H, t).
double dg_eval(const Eigen::MatrixXcd& N, const Groups& g, int np,
               const DgWork& w, DgWork* grad) {
  const int n = static_cast<int>(N.rows());
  const int nd = g.nd;
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
  int off = 0;
  for (size_t i = 0; i < w.L.size(); ++i) {
    const int c = g.counts[i];
    D.block(off, off, c, c) =
        w.L[i] * w.L[i].adjoint() +
        kDgEps * Eigen::MatrixXcd::Identity(c, c);
    const Eigen::MatrixXcd Gi = 0.5 * (w.H[i] + w.H[i].adjoint());
    G.block(off, off, c, c) = Gi;
    off += c;
  }
  const double d = std::exp(std::clamp(w.t, -40.0, 40.0));
  D.block(nd, nd, np, np) = d * Eigen::MatrixXcd::Identity(np, np);

  const Eigen::MatrixXcd ND = D * N;
  Eigen::MatrixXcd F = N.adjoint() * ND - D;
  const Eigen::MatrixXcd GN = G * N;
  F += std::complex<double>(0.0, 1.0) * (GN - GN.adjoint());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(F);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double lam1 = lam(n - 1);
  if (!grad) return lam1;

  // softmax weights over eigenvalues (smoothed max)
  const double temp = std::max(1e-12, 1e-3 * (lam(n - 1) - lam(0) + 1e-9));
  Eigen::VectorXd s(n);
  double zsum = 0.0;
  for (int i = 0; i < n; ++i) {
    s(i) = std::exp((lam(i) - lam1) / temp);
    zsum += s(i);
  }
  s /= zsum;
  const Eigen::MatrixXcd W =
      es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();

  const Eigen::MatrixXcd NW = N * W;
  const Eigen::MatrixXcd Pd = NW * N.adjoint() - W;  // dF/dD dual
  const Eigen::MatrixXcd Pg =
      std::complex<double>(0.0, 1.0) * (NW - NW.adjoint());

  grad->L.resize(w.L.size());
  grad->H.resize(w.H.size());
  off = 0;
  for (size_t i = 0; i < w.L.size(); ++i) {
    const int c = g.counts[i];
    grad->L[i] = 2.0 * Pd.block(off, off, c, c) * w.L[i];
    grad->H[i] = Pg.block(off, off, c, c);
    off += c;
  }
  grad->t = d * Pd.block(nd, nd, np, np).real().trace();
  return lam1;
}

double dot(const DgWork& a, const DgWork& b) {
  double s = a.t * b.t;
  for (size_t i = 0; i < a.L.size(); ++i) {
    s += (a.L[i].conjugate().cwiseProduct(b.L[i])).sum().real();
    s += (a.H[i].conjugate().cwiseProduct(b.H[i])).sum().real();
  }
  return s;
}

void axpy(DgWork& y, double alpha, const DgWork& x) {
  y.t += alpha * x.t;
  for (size_t i = 0; i < y.L.size(); ++i) {
    y.L[i] += alpha * x.L[i];
    y.H[i] += alpha * x.H[i];
  }
}

/// Barzilai-Borwein descent on the smoothed top eigenvalue; returns true as
/// soon as the exact eigenvalue certifies feasibility.
bool dg_feasible(const Eigen::MatrixXcd& N, const Groups& g, int np,
                 DgWork& w, int max_iter) {
  DgWork grad, grad_prev, step;
  double f = dg_eval(N, g, np, w, &grad);
  if (f < -1e-12) return true;
  // reset to identity scalings if the warm start is wildly infeasible
  {
    DgWork id;
    id.init(g);
    DgWork gid;
    const double fid = dg_eval(N, g, np, id, &gid);
    if (fid < f) {
      w = id;
      grad = gid;
      f = fid;
      if (f < -1e-12) return true;
    }
  }
  double alpha = 0.5 / std::sqrt(std::max(1e-16, dot(grad, grad)));
  DgWork w_prev = w;
  grad_prev = grad;
  for (int it = 0; it < max_iter; ++it) {
    DgWork trial = w;
    axpy(trial, -alpha, grad);
    DgWork gtrial;
    const double ftrial = dg_eval(N, g, np, trial, &gtrial);
    if (ftrial < -1e-12) {
      w = trial;
      return true;
    }
    if (ftrial < f * (f > 0 ? 1.02 : 0.98) + 1e-14) {
      // accepted (mildly non-monotone)
      DgWork dx = trial;
      axpy(dx, -1.0, w);
      DgWork dg = gtrial;
      axpy(dg, -1.0, grad);
      const double num = dot(dx, dx), den = dot(dx, dg);
      w_prev = w;
      grad_prev = grad;
      w = trial;
      grad = gtrial;
      f = std::min(f, ftrial);
      alpha = (den > 1e-18) ? std::clamp(num / den, 1e-9, 1e4)
                            : alpha * 1.5;
    } else {
      alpha *= 0.5;
      if (alpha < 1e-14) break;
    }
  }
  return dg_eval(N, g, np, w, nullptr) < -1e-12;
}

Eigen::MatrixXcd skewed(const FreqMatrices& f, double beta) {
  const int nd = static_cast<int>(f.m11.rows());
  const int nz = static_cast<int>(f.m21.rows());
  const int nw = static_cast<int>(f.m12.cols());
  Eigen::MatrixXcd N(nd + nz, nd + nw);
  N.topLeftCorner(nd, nd) = f.m11;
  N.topRightCorner(nd, nw) = f.m12;
  N.bottomLeftCorner(nz, nd) = f.m21 / beta;
  N.bottomRightCorner(nz, nw) = f.m22 / beta;
  return N;
}

/// Smallest beta certified by the unscaled singular-value test, or NaN.
double sv_upper(const FreqMatrices& f, double lb) {
  auto sv = [&](double beta) {
    return skewed(f, beta).jacobiSvd().singularValues()(0);
  };
  double hi = std::max(lb, 1e-6);
  bool ok = false;
  for (int i = 0; i < 60; ++i) {
    if (sv(hi) <= 0.999) {
      ok = true;
      break;
    }
    hi *= 2.0;
  }
  if (!ok) return std::numeric_limits<double>::quiet_NaN();
  double lo = std::max(1e-12, lb);
  for (int i = 0; i < 40 && hi / lo > 1.01; ++i) {
    const double mid = std::sqrt(lo * hi);
    (sv(mid) <= 0.999 ? hi : lo) = mid;
  }
  return hi;
}

struct UpperPoint {
  double omega = 0.0;
  double value = std::numeric_limits<double>::infinity();
  bool flagged = false;
};

UpperPoint upper_at(const FreqMatrices& f, const Groups& g, int np,
                    const MuOptions& opt, double lower_hint, DgWork& warm) {
  UpperPoint pt;
  pt.omega = f.omega;
  double lb = std::max(1e-9, lower_hint * 0.995);
  double ub = sv_upper(f, lb);
  if (std::isnan(ub)) {
    // no unscaled certificate; probe upward with scalings
    double probe = std::max(2.0 * lb, 1e-3);
    const double cap = opt.beta_cap_factor * std::max(lb, 1.0);
    bool found = false;
    while (probe <= cap) {
      if (dg_feasible(skewed(f, probe), g, np, warm, opt.dg_max_iter)) {
        found = true;
        break;
      }
      probe *= 2.0;
    }
    if (!found) {
      pt.flagged = true;  // robustness itself not certified on this box
      return pt;
    }
    ub = probe;
  }
  // bisect with D-G certificates
  double lo = lb;
  while (ub / lo > 1.0 + opt.bisect_rtol) {
    const double mid = std::sqrt(lo * ub);
    DgWork trial = warm;
    if (dg_feasible(skewed(f, mid), g, np, trial, opt.dg_max_iter)) {
      ub = mid;
      warm = trial;
    } else {
      lo = mid;
    }
  }
  pt.value = ub;
  return pt;
}

}  // namespace

MuResult mu_upper_bound(const LftModel& perf_lft, const FrequencyGrid& grid,
                        const MuOptions& opt,
                        const std::vector<double>* lower_hint) {
  grid.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const LftModel lft = group_by_parameter(perf_lft);
  const Groups g = make_groups(lft.delta);
  const int np = lft.n_phys_outputs();
  if (lft.n_phys_inputs() != np)
    throw std::invalid_argument(
        "mu_upper_bound: performance channel must be square");
  const size_t nf = grid.omegas.size();

  std::vector<FreqMatrices> fm(nf);
  parallel_for(nf, [&](size_t i) {
    fm[i] = eval_partitioned(lft.m, g.nd, grid.omegas[i]);
  });

  std::vector<UpperPoint> pts(nf);
  const size_t nchunks = std::min<size_t>(8, nf);
  const auto bounds = chunk_bounds(nf, nchunks);
  parallel_for(nchunks, [&](size_t c) {
    DgWork warm;
    warm.init(g);
    for (size_t i = bounds[c]; i < bounds[c + 1]; ++i) {
      const double hint =
          lower_hint && i < lower_hint->size() ? (*lower_hint)[i] : 0.0;
      pts[i] = upper_at(fm[i], g, np, opt, hint, warm);
    }
  });

  // Adaptive refinement where neighbouring bounds differ by > 5 %.
  int budget = opt.adaptive_extra;
  while (budget > 0) {
    double worst = 1.05;
    size_t at = SIZE_MAX;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i].flagged || pts[i + 1].flagged) continue;
      const double r = std::max(pts[i].value / pts[i + 1].value,
                                pts[i + 1].value / pts[i].value);
      if (r > worst &&
          pts[i + 1].omega / pts[i].omega > 1.0005) {
        worst = r;
        at = i;
      }
    }
    if (at == SIZE_MAX) break;
    const double wm = std::sqrt(pts[at].omega * pts[at + 1].omega);
    FreqMatrices f = eval_partitioned(lft.m, g.nd, wm);
    DgWork warm;
    warm.init(g);
    UpperPoint p = upper_at(f, g, np, opt, 0.0, warm);
    pts.insert(pts.begin() + at + 1, p);
    --budget;
  }

  MuResult res;
  res.seed = opt.seed;
  res.upper_computed = true;
  res.grid_note =
      "upper bound certified at grid points only (" + grid.kind +
      " grid, adaptive 5% refinement); not an inter-frequency guarantee";
  double best = 0.0;
  for (const auto& p : pts) {
    res.upper_omegas.push_back(p.omega);
    res.upper_curve.push_back(p.value);
    if (p.flagged) ++res.upper_flagged_points;
    if (std::isfinite(p.value) && p.value > best) {
      best = p.value;
      res.peak_omega_upper = p.omega;
    }
  }
  res.upper = res.upper_flagged_points
                  ? std::numeric_limits<double>::infinity()
                  : best;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

std::vector<ThetaSweepEntry> grid_sigma4_sweep(
    const LftModel& perf_lft, int n_theta, const FrequencyGrid& grid,
    const MuOptions& opt, bool with_upper, const std::string& sigma4_name,
    const std::map<std::string, UncertainReal>* registry) {
  if (n_theta < 1) throw std::invalid_argument("grid_sigma4_sweep: n_theta");
  if (perf_lft.delta.repetition_of(sigma4_name) == 0)
    throw std::invalid_argument(
        "grid_sigma4_sweep: model does not contain the '" + sigma4_name +
        "' blocks");
  std::vector<ThetaSweepEntry> entries(n_theta);
  parallel_for(static_cast<size_t>(n_theta), [&](size_t k) {
    ThetaSweepEntry& e = entries[k];
    e.theta_deg = -180.0 + 360.0 * static_cast<double>(k + 1) / n_theta;
    try {
      const double s4 = std::tan(e.theta_deg * std::numbers::pi / 180.0 / 4.0);
      LftModel closed =
          close_lft_partial(perf_lft, {{sigma4_name, s4}});
      MuOptions o = opt;
      o.seed = opt.seed + 7919u * static_cast<unsigned>(k);
      e.result = mu_lower_bound(closed, grid, o, registry);
      if (with_upper) {
        MuResult up = mu_upper_bound(closed, grid, o, &e.result.lower_curve);
        e.result.upper = up.upper;
        e.result.peak_omega_upper = up.peak_omega_upper;
        e.result.upper_omegas = up.upper_omegas;
        e.result.upper_curve = up.upper_curve;
        e.result.upper_flagged_points = up.upper_flagged_points;
        e.result.upper_computed = true;
        e.result.grid_note = up.grid_note;
      }
      e.ok = true;
    } catch (const std::exception& ex) {
      e.ok = false;
      e.error = ex.what();
    }
  });
  return entries;
}

}  // namespace astrolft
