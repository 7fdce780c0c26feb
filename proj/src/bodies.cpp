#include "astrolft/bodies.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace astrolft {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Matrix6d transport_twist(const Eigen::Vector3d& r_ap) {
  Matrix6d t = Matrix6d::Identity();
  t.block<3, 3>(0, 3) = -skew(r_ap);
  return t;
}

namespace {

std::vector<std::string> channels(const std::string& base, int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(base + "." + std::to_string(i));
  return v;
}

std::vector<std::string> delta_channels(const std::string& instance,
                                        const std::string& param, int n,
                                        const char* side) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i)
    v.push_back("~" + instance + "." + param + "." + std::to_string(i) + side);
  return v;
}

}  // namespace

LftModel rigid_multiport(const RigidBodyParams& p, const std::string& instance) {
  const double m0 = p.mass.nominal;
  Eigen::Matrix3d J0 = p.inertia;
  // Range checks at the box vertices.
  if (p.mass.value_at(-1.0) <= 0.0)
    throw std::invalid_argument(instance +
                                ": range violation, non-positive mass sample");
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2) {
        Eigen::Matrix3d J = J0;
        J(0, 0) = p.inertia_diag_unc[0].value_at(sx);
        J(1, 1) = p.inertia_diag_unc[1].value_at(sy);
        J(2, 2) = p.inertia_diag_unc[2].value_at(sz);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(J);
        if (es.eigenvalues().minCoeff() <= 0.0)
          throw std::invalid_argument(
              instance +
              ": range violation, inertia sample not positive definite");
      }

  Matrix6d D0 = Matrix6d::Zero();
  D0.block<3, 3>(0, 0) = m0 * Eigen::Matrix3d::Identity();
  D0.block<3, 3>(3, 3) = J0;
  const Matrix6d D0inv = D0.inverse();

  // D(delta) = D0 + Bd * Delta * Cd, Delta = blkdiag(dm I3, dJxx, dJyy, dJzz)
  Eigen::Matrix<double, 6, 6> Bd = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 6> Cd = Eigen::Matrix<double, 6, 6>::Zero();
  Bd.block<3, 3>(0, 0) = p.mass.half_range * Eigen::Matrix3d::Identity();
  Cd.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();
  for (int k = 0; k < 3; ++k) {
    Bd(3 + k, 3 + k) = p.inertia_diag_unc[k].half_range;
    Cd(3 + k, 3 + k) = 1.0;
  }

  const std::array<Eigen::Vector3d, 3> levers = {p.p1 - p.com, p.p2 - p.com,
                                                 Eigen::Vector3d::Zero()};
  std::array<Matrix6d, 3> tau;
  for (int i = 0; i < 3; ++i) tau[i] = transport_twist(levers[i]);

  // a_B = D(delta)^-1 sum_j tau_j^T W_j, a_Pi = tau_i a_B.
  Eigen::MatrixXd M(6 + 18, 6 + 18);
  M.block<6, 6>(0, 0) = -Cd * D0inv * Bd;
  for (int j = 0; j < 3; ++j)
    M.block<6, 6>(0, 6 + 6 * j) = Cd * D0inv * tau[j].transpose();
  for (int i = 0; i < 3; ++i) {
    M.block<6, 6>(6 + 6 * i, 0) = -tau[i] * D0inv * Bd;
    for (int j = 0; j < 3; ++j)
      M.block<6, 6>(6 + 6 * i, 6 + 6 * j) =
          tau[i] * D0inv * tau[j].transpose();
  }

  std::vector<std::string> in, out;
  auto add = [](std::vector<std::string>& dst, std::vector<std::string> src) {
    dst.insert(dst.end(), src.begin(), src.end());
  };
  add(in, delta_channels(instance, p.mass.name, 3, "w"));
  for (int k = 0; k < 3; ++k)
    add(in, delta_channels(instance, p.inertia_diag_unc[k].name, 1, "w"));
  add(out, delta_channels(instance, p.mass.name, 3, "z"));
  for (int k = 0; k < 3; ++k)
    add(out, delta_channels(instance, p.inertia_diag_unc[k].name, 1, "z"));
  for (int j = 0; j < 3; ++j)
    add(in, channels(instance + ".W_P" + std::to_string(j + 1), 6));
  for (int i = 0; i < 3; ++i)
    add(out, channels(instance + ".a_P" + std::to_string(i + 1), 6));

  std::vector<UncertainBlock> blocks;
  if (p.mass.half_range > 0.0) blocks.push_back({p.mass.name, 3});
  for (int k = 0; k < 3; ++k)
    if (p.inertia_diag_unc[k].half_range > 0.0)
      blocks.push_back({p.inertia_diag_unc[k].name, 1});
  if (blocks.size() != 4) {
    // Degenerate (certain) parameters: drop their channels to keep the block
    // list and channel count consistent.
    std::vector<int> keep;
    int idx = 0;
    auto keep_param = [&](const UncertainReal& u, int n) {
      for (int i = 0; i < n; ++i, ++idx)
        if (u.half_range > 0.0) keep.push_back(idx);
    };
    keep_param(p.mass, 3);
    for (int k = 0; k < 3; ++k) keep_param(p.inertia_diag_unc[k], 1);
    for (int j = 6; j < 24; ++j) keep.push_back(j);
    std::vector<std::string> in2, out2;
    for (int j : keep) {
      in2.push_back(in[j]);
      out2.push_back(out[j]);
    }
    Eigen::MatrixXd M2(keep.size(), keep.size());
    for (size_t a = 0; a < keep.size(); ++a)
      for (size_t b = 0; b < keep.size(); ++b) M2(a, b) = M(keep[a], keep[b]);
    return LftModel{StateSpaceModel::static_gain(M2, in2, out2),
                    UncertainBlockStructure(blocks)};
  }
  return LftModel{StateSpaceModel::static_gain(M, in, out),
                  UncertainBlockStructure(blocks)};
}

Matrix6d appendage_port_mass(const FlexibleAppendageParams& p) {
  Matrix6d Da = Matrix6d::Zero();
  Da.block<3, 3>(0, 0) = p.mass * Eigen::Matrix3d::Identity();
  Da.block<3, 3>(3, 3) = p.inertia;
  const Matrix6d tau = transport_twist(-p.com);  // A -> P, port at the origin
  return tau.transpose() * Da * tau;
}

Matrix6d appendage_residual_mass(const FlexibleAppendageParams& p) {
  Matrix6d D = appendage_port_mass(p);
  for (int j = 0; j < 3; ++j) {
    const Eigen::Matrix<double, 1, 6> l = p.participation.row(j);
    D -= l.transpose() * l;
  }
  return D;
}

ResidualMassResult residual_mass_check(const FlexibleAppendageParams& p,
                                       unsigned seed) {
  // The residual mass depends on mass/inertia/CoM/participation, none of
  // which are uncertain in this parametrization; the sampling loop still
  // walks the mode-frequency box so the verdict carries an explicit worst
  // sample.
  ResidualMassResult r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto eval_at = [&](const std::map<std::string, double>& sample) {
    Eigen::SelfAdjointEigenSolver<Matrix6d> es(appendage_residual_mass(p));
    const double mn = es.eigenvalues().minCoeff();
    if (mn < r.min_eigenvalue) {
      r.min_eigenvalue = mn;
      r.worst_sample = sample;
    }
  };
  std::vector<const UncertainReal*> unc;
  for (const auto& u : p.mode_freq)
    if (!u.is_certain()) unc.push_back(&u);
  const size_t k = unc.size();
  for (size_t v = 0; v < (size_t{1} << k); ++v) {
    std::map<std::string, double> s;
    for (size_t i = 0; i < k; ++i) s[unc[i]->name] = (v >> i) & 1 ? 1.0 : -1.0;
    eval_at(s);
  }
  for (int it = 0; it < 1000; ++it) {
    std::map<std::string, double> s;
    for (size_t i = 0; i < k; ++i) s[unc[i]->name] = unif(rng);
    eval_at(s);
  }
  r.positive_definite = r.min_eigenvalue > 0.0;
  return r;
}

LftModel flexible_appendage(const FlexibleAppendageParams& p,
                            const std::string& instance) {
  const Matrix6d Dp0 = appendage_residual_mass(p);
  {
    Eigen::SelfAdjointEigenSolver<Matrix6d> es(Dp0);
    const double mn = es.eigenvalues().minCoeff();
    const double scale = std::max(1.0, Dp0.cwiseAbs().maxCoeff());
    if (mn < -1e-9 * scale)
      throw std::invalid_argument(
          instance + ": residual mass indefinite at nominal (min eig " +
          std::to_string(mn) + "), construction refused");
  }

  const int n = 6;        // 2 states per mode
  const int nd = 12;      // 4 delta channels per mode
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, nd + 6);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nd + 6, n);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nd + 6, nd + 6);
  D.block<6, 6>(nd, nd) = -Dp0;

  std::vector<UncertainBlock> blocks;
  std::vector<std::string> in, out;
  for (int j = 0; j < 3; ++j) {
    const double w0 = p.mode_freq[j].nominal;
    const double rho = p.mode_freq[j].half_range;
    const double xi = p.damping[j];
    if (w0 <= 0.0 || p.mode_freq[j].value_at(-1.0) <= 0.0)
      throw std::invalid_argument(instance +
                                  ": mode frequency not positive over range");
    const int sp = 2 * j;      // scaled position state (omega * x)
    const int sv = 2 * j + 1;  // velocity state
    const int wc = 4 * j;      // first of this mode's 4 delta inputs
    const Eigen::Matrix<double, 1, 6> l = p.participation.row(j);

    // p' = w0 q + w1;  q' = -(w0 p + w2) - 2 xi (w0 q + w1) + l a
    A(sp, sv) = w0;
    A(sv, sp) = -w0;
    A(sv, sv) = -2.0 * xi * w0;
    B(sp, wc + 0) = 1.0;
    B(sv, wc + 0) = -2.0 * xi;
    B(sv, wc + 1) = -1.0;
    B.block<1, 6>(sv, nd) = l;
    // z1 = rho q, z2 = rho p (dynamics); z3 = rho p, z4 = rho q (output)
    C(wc + 0, sv) = rho;
    C(wc + 1, sp) = rho;
    C(wc + 2, sp) = rho;
    C(wc + 3, sv) = rho;
    // modal output y_j = (w0 p + w3) + 2 xi (w0 q + w4); wrench -= l^T y_j
    C.block<6, 1>(nd, sp) -= l.transpose() * w0;
    C.block<6, 1>(nd, sv) -= l.transpose() * (2.0 * xi * w0);
    D.block<6, 1>(nd, wc + 2) = -l.transpose();
    D.block<6, 1>(nd, wc + 3) = -2.0 * xi * l.transpose();

    blocks.push_back({p.mode_freq[j].name, 4});
    auto din = delta_channels(instance, p.mode_freq[j].name, 4, "w");
    auto dout = delta_channels(instance, p.mode_freq[j].name, 4, "z");
    in.insert(in.end(), din.begin(), din.end());
    out.insert(out.end(), dout.begin(), dout.end());
  }
  auto ain = channels(instance + ".a_in", 6);
  auto wout = channels(instance + ".W_out", 6);
  in.insert(in.end(), ain.begin(), ain.end());
  out.insert(out.end(), wout.begin(), wout.end());

  return LftModel{StateSpaceModel(A, B, C, D, in, out),
                  UncertainBlockStructure(blocks)};
}

DcmPair dcm_constant(const Eigen::Matrix3d& P, const std::string& instance) {
  if ((P.transpose() * P - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
      1e-12)
    throw std::invalid_argument(instance + ": DCM is not orthogonal");
  Matrix6d twiced = Matrix6d::Zero();
  twiced.block<3, 3>(0, 0) = P;
  twiced.block<3, 3>(3, 3) = P;
  Matrix6d twicedT = Matrix6d::Zero();
  twicedT.block<3, 3>(0, 0) = P.transpose();
  twicedT.block<3, 3>(3, 3) = P.transpose();
  return {StateSpaceModel::static_gain(twiced, channels(instance + ".u", 6),
                                       channels(instance + ".y", 6)),
          StateSpaceModel::static_gain(twicedT,
                                       channels(instance + "T.u", 6),
                                       channels(instance + "T.y", 6))};
}

namespace {

/// One Cayley factor C(s) = -I + 2 (I - s K)^-1 as a 2-repetition LFT, using
/// the rank-2 factorization K = f e^T - e f^T.
LftModel cayley_factor(const Eigen::Vector3d& k, const std::string& sigma_name,
                       const std::string& instance) {
  Eigen::Vector3d seed = std::abs(k.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                               : Eigen::Vector3d::UnitY();
  Eigen::Vector3d e = (seed - seed.dot(k) * k).normalized();
  Eigen::Vector3d f = k.cross(e);
  Eigen::Matrix<double, 3, 2> U, V;
  U.col(0) = f;
  U.col(1) = -e;
  V.col(0) = e;
  V.col(1) = f;

  Eigen::MatrixXd M(2 + 3, 2 + 3);
  M.block<2, 2>(0, 0) = V.transpose() * U;
  M.block<2, 3>(0, 2) = V.transpose();
  M.block<3, 2>(2, 0) = 2.0 * U;
  M.block<3, 3>(2, 2) = Eigen::Matrix3d::Identity();

  std::vector<std::string> in = delta_channels(instance, sigma_name, 2, "w");
  std::vector<std::string> out = delta_channels(instance, sigma_name, 2, "z");
  auto u = channels(instance + ".u", 3);
  auto y = channels(instance + ".y", 3);
  in.insert(in.end(), u.begin(), u.end());
  out.insert(out.end(), y.begin(), y.end());
  return LftModel{StateSpaceModel::static_gain(M, in, out),
                  UncertainBlockStructure({{sigma_name, 2}})};
}

/// R(theta, k) twiced as an 8-repetition LFT in sigma4 = tan(theta/4).
LftModel rotation_twiced(const Eigen::Vector3d& k, const std::string& sigma_name,
                         const std::string& instance) {
  std::vector<LftModel> parts;
  ConnectSpec spec;
  for (int half = 0; half < 2; ++half) {  // translation block, rotation block
    const std::string h = instance + (half == 0 ? ".t" : ".r");
    LftModel c1 = cayley_factor(k, sigma_name, h + "1");
    LftModel c2 = cayley_factor(k, sigma_name, h + "2");
    parts.push_back(c1);
    parts.push_back(c2);
    for (int i = 0; i < 3; ++i) {
      spec.wires.push_back({h + "1.y." + std::to_string(i),
                            h + "2.u." + std::to_string(i), 1.0});
      spec.inputs.push_back({instance + ".u." + std::to_string(3 * half + i),
                             h + "1.u." + std::to_string(i), 1.0});
      spec.outputs.push_back({instance + ".y." + std::to_string(3 * half + i),
                              h + "2.y." + std::to_string(i), 1.0});
    }
  }
  for (int i = 0; i < 6; ++i) {
    spec.external_inputs.push_back(instance + ".u." + std::to_string(i));
    spec.external_outputs.push_back(instance + ".y." + std::to_string(i));
  }
  return group_by_parameter(interconnect_lft(parts, spec));
}

}  // namespace

DcmSigma4Pair dcm_sigma4(const Eigen::Vector3d& axis, int sense,
                         const std::string& sigma_name,
                         const std::string& instance) {
  if (std::abs(axis.norm() - 1.0) > 1e-12)
    throw std::invalid_argument(instance + ": rotation axis is not unit");
  const Eigen::Vector3d k = (sense >= 0 ? 1.0 : -1.0) * axis;
  return {rotation_twiced(k, sigma_name, instance),
          rotation_twiced(-k, sigma_name, instance + "T")};
}

}  // namespace astrolft
