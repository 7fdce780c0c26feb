#include "astrolft/acs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace astrolft {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<std::string> channels(const std::string& base, int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(base + "." + std::to_string(i));
  return v;
}

/// n identical decoupled copies of (A1,B1,C1,D1), 1x1 each.
StateSpaceModel per_axis(const Eigen::MatrixXd& A1, const Eigen::MatrixXd& B1,
                         const Eigen::MatrixXd& C1, double D1, int n,
                         const std::string& name) {
  const int ns = static_cast<int>(A1.rows());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n * ns, n * ns);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n * ns, n);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n * ns);
  Eigen::MatrixXd D = D1 * Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    A.block(i * ns, i * ns, ns, ns) = A1;
    B.block(i * ns, i, ns, 1) = B1;
    C.block(i, i * ns, 1, ns) = C1;
  }
  return StateSpaceModel(A, B, C, D, channels(name + ".u", n),
                         channels(name + ".y", n));
}

StateSpaceModel second_order_lp(double wn, double xi, int n,
                                const std::string& name) {
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, -wn * wn, -2 * xi * wn;
  B << 0, 1;
  C << wn * wn, 0;
  return per_axis(A, B, C, 0.0, n, name);
}

StateSpaceModel first_order_lp(double wc, int n, const std::string& name) {
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1);
  A << -wc;
  B << 1;
  C << wc;
  return per_axis(A, B, C, 0.0, n, name);
}

StateSpaceModel pade2_delay(double tau, int n, const std::string& name) {
  // e^{-tau s} ~ (s^2 - 6s/tau + 12/tau^2)/(s^2 + 6s/tau + 12/tau^2)
  Eigen::MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, -12.0 / (tau * tau), -6.0 / tau;
  B << 0, 1;
  C << 0, -12.0 / tau;
  return per_axis(A, B, C, 1.0, n, name);
}

}  // namespace

Requirements Requirements::defaults() {
  Requirements r;
  r.ape = Eigen::Vector3d(4.0, 4.0, 20.0) * (kPi / 180.0) * 1e-3;
  r.t_ext = Eigen::Vector3d(0.03, 0.01, 0.02);
  r.gamma = 1.5;
  r.psd_sst = 1e-8;
  r.psd_gyro = 1e-10;
  return r;
}

void Requirements::validate() const {
  if (!(ape.minCoeff() > 0.0) || !(t_ext.minCoeff() > 0.0) || !(gamma > 0.0) ||
      !(psd_sst > 0.0) || !(psd_gyro > 0.0))
    throw std::invalid_argument("Requirements: all entries must be positive");
}

void ControllerParams::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(kp[i] > 0.0) || !(kv[i] > 0.0) || !(w[i] > 0.0))
      throw std::invalid_argument("ControllerParams: non-positive parameter");
    if (w[i] >= 300.0)
      throw std::invalid_argument(
          "ControllerParams: filter cut-off above the delay-model validity "
          "band (300 rad/s)");
  }
}

ActuatorSensorModels actuator_sensor_models() {
  return {second_order_lp(200.0 * kPi, 0.7, 3, "RW"),
          first_order_lp(16.0 * kPi, 3, "SST"),
          first_order_lp(400.0 * kPi, 3, "GYRO"),
          pade2_delay(0.01, 3, "DELAY")};
}

StateSpaceModel k_acs(const ControllerParams& p) {
  p.validate();
  // states: one filter state per axis; x' = -w x + w (Kp th + Kv om); T = -x
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 6);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    A(i, i) = -p.w[i];
    B(i, i) = p.w[i] * p.kp[i];
    B(i, 3 + i) = p.w[i] * p.kv[i];
    C(i, i) = -1.0;
  }
  std::vector<std::string> in = channels("K.sst", 3);
  auto gy = channels("K.gyro", 3);
  in.insert(in.end(), gy.begin(), gy.end());
  return StateSpaceModel(A, B, C, Eigen::MatrixXd::Zero(3, 6), in,
                         channels("K.T", 3));
}

ControllerParams initial_tuning(const Eigen::Matrix3d& J,
                                const Requirements& req, double xi) {
  req.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(J);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("initial_tuning: J not positive definite");
  ControllerParams p;
  for (int i = 0; i < 3; ++i) {
    const double wr = std::sqrt(req.t_ext(i) / (J(i, i) * req.ape(i)));
    p.kp[i] = J(i, i) * wr * wr;  // identically T_ext/APE
    p.kv[i] = 2.0 * xi * J(i, i) * wr;
    p.w[i] = 20.0 * wr;
  }
  return p;
}

GeneralizedPlant generalized_plant(const LftModel& spacecraft,
                                   const Requirements& req) {
  req.validate();
  if (spacecraft.n_phys_inputs() != 6 || spacecraft.n_phys_outputs() != 6)
    throw std::invalid_argument(
        "generalized_plant: spacecraft must be the assembled 6x6 model");
  ActuatorSensorModels hw = actuator_sensor_models();

  // double integrator chain: theta_dd -> (rate, attitude)
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
  A.block<3, 3>(3, 0) = Eigen::Matrix3d::Identity();  // th' = om
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(6, 3);
  B.block<3, 3>(0, 0) = Eigen::Matrix3d::Identity();  // om' = th_dd
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(6, 6);
  std::vector<std::string> kin_out = channels("KIN.om", 3);
  auto th = channels("KIN.th", 3);
  kin_out.insert(kin_out.end(), th.begin(), th.end());
  StateSpaceModel kin(A, B, C, Eigen::MatrixXd::Zero(6, 3),
                      channels("KIN.u", 3), kin_out);

  std::vector<LftModel> parts = {spacecraft, as_lft(kin), as_lft(hw.rw),
                                 as_lft(hw.delay), as_lft(hw.sst),
                                 as_lft(hw.gyro)};
  ConnectSpec spec;
  auto wire3 = [&](const std::string& from, const std::string& to) {
    for (int i = 0; i < 3; ++i)
      spec.wires.push_back({from + "." + std::to_string(i),
                            to + "." + std::to_string(i), 1.0});
  };
  // control chain: uK -> DELAY -> RW; plant torque = RW + Wext Text~ + dS
  for (int i = 0; i < 3; ++i) {
    const std::string si = "." + std::to_string(i);
    spec.inputs.push_back({"uK" + si, "DELAY.u" + si, 1.0});
    spec.wires.push_back({"DELAY.y" + si, "RW.u" + si, 1.0});
    spec.wires.push_back({"RW.y" + si, "W_P3." + std::to_string(3 + i), 1.0});
    spec.inputs.push_back(
        {"Text~" + si, "W_P3." + std::to_string(3 + i), req.t_ext(i)});
    spec.inputs.push_back({"dS" + si, "W_P3." + std::to_string(3 + i), 1.0});
    // force channels of the wrench input are unused
    spec.grounded_inputs.push_back("W_P3." + std::to_string(i));
    // attitude kinematics from angular acceleration
    spec.wires.push_back({"a_P3." + std::to_string(3 + i), "KIN.u" + si, 1.0});
  }
  wire3("KIN.th", "SST.u");
  wire3("KIN.om", "GYRO.u");
  for (int i = 0; i < 3; ++i) {
    const std::string si = "." + std::to_string(i);
    // performance and measurement outputs
    spec.outputs.push_back({"Theta~" + si, "KIN.th" + si, 1.0 / req.ape(i)});
    spec.outputs.push_back({"T" + si, "RW.y" + si, 1.0});
    spec.outputs.push_back({"T" + si, "Text~" + si, req.t_ext(i)});
    spec.outputs.push_back({"T" + si, "dS" + si, 1.0});
    spec.outputs.push_back({"ySST" + si, "SST.y" + si, 1.0});
    spec.outputs.push_back({"ySST" + si, "nS~" + si, std::sqrt(req.psd_sst)});
    spec.outputs.push_back({"yGYRO" + si, "GYRO.y" + si, 1.0});
    spec.outputs.push_back(
        {"yGYRO" + si, "nG~" + si, std::sqrt(req.psd_gyro)});
  }
  for (const char* base : {"Text~", "dS", "nG~", "nS~", "uK"})
    for (int i = 0; i < 3; ++i)
      spec.external_inputs.push_back(std::string(base) + "." + std::to_string(i));
  for (const char* base : {"Theta~", "T", "ySST", "yGYRO"})
    for (int i = 0; i < 3; ++i)
      spec.external_outputs.push_back(std::string(base) + "." +
                                      std::to_string(i));
  return {interconnect_lft(parts, spec), req};
}

LftModel close_controller(const GeneralizedPlant& gp,
                          const ControllerParams& k) {
  StateSpaceModel kc = k_acs(k);
  const int nd = gp.plant.n_delta();
  // uK channels are the last 3 physical inputs; measurements the last 6 outs.
  std::vector<int> in_idx, out_idx;
  for (int i = 0; i < 3; ++i) in_idx.push_back(nd + 12 + i);
  for (int i = 0; i < 6; ++i) out_idx.push_back(nd + 6 + i);
  StateSpaceModel closed = feedback(gp.plant.m, kc, +1, in_idx, out_idx);
  // keep delta channels + [Text~, dS, nG~, nS~] -> [Theta~, T]
  std::vector<int> keep_in, keep_out;
  for (int i = 0; i < nd + 12; ++i) keep_in.push_back(i);
  for (int i = 0; i < nd + 6; ++i) keep_out.push_back(i);
  return LftModel{closed.select(keep_in, keep_out), gp.plant.delta};
}

}  // namespace astrolft
