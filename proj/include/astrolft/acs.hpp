#pragma once

#include "astrolft/lft.hpp"

#include <array>

namespace astrolft {

/// Pointing / margin / noise requirements of the attitude control problem.
struct Requirements {
  Eigen::Vector3d ape;        // rad, absolute performance error bound
  Eigen::Vector3d t_ext;      // N m, low-frequency disturbance magnitude
  double gamma = 1.5;         // H-inf bound on the input sensitivity
  double psd_sst = 1e-8;      // rad^2 s
  double psd_gyro = 1e-10;    // rad^2 / s

  static Requirements defaults();
  void validate() const;  // all strictly positive
};

/// The 9 tunables of the decentralized PD + low-pass controller.
struct ControllerParams {
  std::array<double, 3> kp{};  // N m / rad
  std::array<double, 3> kv{};  // N m s / rad
  std::array<double, 3> w{};   // rad/s, output filter cut-off

  void validate() const;  // positive, w below the Pade validity band
};

struct ActuatorSensorModels {
  StateSpaceModel rw;     // reaction wheels, 2nd order, 100 Hz, xi = 0.7
  StateSpaceModel sst;    // star sensor, 1st order, 8 Hz
  StateSpaceModel gyro;   // gyrometer, 1st order, 200 Hz
  StateSpaceModel delay;  // 10 ms loop delay, 2nd-order Pade
};

ActuatorSensorModels actuator_sensor_models();

/// Per axis: T_i = -(w_i/(s+w_i)) (Kp_i theta_i + Kv_i omega_i).
/// Inputs: sst.0..2, gyro.0..2; outputs: torque command u.0..2.
StateSpaceModel k_acs(const ControllerParams& p);

/// Rigid-axis initialization: per axis, bandwidth
/// w_r = sqrt(T_ext / (J_ii APE)), Kp = J w_r^2 (= T_ext/APE), Kv = 2 xi J w_r,
/// filter at 20 w_r.
ControllerParams initial_tuning(const Eigen::Matrix3d& J,
                                const Requirements& req, double xi = 0.7);

/// Generalized plant with the controller slot open.
/// External inputs : Text~ (3, normalized disturbance torque),
///                   dS (3, unweighted margin probe at the plant input),
///                   nG~ (3), nS~ (3, unit-white sensor noises),
///                   uK (3, controller slot).
/// External outputs: Theta~ (3, APE-normalized attitude),
///                   T (3, total torque at the plant input),
///                   ySST (3), yGYRO (3, controller measurements).
struct GeneralizedPlant {
  LftModel plant;
  Requirements req;
};

GeneralizedPlant generalized_plant(const LftModel& spacecraft,
                                   const Requirements& req);

/// Closes the controller slot (uK <- K(ySST, yGYRO)); the result keeps
/// [Text~, dS, nG~, nS~] inputs and [Theta~, T] outputs.
LftModel close_controller(const GeneralizedPlant& gp,
                          const ControllerParams& k);

/// Channel index helpers on the closed loop (physical channels).
inline std::vector<int> pointing_inputs() { return {0, 1, 2}; }
inline std::vector<int> sensitivity_inputs() { return {3, 4, 5}; }
inline std::vector<int> noise_inputs() { return {6, 7, 8, 9, 10, 11}; }
inline std::vector<int> pointing_outputs() { return {0, 1, 2}; }
inline std::vector<int> torque_outputs() { return {3, 4, 5}; }

}  // namespace astrolft
