#pragma once

#include "astrolft/bodies.hpp"

namespace astrolft {

/// Full spacecraft: central rigid body with two symmetric flexible arrays at
/// angles theta and -theta, driven by one shared sigma4 = tan(theta/4)
/// parameter through four varying-DCM blocks.
struct SpacecraftConfig {
  RigidBodyParams body;
  FlexibleAppendageParams app1;
  FlexibleAppendageParams app2;
  Eigen::Matrix3d P_a1_b;  // appendage-1 frame (theta = 0) -> body frame
  Eigen::Matrix3d P_a2_b;
  std::string sigma4_name = "sigma4";
};

/// Builds the uncertain 6-in (wrench at P3 = B, in R_b) / 6-out (acceleration
/// twist at P3) spacecraft model. Delta order: (A1 modes, body, A2 modes,
/// sigma4 x4); within the sigma4 group the convention is
/// (A1 wrench side, A1 acceleration side, A2 wrench side, A2 acceleration
/// side). External labels: "W_P3.0..5", "a_P3.0..5".
LftModel assemble(const SpacecraftConfig& cfg);

/// Whole-spacecraft rigid inertia at B from the DC gain of the nominal model:
/// J = [ dc_gain(nominal)^-1 ]{4:6,4:6}.
Eigen::Matrix3d rigid_inertia(const LftModel& spacecraft);

/// (omega, singular values) rows of a channel selection of g over a grid.
Eigen::MatrixXd singular_value_sweep(const StateSpaceModel& g,
                                     const std::vector<int>& in_idx,
                                     const std::vector<int>& out_idx,
                                     const std::vector<double>& omegas);

inline double sigma4_of_theta(double theta_rad) {
  return std::tan(theta_rad / 4.0);
}

}  // namespace astrolft
