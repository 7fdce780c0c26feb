#pragma once

#include "astrolft/lft.hpp"

#include <array>

namespace astrolft {

using Matrix6d = Eigen::Matrix<double, 6, 6>;

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Twist transport from A to P (linear, angular stacking):
///   tau_AP = [[I, -skew(r_AP)], [0, I]],  r_AP = vector A -> P.
/// Its transpose transports wrenches from P to A.
Matrix6d transport_twist(const Eigen::Vector3d& r_ap);

/// Central rigid body, Table-1 style data. Positions in the body frame R_b.
struct RigidBodyParams {
  UncertainReal mass;                       // kg
  Eigen::Matrix3d inertia;                  // kg m^2, at CoM B, in R_b
  std::array<UncertainReal, 3> inertia_diag_unc;  // Jxx, Jyy, Jzz
  Eigen::Vector3d com;                      // O_b -> B
  Eigen::Vector3d p1;                       // O_b -> P1 (appendage 1 port)
  Eigen::Vector3d p2;                       // O_b -> P2 (appendage 2 port)
  // P3 is coincident with B (actuators act at the CoM).
};

/// One-port flexible appendage. The port P is the frame origin; the CoM
/// offset and modal data are expressed in the appendage frame.
struct FlexibleAppendageParams {
  double mass = 0.0;                        // kg
  Eigen::Matrix3d inertia;                  // kg m^2, at CoM A
  Eigen::Vector3d com;                      // O_a -> A (port at O_a)
  std::array<UncertainReal, 3> mode_freq;   // rad/s
  std::array<double, 3> damping{};          // dimensionless
  Eigen::Matrix<double, 3, 6> participation;  // rows l_j at the port
};

/// 18x18 static uncertain model: wrenches at P1,P2,P3 -> acceleration twists
/// at P1,P2,P3, all in R_b. Delta blocks: (mass x3, Jxx, Jyy, Jzz).
/// Channel labels are prefixed by `instance`.
LftModel rigid_multiport(const RigidBodyParams& p, const std::string& instance);

/// 6-in/6-out dynamic uncertain model: imposed acceleration twist at the port
/// -> wrench applied by the appendage on its parent (action/reaction sign
/// included). Each mode frequency is repeated 4 times:
/// two delta-scaled integrator channels plus two feedthrough usages.
LftModel flexible_appendage(const FlexibleAppendageParams& p,
                            const std::string& instance);

struct ResidualMassResult {
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
  std::map<std::string, double> worst_sample;  // delta values
};

/// Worst-case check of the residual mass D_P0 = D_P - sum l_j^T l_j over the
/// vertices of the appendage's uncertain box plus 1000 random interior
/// samples.
ResidualMassResult residual_mass_check(const FlexibleAppendageParams& p,
                                       unsigned seed = 1u);

/// Total (rigid) 6x6 mass matrix of the appendage at its port.
Matrix6d appendage_port_mass(const FlexibleAppendageParams& p);

/// Residual mass at the port (Eq. of the static part).
Matrix6d appendage_residual_mass(const FlexibleAppendageParams& p);

struct DcmPair {
  StateSpaceModel direct;      // blkdiag(P, P), acts on inputs
  StateSpaceModel transposed;  // blkdiag(P^T, P^T), acts on outputs
};

/// Constant direction-cosine blocks (twiced). Throws if P is not orthogonal
/// to 1e-12.
DcmPair dcm_constant(const Eigen::Matrix3d& P, const std::string& instance);

struct DcmSigma4Pair {
  LftModel direct;      // R(theta, sense*axis) twiced, Delta = sigma4 I8
  LftModel transposed;  // its transpose twiced,      Delta = sigma4 I8
};

/// Exact LFT of the varying rotation, sigma4 = tan(theta/4):
/// R = C(sigma4)^2 with the Cayley factor C(s) = -I + 2(I - s*K)^-1,
/// K = skew(sense*axis). Four repetitions per 3x3 rotation, eight per twiced
/// block; well-posed for every real sigma4.
DcmSigma4Pair dcm_sigma4(const Eigen::Vector3d& axis, int sense,
                         const std::string& sigma_name,
                         const std::string& instance);

}  // namespace astrolft
