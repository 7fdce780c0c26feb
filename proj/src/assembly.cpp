#include "astrolft/assembly.hpp"

#include <stdexcept>

namespace astrolft {

namespace {

void wire6(ConnectSpec& spec, const std::string& from, const std::string& to) {
  for (int i = 0; i < 6; ++i)
    spec.wires.push_back({from + "." + std::to_string(i),
                          to + "." + std::to_string(i), 1.0});
}

}  // namespace

LftModel assemble(const SpacecraftConfig& cfg) {
  for (const auto* app : {&cfg.app1, &cfg.app2}) {
    const auto check = residual_mass_check(*app);
    if (!check.positive_definite)
      throw std::invalid_argument(
          "assemble: appendage residual mass not positive definite (min eig " +
          std::to_string(check.min_eigenvalue) + ")");
  }

  LftModel a1 = flexible_appendage(cfg.app1, "A1");
  LftModel bus = rigid_multiport(cfg.body, "B");
  LftModel a2 = flexible_appendage(cfg.app2, "A2");
  const Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  DcmSigma4Pair r1 = dcm_sigma4(axis, +1, cfg.sigma4_name, "R1");
  DcmSigma4Pair r2 = dcm_sigma4(axis, -1, cfg.sigma4_name, "R2");
  DcmPair p1 = dcm_constant(cfg.P_a1_b, "P1c");
  DcmPair p2 = dcm_constant(cfg.P_a2_b, "P2c");

  std::vector<LftModel> parts = {a1,
                                 bus,
                                 a2,
                                 r1.direct,
                                 r1.transposed,
                                 r2.direct,
                                 r2.transposed,
                                 as_lft(p1.direct),
                                 as_lft(p1.transposed),
                                 as_lft(p2.direct),
                                 as_lft(p2.transposed)};
  ConnectSpec spec;
  // acceleration side: bus -> P0^T -> R^T -> appendage
  wire6(spec, "B.a_P1", "P1cT.u");
  wire6(spec, "P1cT.y", "R1T.u");
  wire6(spec, "R1T.y", "A1.a_in");
  wire6(spec, "B.a_P2", "P2cT.u");
  wire6(spec, "P2cT.y", "R2T.u");
  wire6(spec, "R2T.y", "A2.a_in");
  // wrench side: appendage -> R -> P0 -> bus
  wire6(spec, "A1.W_out", "R1.u");
  wire6(spec, "R1.y", "P1c.u");
  wire6(spec, "P1c.y", "B.W_P1");
  wire6(spec, "A2.W_out", "R2.u");
  wire6(spec, "R2.y", "P2c.u");
  wire6(spec, "P2c.y", "B.W_P2");
  for (int i = 0; i < 6; ++i) {
    spec.inputs.push_back({"W_P3." + std::to_string(i),
                           "B.W_P3." + std::to_string(i), 1.0});
    spec.outputs.push_back({"a_P3." + std::to_string(i),
                            "B.a_P3." + std::to_string(i), 1.0});
    spec.external_inputs.push_back("W_P3." + std::to_string(i));
    spec.external_outputs.push_back("a_P3." + std::to_string(i));
  }
  LftModel sc = interconnect_lft(parts, spec);
  structural_audit(sc);
  return sc;
}

Eigen::Matrix3d rigid_inertia(const LftModel& spacecraft) {
  const Eigen::MatrixXd dc = dc_gain(nominal(spacecraft));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(dc);
  if (!lu.isInvertible())
    throw std::runtime_error("rigid_inertia: singular DC gain");
  const Eigen::MatrixXd mass = lu.inverse();
  return mass.block<3, 3>(3, 3);
}

Eigen::MatrixXd singular_value_sweep(const StateSpaceModel& g,
                                     const std::vector<int>& in_idx,
                                     const std::vector<int>& out_idx,
                                     const std::vector<double>& omegas) {
  const StateSpaceModel sub = g.select(in_idx, out_idx);
  const int p = std::min<int>(sub.n_inputs(), sub.n_outputs());
  Eigen::MatrixXd rows(omegas.size(), 1 + p);
  for (size_t i = 0; i < omegas.size(); ++i) {
    rows(i, 0) = omegas[i];
    const Eigen::VectorXd sv =
        eval_freq(sub, omegas[i]).value.jacobiSvd().singularValues();
    for (int j = 0; j < p; ++j) rows(i, 1 + j) = sv(j);
  }
  return rows;
}

}  // namespace astrolft
