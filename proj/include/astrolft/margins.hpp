#pragma once

#include "astrolft/acs.hpp"

namespace astrolft {

struct AxisMargins {
  int axis = 0;                 // 0,1,2 = x,y,z
  bool closed_loop_stable = false;
  double disk = 0.0;            // 1 / ||S||_inf of the broken loop
  double gain_margin_db = 0.0;  // +inf when no phase crossing
  double phase_margin_deg = 0.0;
  double crossover_rad_s = 0.0;
};

struct NicholsRecord {
  double omega = 0.0;
  double mag_db = 0.0;
  double phase_deg = 0.0;
};

struct MarginReport {
  AxisMargins margins;
  std::vector<NicholsRecord> nichols;
};

/// Open-loop transfer obtained by breaking one control axis at the controller
/// output while the other two stay closed; evaluated on the nominal plant
/// closed at `sample` (empty map = nominal).
StateSpaceModel broken_loop(const GeneralizedPlant& gp,
                            const ControllerParams& k, int axis,
                            const std::map<std::string, double>& sample);

MarginReport margin_export(const GeneralizedPlant& gp,
                           const ControllerParams& k, int axis,
                           const std::map<std::string, double>& sample,
                           const std::vector<double>& omegas);

}  // namespace astrolft
