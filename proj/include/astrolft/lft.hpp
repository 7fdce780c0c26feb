#pragma once

#include "astrolft/state_space.hpp"

#include <map>
#include <string>
#include <vector>

namespace astrolft {

/// Normalized real parameter: physical value = nominal + half_range * delta,
/// delta in [-1, 1].
struct UncertainReal {
  std::string name;
  double nominal = 0.0;
  double half_range = 0.0;

  UncertainReal() = default;
  UncertainReal(std::string n, double nom, double half);
  static UncertainReal from_percent(std::string n, double nom, double pct);

  bool is_certain() const { return half_range == 0.0; }
  double value_at(double delta) const { return nominal + half_range * delta; }
};

/// One repeated real scalar block delta * I_count.
struct UncertainBlock {
  std::string name;
  int count = 0;
};

/// Ordered block list; the order is the wiring contract for every delta
/// channel. Several blocks may share a parameter name (the same physical
/// delta driving non-adjacent channel groups).
class UncertainBlockStructure {
 public:
  UncertainBlockStructure() = default;
  explicit UncertainBlockStructure(std::vector<UncertainBlock> blocks);

  const std::vector<UncertainBlock>& blocks() const { return blocks_; }
  int total_dim() const;
  bool empty() const { return blocks_.empty(); }

  /// Total repetition count of a parameter across all its blocks.
  int repetition_of(const std::string& name) const;
  /// Distinct parameter names in first-occurrence order.
  std::vector<std::string> parameter_names() const;

  UncertainBlockStructure concat(const UncertainBlockStructure& other) const;

 private:
  std::vector<UncertainBlock> blocks_;
};

/// Upper-LFT pair: the first delta.total_dim() inputs (w) and outputs (z) of
/// m are the uncertainty channels, closed by w = Delta z; the remaining
/// channels are physical I/O. Delta channel labels carry the reserved '~'
/// prefix and may never be wired by users.
struct LftModel {
  StateSpaceModel m;
  UncertainBlockStructure delta;

  int n_delta() const { return delta.total_dim(); }
  int n_phys_inputs() const { return m.n_inputs() - n_delta(); }
  int n_phys_outputs() const { return m.n_outputs() - n_delta(); }
  std::vector<std::string> phys_input_labels() const;
  std::vector<std::string> phys_output_labels() const;
};

/// Wraps a certain StateSpaceModel as an LFT with empty Delta.
LftModel as_lft(StateSpaceModel m);

/// Scalar affine pull-out: F_u(M, delta) = nominal + half_range * delta, one
/// repetition (no block when half_range = 0). Throws on negative half_range.
LftModel pull_out(const UncertainReal& p, const std::string& channel_name);

/// Substitutes delta*I per block for every block whose parameter name appears
/// in `sample`; blocks not named are left open (partial closure). Values must
/// lie in [-1-1e-9, 1+1e-9]. Throws on an ill-posed sample, naming it.
LftModel close_lft_partial(const LftModel& m,
                           const std::map<std::string, double>& sample);

/// Full closure: every parameter must be named in `sample`.
StateSpaceModel close_lft(const LftModel& m,
                          const std::map<std::string, double>& sample);

/// All deltas at zero.
StateSpaceModel nominal(const LftModel& m);

/// Interconnects LFT parts over their *physical* channels; the combined Delta
/// is the concatenation of part Deltas in declared order. The ConnectSpec
/// lists only physical channels (delta channels are managed internally;
/// touching a '~' channel is rejected).
LftModel interconnect_lft(const std::vector<LftModel>& parts,
                          const ConnectSpec& spec);

/// Permutes delta channels so all repetitions of each parameter are
/// contiguous (first-occurrence order); blocks of equal name merge. Physical
/// channels are untouched. Needed by analysis backends whose scalings couple
/// every repetition of a parameter.
LftModel group_by_parameter(const LftModel& m);

/// Label/dimension audit: verifies that the block list and the '~' channel
/// labels attribute exactly delta.total_dim() channels, in order, to the
/// declared parameters. Throws with a description on any mismatch.
void structural_audit(const LftModel& m);

/// True when I - M11(jw) Delta stays invertible (rcond > 1/1e12) at every
/// vertex of the parameter box, for each frequency in `omegas`.
bool well_posed_on_vertices(const LftModel& m,
                            const std::vector<double>& omegas);

}  // namespace astrolft
