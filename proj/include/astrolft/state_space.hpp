#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace astrolft {

/// Continuous-time LTI system x' = Ax + Bu, y = Cx + Du with named channels.
/// Immutable after construction; all interconnection operations are pure.
class StateSpaceModel {
 public:
  StateSpaceModel() = default;

  /// Validates dimension consistency and label uniqueness; throws
  /// std::invalid_argument with the offending shapes/names otherwise.
  StateSpaceModel(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                  Eigen::MatrixXd D, std::vector<std::string> input_labels,
                  std::vector<std::string> output_labels);

  /// Static (feedthrough-only) system y = Ku.
  static StateSpaceModel static_gain(const Eigen::MatrixXd& K,
                                     std::vector<std::string> input_labels,
                                     std::vector<std::string> output_labels);

  static StateSpaceModel identity(int n, const std::string& prefix);

  int n_states() const { return static_cast<int>(A_.rows()); }
  int n_inputs() const { return static_cast<int>(B_.cols()); }
  int n_outputs() const { return static_cast<int>(C_.rows()); }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& B() const { return B_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::MatrixXd& D() const { return D_; }
  const std::vector<std::string>& input_labels() const { return in_; }
  const std::vector<std::string>& output_labels() const { return out_; }

  int input_index(const std::string& label) const;   // -1 if absent
  int output_index(const std::string& label) const;  // -1 if absent

  /// Copy with every channel label prefixed (used to avoid collisions when
  /// stacking identical blocks).
  StateSpaceModel with_prefix(const std::string& prefix) const;
  StateSpaceModel relabeled(std::vector<std::string> input_labels,
                            std::vector<std::string> output_labels) const;

  /// Sub-system keeping the selected input/output channels (states kept).
  StateSpaceModel select(const std::vector<int>& in_idx,
                         const std::vector<int>& out_idx) const;

  /// Reorders inputs/outputs by index lists (must be permutations).
  StateSpaceModel permuted(const std::vector<int>& in_perm,
                           const std::vector<int>& out_perm) const;

  Eigen::VectorXcd poles() const;

 private:
  Eigen::MatrixXd A_, B_, C_, D_;
  std::vector<std::string> in_, out_;
};

/// Result of a frequency-response sample; `flagged` marks a resolvent whose
/// estimated condition number exceeded 1e14 (value still returned).
struct FreqSample {
  Eigen::MatrixXcd value;
  bool flagged = false;
};

/// G(jw) = C (jwI - A)^-1 B + D.
FreqSample eval_freq(const StateSpaceModel& g, double omega);

/// -C A^-1 B + D. Throws if A is singular ("system has poles at origin").
Eigen::MatrixXd dc_gain(const StateSpaceModel& g);

/// g2 * g1 (u -> g1 -> g2 -> y). State dimension adds.
StateSpaceModel series(const StateSpaceModel& g1, const StateSpaceModel& g2);

/// Diagonal stack (no coupling); labels concatenated.
StateSpaceModel append(const StateSpaceModel& g1, const StateSpaceModel& g2);

/// Closes u_g[in_idx] += sign * h(y_g[out_idx]) around g. All channels of g
/// are preserved. Throws on an algebraic-loop singularity, naming the
/// channels involved.
StateSpaceModel feedback(const StateSpaceModel& g, const StateSpaceModel& h,
                         int sign, const std::vector<int>& in_idx,
                         const std::vector<int>& out_idx);

/// Named-channel interconnection of several parts (the general primitive
/// behind every block-diagram closure).
///   internal wires: part input <- gain * part output
///   input map:      part input <- gain * external input
///   output map:     external output <- gain * (part output | external input)
/// Part inputs that receive nothing are grounded only if listed explicitly;
/// otherwise the wiring is rejected, so dropped channels are always
/// intentional.
struct ConnectSpec {
  struct Wire {
    std::string from;  // part output label
    std::string to;    // part input label
    double gain = 1.0;
  };
  struct ExtIn {
    std::string ext;  // external input name
    std::string to;   // part input label
    double gain = 1.0;
  };
  struct ExtOut {
    std::string ext;   // external output name
    std::string from;  // part output label or external input name
    double gain = 1.0;
  };
  std::vector<Wire> wires;
  std::vector<ExtIn> inputs;
  std::vector<ExtOut> outputs;
  std::vector<std::string> external_inputs;   // declared order
  std::vector<std::string> external_outputs;  // declared order
  std::vector<std::string> grounded_inputs;   // explicitly zeroed part inputs
};

StateSpaceModel connect(const std::vector<StateSpaceModel>& parts,
                        const ConnectSpec& spec);

}  // namespace astrolft
