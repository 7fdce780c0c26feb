#include "astrolft/state_space.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace astrolft {

namespace {

void check_unique(const std::vector<std::string>& labels, const char* side) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument(std::string("duplicate ") + side +
                                  " label: " + l);
    }
  }
}

std::string shape_str(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd A, Eigen::MatrixXd B,
                                 Eigen::MatrixXd C, Eigen::MatrixXd D,
                                 std::vector<std::string> input_labels,
                                 std::vector<std::string> output_labels)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      in_(std::move(input_labels)),
      out_(std::move(output_labels)) {
  if (A_.rows() != A_.cols() || A_.rows() != B_.rows() ||
      A_.cols() != C_.cols() || C_.rows() != D_.rows() ||
      B_.cols() != D_.cols()) {
    throw std::invalid_argument("inconsistent state-space shapes: A=" +
                                shape_str(A_) + " B=" + shape_str(B_) +
                                " C=" + shape_str(C_) + " D=" + shape_str(D_));
  }
  if (static_cast<int>(in_.size()) != D_.cols() ||
      static_cast<int>(out_.size()) != D_.rows()) {
    throw std::invalid_argument(
        "label counts do not match channel counts: " +
        std::to_string(in_.size()) + " input labels for " +
        std::to_string(D_.cols()) + " inputs, " + std::to_string(out_.size()) +
        " output labels for " + std::to_string(D_.rows()) + " outputs");
  }
  check_unique(in_, "input");
  check_unique(out_, "output");
}

StateSpaceModel StateSpaceModel::static_gain(
    const Eigen::MatrixXd& K, std::vector<std::string> input_labels,
    std::vector<std::string> output_labels) {
  return StateSpaceModel(Eigen::MatrixXd::Zero(0, 0),
                         Eigen::MatrixXd::Zero(0, K.cols()),
                         Eigen::MatrixXd::Zero(K.rows(), 0), K,
                         std::move(input_labels), std::move(output_labels));
}

StateSpaceModel StateSpaceModel::identity(int n, const std::string& prefix) {
  std::vector<std::string> in, out;
  for (int i = 0; i < n; ++i) {
    in.push_back(prefix + ".u" + std::to_string(i));
    out.push_back(prefix + ".y" + std::to_string(i));
  }
  return static_gain(Eigen::MatrixXd::Identity(n, n), in, out);
}

int StateSpaceModel::input_index(const std::string& label) const {
  auto it = std::find(in_.begin(), in_.end(), label);
  return it == in_.end() ? -1 : static_cast<int>(it - in_.begin());
}

int StateSpaceModel::output_index(const std::string& label) const {
  auto it = std::find(out_.begin(), out_.end(), label);
  return it == out_.end() ? -1 : static_cast<int>(it - out_.begin());
}

StateSpaceModel StateSpaceModel::with_prefix(const std::string& prefix) const {
  std::vector<std::string> in(in_), out(out_);
  for (auto& l : in) l = prefix + l;
  for (auto& l : out) l = prefix + l;
  return StateSpaceModel(A_, B_, C_, D_, in, out);
}

StateSpaceModel StateSpaceModel::relabeled(
    std::vector<std::string> input_labels,
    std::vector<std::string> output_labels) const {
  return StateSpaceModel(A_, B_, C_, D_, std::move(input_labels),
                         std::move(output_labels));
}

StateSpaceModel StateSpaceModel::select(const std::vector<int>& in_idx,
                                        const std::vector<int>& out_idx) const {
  Eigen::MatrixXd B(n_states(), in_idx.size());
  Eigen::MatrixXd C(out_idx.size(), n_states());
  Eigen::MatrixXd D(out_idx.size(), in_idx.size());
  std::vector<std::string> in, out;
  for (size_t j = 0; j < in_idx.size(); ++j) {
    B.col(j) = B_.col(in_idx[j]);
    in.push_back(in_[in_idx[j]]);
  }
  for (size_t i = 0; i < out_idx.size(); ++i) {
    C.row(i) = C_.row(out_idx[i]);
    out.push_back(out_[out_idx[i]]);
  }
  for (size_t i = 0; i < out_idx.size(); ++i)
    for (size_t j = 0; j < in_idx.size(); ++j)
      D(i, j) = D_(out_idx[i], in_idx[j]);
  return StateSpaceModel(A_, B, C, D, in, out);
}

StateSpaceModel StateSpaceModel::permuted(
    const std::vector<int>& in_perm, const std::vector<int>& out_perm) const {
  if (static_cast<int>(in_perm.size()) != n_inputs() ||
      static_cast<int>(out_perm.size()) != n_outputs()) {
    throw std::invalid_argument("permutation size mismatch");
  }
  return select(in_perm, out_perm);
}

Eigen::VectorXcd StateSpaceModel::poles() const {
  if (n_states() == 0) return Eigen::VectorXcd(0);
  return A_.eigenvalues();
}

FreqSample eval_freq(const StateSpaceModel& g, double omega) {
  FreqSample s;
  const int n = g.n_states();
  if (n == 0) {
    s.value = g.D().cast<std::complex<double>>();
    return s;
  }
  Eigen::MatrixXcd R = -g.A().cast<std::complex<double>>();
  R.diagonal().array() += std::complex<double>(0.0, omega);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(R);
  const double rc = lu.rcond();
  s.flagged = (rc > 0.0 && 1.0 / rc > 1e14) || rc == 0.0;
  s.value = g.C().cast<std::complex<double>>() *
                lu.solve(g.B().cast<std::complex<double>>()) +
            g.D().cast<std::complex<double>>();
  return s;
}

Eigen::MatrixXd dc_gain(const StateSpaceModel& g) {
  const int n = g.n_states();
  if (n == 0) return g.D();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g.A());
  if (!lu.isInvertible()) {
    throw std::runtime_error("dc_gain: system has poles at origin");
  }
  return -g.C() * lu.solve(g.B()) + g.D();
}

StateSpaceModel series(const StateSpaceModel& g1, const StateSpaceModel& g2) {
  if (g1.n_outputs() != g2.n_inputs()) {
    throw std::invalid_argument(
        "series: output/input mismatch, first block is " +
        std::to_string(g1.n_outputs()) + " outputs, second block expects " +
        std::to_string(g2.n_inputs()) + " inputs");
  }
  const int n1 = g1.n_states(), n2 = g2.n_states();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = g1.A();
  A.bottomLeftCorner(n2, n1) = g2.B() * g1.C();
  A.bottomRightCorner(n2, n2) = g2.A();
  Eigen::MatrixXd B(n1 + n2, g1.n_inputs());
  B.topRows(n1) = g1.B();
  B.bottomRows(n2) = g2.B() * g1.D();
  Eigen::MatrixXd C(g2.n_outputs(), n1 + n2);
  C.leftCols(n1) = g2.D() * g1.C();
  C.rightCols(n2) = g2.C();
  Eigen::MatrixXd D = g2.D() * g1.D();
  return StateSpaceModel(A, B, C, D, g1.input_labels(), g2.output_labels());
}

StateSpaceModel append(const StateSpaceModel& g1, const StateSpaceModel& g2) {
  const int n1 = g1.n_states(), n2 = g2.n_states();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = g1.A();
  A.bottomRightCorner(n2, n2) = g2.A();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n1 + n2, g1.n_inputs() + g2.n_inputs());
  B.topLeftCorner(n1, g1.n_inputs()) = g1.B();
  B.bottomRightCorner(n2, g2.n_inputs()) = g2.B();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(g1.n_outputs() + g2.n_outputs(), n1 + n2);
  C.topLeftCorner(g1.n_outputs(), n1) = g1.C();
  C.bottomRightCorner(g2.n_outputs(), n2) = g2.C();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(C.rows(), B.cols());
  D.topLeftCorner(g1.n_outputs(), g1.n_inputs()) = g1.D();
  D.bottomRightCorner(g2.n_outputs(), g2.n_inputs()) = g2.D();
  std::vector<std::string> in(g1.input_labels()), out(g1.output_labels());
  in.insert(in.end(), g2.input_labels().begin(), g2.input_labels().end());
  out.insert(out.end(), g2.output_labels().begin(), g2.output_labels().end());
  return StateSpaceModel(A, B, C, D, in, out);
}

StateSpaceModel feedback(const StateSpaceModel& g, const StateSpaceModel& h,
                         int sign, const std::vector<int>& in_idx,
                         const std::vector<int>& out_idx) {
  if (h.n_inputs() != static_cast<int>(out_idx.size()) ||
      h.n_outputs() != static_cast<int>(in_idx.size())) {
    throw std::invalid_argument(
        "feedback: loop block is " + std::to_string(h.n_outputs()) + "x" +
        std::to_string(h.n_inputs()) + " but " +
        std::to_string(in_idx.size()) + " inputs / " +
        std::to_string(out_idx.size()) + " outputs are connected");
  }
  const double s = sign >= 0 ? 1.0 : -1.0;
  const int nu = g.n_inputs(), ny = g.n_outputs();
  const int nw = h.n_outputs(), nz = h.n_inputs();
  Eigen::MatrixXd Sin = Eigen::MatrixXd::Zero(nu, nw);
  for (int j = 0; j < nw; ++j) Sin(in_idx[j], j) = 1.0;
  Eigen::MatrixXd Tout = Eigen::MatrixXd::Zero(nz, ny);
  for (int i = 0; i < nz; ++i) Tout(i, out_idx[i]) = 1.0;

  // w = h(Tout y);  u_g = u_ext + s Sin w.
  const Eigen::MatrixXd Phi0 =
      Eigen::MatrixXd::Identity(nw, nw) - s * h.D() * Tout * g.D() * Sin;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Phi0);
  if (!lu.isInvertible()) {
    std::string chans;
    for (int j : in_idx) chans += " " + g.input_labels()[j];
    throw std::runtime_error(
        "feedback: algebraic loop is singular on channels:" + chans);
  }
  const Eigen::MatrixXd Phi = lu.inverse();

  const int n1 = g.n_states(), n2 = h.n_states();
  // w = Phi (Ch xh + Dh Tout Cg xg + Dh Tout Dg u)
  Eigen::MatrixXd Wx(nw, n1 + n2), Wu(nw, nu);
  Wx.leftCols(n1) = Phi * h.D() * Tout * g.C();
  Wx.rightCols(n2) = Phi * h.C();
  Wu = Phi * h.D() * Tout * g.D();

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  Eigen::MatrixXd B(n1 + n2, nu);
  A.topLeftCorner(n1, n1) = g.A();
  A.topRows(n1) += s * g.B() * Sin * Wx;
  B.topRows(n1) = g.B() + s * g.B() * Sin * Wu;
  // xh' = Ah xh + Bh Tout y;  y = Cg xg + Dg (u + s Sin w)
  Eigen::MatrixXd Yx(ny, n1 + n2), Yu(ny, nu);
  Yx.setZero();
  Yx.leftCols(n1) = g.C();
  Yx += s * g.D() * Sin * Wx;
  Yu = g.D() + s * g.D() * Sin * Wu;
  A.bottomRightCorner(n2, n2) = h.A();
  A.bottomRows(n2) += h.B() * Tout * Yx;
  B.bottomRows(n2) = h.B() * Tout * Yu;

  return StateSpaceModel(A, B, Yx, Yu, g.input_labels(), g.output_labels());
}

StateSpaceModel connect(const std::vector<StateSpaceModel>& parts,
                        const ConnectSpec& spec) {
  // Stack everything block-diagonally, then solve the static wiring loop.
  int n = 0, nu = 0, ny = 0;
  for (const auto& p : parts) {
    n += p.n_states();
    nu += p.n_inputs();
    ny += p.n_outputs();
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, nu);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(ny, n);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(ny, nu);
  std::unordered_map<std::string, int> in_map, out_map;
  {
    int ro = 0, co = 0, so = 0;
    for (const auto& p : parts) {
      A.block(so, so, p.n_states(), p.n_states()) = p.A();
      B.block(so, co, p.n_states(), p.n_inputs()) = p.B();
      C.block(ro, so, p.n_outputs(), p.n_states()) = p.C();
      D.block(ro, co, p.n_outputs(), p.n_inputs()) = p.D();
      for (int j = 0; j < p.n_inputs(); ++j) {
        if (!in_map.emplace(p.input_labels()[j], co + j).second)
          throw std::invalid_argument("connect: input channel-name collision: " +
                                      p.input_labels()[j]);
      }
      for (int i = 0; i < p.n_outputs(); ++i) {
        if (!out_map.emplace(p.output_labels()[i], ro + i).second)
          throw std::invalid_argument(
              "connect: output channel-name collision: " +
              p.output_labels()[i]);
      }
      so += p.n_states();
      co += p.n_inputs();
      ro += p.n_outputs();
    }
  }
  auto in_of = [&](const std::string& l) {
    auto it = in_map.find(l);
    if (it == in_map.end())
      throw std::invalid_argument("connect: unknown part input: " + l);
    return it->second;
  };
  auto out_of = [&](const std::string& l) {
    auto it = out_map.find(l);
    if (it == out_map.end())
      throw std::invalid_argument("connect: unknown part output: " + l);
    return it->second;
  };
  std::unordered_map<std::string, int> ext_in_map;
  for (size_t k = 0; k < spec.external_inputs.size(); ++k)
    if (!ext_in_map.emplace(spec.external_inputs[k], static_cast<int>(k)).second)
      throw std::invalid_argument("connect: duplicate external input: " +
                                  spec.external_inputs[k]);

  const int ne = static_cast<int>(spec.external_inputs.size());
  const int no = static_cast<int>(spec.external_outputs.size());
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(nu, ny);   // u <- F y
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nu, ne);   // u <- G u_ext
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(no, ny);   // y_ext <- H y
  Eigen::MatrixXd J0 = Eigen::MatrixXd::Zero(no, ne);  // y_ext <- J0 u_ext

  std::vector<bool> driven(nu, false);
  for (const auto& w : spec.wires) {
    F(in_of(w.to), out_of(w.from)) += w.gain;
    driven[in_of(w.to)] = true;
  }
  for (const auto& e : spec.inputs) {
    auto it = ext_in_map.find(e.ext);
    if (it == ext_in_map.end())
      throw std::invalid_argument("connect: undeclared external input: " + e.ext);
    G(in_of(e.to), it->second) += e.gain;
    driven[in_of(e.to)] = true;
  }
  for (const auto& gname : spec.grounded_inputs) driven[in_of(gname)] = true;
  for (const auto& [label, idx] : in_map) {
    if (!driven[idx])
      throw std::invalid_argument("connect: part input neither wired nor "
                                  "grounded: " + label);
  }
  std::unordered_map<std::string, int> ext_out_map;
  for (size_t k = 0; k < spec.external_outputs.size(); ++k)
    if (!ext_out_map.emplace(spec.external_outputs[k], static_cast<int>(k)).second)
      throw std::invalid_argument("connect: duplicate external output: " +
                                  spec.external_outputs[k]);
  for (const auto& o : spec.outputs) {
    auto it = ext_out_map.find(o.ext);
    if (it == ext_out_map.end())
      throw std::invalid_argument("connect: undeclared external output: " + o.ext);
    if (out_map.count(o.from)) {
      H(it->second, out_map.at(o.from)) += o.gain;
    } else if (ext_in_map.count(o.from)) {
      J0(it->second, ext_in_map.at(o.from)) += o.gain;
    } else {
      throw std::invalid_argument(
          "connect: unknown source for external output: " + o.from);
    }
  }

  // y = Cx + D(Fy + Gu) => (I - DF) y = Cx + DGu
  Eigen::MatrixXd IDF = Eigen::MatrixXd::Identity(ny, ny) - D * F;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(IDF);
  {
    const double rc = lu.rcond();
    if (rc == 0.0 || 1.0 / rc > 1e13) {
      std::string chans;
      for (const auto& w : spec.wires) chans += " " + w.from + "->" + w.to;
      throw std::runtime_error(
          "connect: algebraic loop singular/ill-conditioned; wires:" + chans);
    }
  }
  const Eigen::MatrixXd Yx = lu.solve(C);      // y = Yx x + Yu u_ext
  const Eigen::MatrixXd Yu = lu.solve(D * G);

  Eigen::MatrixXd Anew = A + B * F * Yx;
  Eigen::MatrixXd Bnew = B * (G + F * Yu);
  Eigen::MatrixXd Cnew = H * Yx;
  Eigen::MatrixXd Dnew = H * Yu + J0;
  return StateSpaceModel(Anew, Bnew, Cnew, Dnew, spec.external_inputs,
                         spec.external_outputs);
}

}  // namespace astrolft
