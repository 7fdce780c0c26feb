#include "astrolft/lft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace astrolft {

UncertainReal::UncertainReal(std::string n, double nom, double half)
    : name(std::move(n)), nominal(nom), half_range(half) {
  if (half_range < 0.0)
    throw std::invalid_argument("UncertainReal " + name +
                                ": negative half_range");
}

UncertainReal UncertainReal::from_percent(std::string n, double nom,
                                          double pct) {
  return UncertainReal(std::move(n), nom, std::abs(nom) * pct / 100.0);
}

UncertainBlockStructure::UncertainBlockStructure(
    std::vector<UncertainBlock> blocks)
    : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.count <= 0 || b.name.empty())
      throw std::invalid_argument("invalid uncertain block '" + b.name + "'");
  }
}

int UncertainBlockStructure::total_dim() const {
  int n = 0;
  for (const auto& b : blocks_) n += b.count;
  return n;
}

int UncertainBlockStructure::repetition_of(const std::string& name) const {
  int n = 0;
  for (const auto& b : blocks_)
    if (b.name == name) n += b.count;
  return n;
}

std::vector<std::string> UncertainBlockStructure::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& b : blocks_)
    if (std::find(names.begin(), names.end(), b.name) == names.end())
      names.push_back(b.name);
  return names;
}

UncertainBlockStructure UncertainBlockStructure::concat(
    const UncertainBlockStructure& other) const {
  std::vector<UncertainBlock> all(blocks_);
  all.insert(all.end(), other.blocks_.begin(), other.blocks_.end());
  return UncertainBlockStructure(all);
}

std::vector<std::string> LftModel::phys_input_labels() const {
  const auto& all = m.input_labels();
  return {all.begin() + n_delta(), all.end()};
}

std::vector<std::string> LftModel::phys_output_labels() const {
  const auto& all = m.output_labels();
  return {all.begin() + n_delta(), all.end()};
}

LftModel as_lft(StateSpaceModel m) { return LftModel{std::move(m), {}}; }

LftModel pull_out(const UncertainReal& p, const std::string& channel_name) {
  if (p.is_certain()) {
    Eigen::MatrixXd K(1, 1);
    K << p.nominal;
    return as_lft(StateSpaceModel::static_gain(K, {channel_name + ".u"},
                                               {channel_name + ".y"}));
  }
  Eigen::MatrixXd D(2, 2);
  // z = u; y = half*w + nominal*u  ->  F_u = nominal + half*delta
  D << 0.0, 1.0, p.half_range, p.nominal;
  StateSpaceModel m =
      StateSpaceModel::static_gain(D, {"~" + channel_name + "." + p.name + ".0",
                                       channel_name + ".u"},
                                   {"~" + channel_name + "." + p.name + ".0z",
                                    channel_name + ".y"});
  return LftModel{m, UncertainBlockStructure({{p.name, 1}})};
}

LftModel close_lft_partial(const LftModel& lm,
                           const std::map<std::string, double>& sample) {
  // Gather channel index ranges of the blocks being closed.
  std::vector<int> closed_idx;
  std::vector<UncertainBlock> kept;
  std::vector<double> closed_vals;
  int off = 0;
  for (const auto& b : lm.delta.blocks()) {
    auto it = sample.find(b.name);
    if (it != sample.end()) {
      const double d = it->second;
      if (std::abs(d) > 1.0 + 1e-9) {
        throw std::invalid_argument("close_lft: delta for '" + b.name +
                                    "' outside [-1,1]: " + std::to_string(d));
      }
      for (int k = 0; k < b.count; ++k) {
        closed_idx.push_back(off + k);
        closed_vals.push_back(d);
      }
    } else {
      kept.push_back(b);
    }
    off += b.count;
  }
  if (closed_idx.empty()) return lm;

  const int nc = static_cast<int>(closed_idx.size());
  Eigen::MatrixXd Delta = Eigen::MatrixXd::Zero(nc, nc);
  for (int i = 0; i < nc; ++i) Delta(i, i) = closed_vals[i];
  std::vector<std::string> din, dout;
  for (int i = 0; i < nc; ++i) {
    din.push_back("~close.z" + std::to_string(i));
    dout.push_back("~close.w" + std::to_string(i));
  }
  StateSpaceModel delta_block = StateSpaceModel::static_gain(Delta, din, dout);

  StateSpaceModel closed;
  try {
    closed = feedback(lm.m, delta_block, +1, closed_idx, closed_idx);
  } catch (const std::runtime_error&) {
    std::ostringstream os;
    os << "close_lft: ill-posed sample {";
    for (const auto& [k, v] : sample) os << " " << k << "=" << v;
    os << " } makes I - M11*Delta singular";
    throw std::runtime_error(os.str());
  }
  // Drop the closed channels, keep everything else in order.
  std::vector<int> keep_in, keep_out;
  std::set<int> closed_set(closed_idx.begin(), closed_idx.end());
  for (int j = 0; j < lm.m.n_inputs(); ++j)
    if (!closed_set.count(j)) keep_in.push_back(j);
  for (int i = 0; i < lm.m.n_outputs(); ++i)
    if (!closed_set.count(i)) keep_out.push_back(i);
  return LftModel{closed.select(keep_in, keep_out),
                  UncertainBlockStructure(kept)};
}

StateSpaceModel close_lft(const LftModel& m,
                          const std::map<std::string, double>& sample) {
  for (const auto& name : m.delta.parameter_names()) {
    if (!sample.count(name))
      throw std::invalid_argument("close_lft: no delta given for parameter '" +
                                  name + "'");
  }
  LftModel c = close_lft_partial(m, sample);
  return c.m;
}

StateSpaceModel nominal(const LftModel& m) {
  std::map<std::string, double> zeros;
  for (const auto& name : m.delta.parameter_names()) zeros[name] = 0.0;
  return close_lft(m, zeros);
}

LftModel interconnect_lft(const std::vector<LftModel>& parts,
                          const ConnectSpec& spec) {
  auto reject_tilde = [](const std::string& l, const char* where) {
    if (!l.empty() && l[0] == '~')
      throw std::invalid_argument(
          std::string("interconnect_lft: uncertainty channel may not be "
                      "wired (") +
          where + "): " + l);
  };
  for (const auto& w : spec.wires) {
    reject_tilde(w.from, "wire");
    reject_tilde(w.to, "wire");
  }
  for (const auto& e : spec.inputs) reject_tilde(e.to, "input map");
  for (const auto& o : spec.outputs) reject_tilde(o.from, "output map");

  ConnectSpec full = spec;
  std::vector<StateSpaceModel> models;
  UncertainBlockStructure delta;
  std::vector<std::string> delta_in, delta_out;
  for (const auto& p : parts) {
    models.push_back(p.m);
    delta = delta.concat(p.delta);
    const auto& il = p.m.input_labels();
    const auto& ol = p.m.output_labels();
    for (int k = 0; k < p.n_delta(); ++k) {
      // expose delta channels as externals, identity-routed
      full.inputs.push_back({il[k], il[k], 1.0});
      full.outputs.push_back({ol[k], ol[k], 1.0});
      delta_in.push_back(il[k]);
      delta_out.push_back(ol[k]);
    }
  }
  std::vector<std::string> ext_in = delta_in, ext_out = delta_out;
  ext_in.insert(ext_in.end(), spec.external_inputs.begin(),
                spec.external_inputs.end());
  ext_out.insert(ext_out.end(), spec.external_outputs.begin(),
                 spec.external_outputs.end());
  full.external_inputs = ext_in;
  full.external_outputs = ext_out;
  return LftModel{connect(models, full), delta};
}

LftModel group_by_parameter(const LftModel& lm) {
  const auto names = lm.delta.parameter_names();
  std::vector<int> perm;
  std::vector<UncertainBlock> merged;
  for (const auto& name : names) {
    int off = 0, total = 0;
    for (const auto& b : lm.delta.blocks()) {
      if (b.name == name) {
        for (int k = 0; k < b.count; ++k) perm.push_back(off + k);
        total += b.count;
      }
      off += b.count;
    }
    merged.push_back({name, total});
  }
  std::vector<int> in_perm = perm, out_perm = perm;
  for (int j = lm.n_delta(); j < lm.m.n_inputs(); ++j) in_perm.push_back(j);
  for (int i = lm.n_delta(); i < lm.m.n_outputs(); ++i) out_perm.push_back(i);
  return LftModel{lm.m.permuted(in_perm, out_perm),
                  UncertainBlockStructure(merged)};
}

void structural_audit(const LftModel& lm) {
  const int nd = lm.delta.total_dim();
  if (lm.m.n_inputs() < nd || lm.m.n_outputs() < nd)
    throw std::runtime_error("audit: model has fewer channels than Delta dim");
  const auto& il = lm.m.input_labels();
  const auto& ol = lm.m.output_labels();
  int off = 0;
  for (const auto& b : lm.delta.blocks()) {
    for (int k = 0; k < b.count; ++k) {
      const std::string& li = il[off + k];
      const std::string& lo = ol[off + k];
      if (li.empty() || li[0] != '~' || lo.empty() || lo[0] != '~')
        throw std::runtime_error("audit: delta channel " +
                                 std::to_string(off + k) +
                                 " lacks the reserved prefix: " + li);
      if (li.find("." + b.name + ".") == std::string::npos)
        throw std::runtime_error("audit: channel '" + li +
                                 "' not attributable to parameter '" + b.name +
                                 "'");
    }
    off += b.count;
  }
  for (int j = nd; j < lm.m.n_inputs(); ++j)
    if (!il[j].empty() && il[j][0] == '~')
      throw std::runtime_error("audit: stray delta input label beyond Delta: " +
                               il[j]);
  for (int i = nd; i < lm.m.n_outputs(); ++i)
    if (!ol[i].empty() && ol[i][0] == '~')
      throw std::runtime_error(
          "audit: stray delta output label beyond Delta: " + ol[i]);
}

bool well_posed_on_vertices(const LftModel& lm,
                            const std::vector<double>& omegas) {
  const auto names = lm.delta.parameter_names();
  const size_t k = names.size();
  if (k == 0) return true;
  const int nd = lm.delta.total_dim();
  std::vector<int> phys_in, d_idx;
  for (int i = 0; i < nd; ++i) d_idx.push_back(i);
  const StateSpaceModel m11 = lm.m.select(d_idx, d_idx);
  const size_t n_vert = size_t{1} << std::min<size_t>(k, 12);
  for (double w : omegas) {
    const Eigen::MatrixXcd M11 = eval_freq(m11, w).value;
    for (size_t v = 0; v < n_vert; ++v) {
      Eigen::VectorXd diag(nd);
      int off = 0, pi = 0;
      for (const auto& b : lm.delta.blocks()) {
        pi = static_cast<int>(std::find(names.begin(), names.end(), b.name) -
                              names.begin());
        const double d = (v >> pi) & 1 ? 1.0 : -1.0;
        for (int c = 0; c < b.count; ++c) diag(off + c) = d;
        off += b.count;
      }
      Eigen::MatrixXcd T = Eigen::MatrixXcd::Identity(nd, nd) -
                           M11 * diag.asDiagonal().toDenseMatrix()
                                     .cast<std::complex<double>>();
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
      const double rc = lu.rcond();
      if (rc == 0.0 || 1.0 / rc > 1e12) return false;
    }
  }
  return true;
}

}  // namespace astrolft
