#pragma once

// Exact small-system oracles.
//
// DensityMatrix carries the full operator with per-qubit kernels and the
// exact noise channels (depolarizing via the partial-trace identity,
// amplitude damping as a two-Kraus map).
//
// ExactEngine evolves a noisy circuit as a set of classically-labeled
// branches. A measured bit that later feeds a conditional splits the branch
// per *recorded* value (readout confusion folded in, so corrupted feedforward
// is exact); a bit that is never consumed freezes its qubit instead: the
// qubit is dephased in Z, exempted from further noise, and read out from the
// final diagonal, which keeps correlations between data and flag bits without
// any branch blow-up. Branches whose live records coincide are merged once
// their dead bits are dropped. Applies the same op-stream noise schedule as
// run_shot, so the trajectory sampler converges to this engine shot-for-shot.
//
// PureEngine enumerates measurement branches of a noiseless circuit over
// pure states (depth-first), for channel extraction at larger qubit counts.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qedkit/circuit.hpp"
#include "qedkit/counts.hpp"
#include "qedkit/noise.hpp"
#include "qedkit/statevector.hpp"

namespace qedkit {

class DensityMatrix {
 public:
  explicit DensityMatrix(int n_qubits)
      : n_(n_qubits), rho_(Eigen::MatrixXcd::Zero(size_t{1} << n_qubits, size_t{1} << n_qubits)) {
    rho_(0, 0) = 1.0;
  }
  DensityMatrix(int n_qubits, Eigen::MatrixXcd m) : n_(n_qubits), rho_(std::move(m)) {}

  int n_qubits() const { return n_; }
  Eigen::Index dim() const { return rho_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::MatrixXcd& matrix() { return rho_; }

  double trace() const { return rho_.trace().real(); }

  void apply_1q(int q, const Eigen::Matrix2cd& u) {
    const Eigen::Index step = Eigen::Index{1} << q;
    // left multiply: rows
    for (Eigen::Index base = 0; base < dim(); base += 2 * step)
      for (Eigen::Index r = base; r < base + step; ++r) {
        Eigen::RowVectorXcd r0 = rho_.row(r), r1 = rho_.row(r + step);
        rho_.row(r) = u(0, 0) * r0 + u(0, 1) * r1;
        rho_.row(r + step) = u(1, 0) * r0 + u(1, 1) * r1;
      }
    // right multiply by u^dagger: columns
    for (Eigen::Index base = 0; base < dim(); base += 2 * step)
      for (Eigen::Index c = base; c < base + step; ++c) {
        Eigen::VectorXcd c0 = rho_.col(c), c1 = rho_.col(c + step);
        rho_.col(c) = std::conj(u(0, 0)) * c0 + std::conj(u(0, 1)) * c1;
        rho_.col(c + step) = std::conj(u(1, 0)) * c0 + std::conj(u(1, 1)) * c1;
      }
  }

  void cnot(int control, int target) {
    const Eigen::Index cm = Eigen::Index{1} << control, tm = Eigen::Index{1} << target;
    auto flip = [&](Eigen::Index i) { return ((i & cm) != 0) ? (i ^ tm) : i; };
    permute(flip);
  }

  void swap_qubits(int a, int b) {
    const Eigen::Index am = Eigen::Index{1} << a, bm = Eigen::Index{1} << b;
    auto flip = [&](Eigen::Index i) {
      bool va = (i & am) != 0, vb = (i & bm) != 0;
      if (va == vb) return i;
      return i ^ am ^ bm;
    };
    permute(flip);
  }

  // Uniform single-qubit depolarizing with probability p:
  // rho -> (1-4p/3) rho + (4p/3) Tr_q(rho) (x) I/2.
  void depolarize_1q(int q, double p) {
    if (p <= 0) return;
    const double w = 4.0 * p / 3.0;
    const Eigen::Index m = Eigen::Index{1} << q;
    for (Eigen::Index r = 0; r < dim(); ++r) {
      if (r & m) continue;
      for (Eigen::Index c = 0; c < dim(); ++c) {
        if (c & m) continue;
        cplx d00 = rho_(r, c), d11 = rho_(r | m, c | m);
        cplx t = 0.5 * (d00 + d11);
        rho_(r, c) = (1 - w) * d00 + w * t;
        rho_(r | m, c | m) = (1 - w) * d11 + w * t;
        rho_(r | m, c) *= (1 - w);
        rho_(r, c | m) *= (1 - w);
      }
    }
  }

  // Uniform two-qubit depolarizing over the 15 non-identity Pauli pairs:
  // rho -> (1-16p/15) rho + (16p/15) Tr_ab(rho) (x) I/4.
  void depolarize_2q(int a, int b, double p) {
    if (p <= 0) return;
    const double w = 16.0 * p / 15.0;
    const Eigen::Index ma = Eigen::Index{1} << a, mb = Eigen::Index{1} << b;
    const Eigen::Index mask = ma | mb;
    const Eigen::Index sub[4] = {0, ma, mb, ma | mb};
    for (Eigen::Index r = 0; r < dim(); ++r) {
      if (r & mask) continue;
      for (Eigen::Index c = 0; c < dim(); ++c) {
        if (c & mask) continue;
        cplx t = 0;
        for (Eigen::Index v : sub) t += rho_(r | v, c | v);
        t *= 0.25;
        for (Eigen::Index rv : sub)
          for (Eigen::Index cv : sub) {
            cplx& e = rho_(r | rv, c | cv);
            e *= (1 - w);
            if (rv == cv) e += w * t;
          }
      }
    }
  }

  void amplitude_damp(int q, double gamma) {
    if (gamma <= 0) return;
    const Eigen::Index m = Eigen::Index{1} << q;
    const double s = std::sqrt(1.0 - gamma);
    for (Eigen::Index r = 0; r < dim(); ++r) {
      for (Eigen::Index c = 0; c < dim(); ++c) {
        bool r1 = (r & m) != 0, c1 = (c & m) != 0;
        if (r1 && c1) continue;  // handled with its 00 partner
        if (!r1 && !c1) {
          rho_(r, c) += gamma * rho_(r | m, c | m);  // K1 gain into 00 block
        } else {
          rho_(r, c) *= s;  // 01 / 10 blocks
        }
      }
    }
    for (Eigen::Index r = 0; r < dim(); ++r)
      for (Eigen::Index c = 0; c < dim(); ++c)
        if ((r & m) && (c & m)) rho_(r, c) *= (1.0 - gamma);
  }

  // Zeroes coherences between the q=0 and q=1 subspaces.
  void dephase(int q) {
    const Eigen::Index m = Eigen::Index{1} << q;
    for (Eigen::Index r = 0; r < dim(); ++r)
      for (Eigen::Index c = 0; c < dim(); ++c)
        if (((r ^ c) & m) != 0) rho_(r, c) = 0;
  }

  // Unnormalized projection onto qubit q = outcome; returns removed weight's
  // complement (the trace after projection).
  double project(int q, int outcome) {
    const Eigen::Index m = Eigen::Index{1} << q;
    for (Eigen::Index r = 0; r < dim(); ++r)
      for (Eigen::Index c = 0; c < dim(); ++c) {
        bool keep = (((r & m) != 0) == (outcome == 1)) && (((c & m) != 0) == (outcome == 1));
        if (!keep) rho_(r, c) = 0;
      }
    return trace();
  }

  DensityMatrix partial_trace(const std::vector<int>& keep) const {
    const int k = static_cast<int>(keep.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Eigen::Index{1} << k, Eigen::Index{1} << k);
    std::vector<int> env;
    for (int q = 0; q < n_; ++q)
      if (std::find(keep.begin(), keep.end(), q) == keep.end()) env.push_back(q);
    const Eigen::Index kd = Eigen::Index{1} << k, ed = Eigen::Index{1} << env.size();
    auto compose = [&](Eigen::Index kidx, Eigen::Index eidx) {
      Eigen::Index full = 0;
      for (int i = 0; i < k; ++i)
        if (kidx & (Eigen::Index{1} << i)) full |= Eigen::Index{1} << keep[static_cast<size_t>(i)];
      for (size_t i = 0; i < env.size(); ++i)
        if (eidx & (Eigen::Index{1} << i)) full |= Eigen::Index{1} << env[i];
      return full;
    };
    for (Eigen::Index a = 0; a < kd; ++a)
      for (Eigen::Index b = 0; b < kd; ++b) {
        cplx s = 0;
        for (Eigen::Index e = 0; e < ed; ++e) s += rho_(compose(a, e), compose(b, e));
        out(a, b) = s;
      }
    return DensityMatrix(k, std::move(out));
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(static_cast<size_t>(dim()));
    for (Eigen::Index i = 0; i < dim(); ++i) d[static_cast<size_t>(i)] = rho_(i, i).real();
    return d;
  }

 private:
  int n_;
  Eigen::MatrixXcd rho_;

  template <typename F>
  void permute(F&& index_map) {
    // rho' = P rho P^T for a permutation P given by index_map (an involution).
    std::vector<bool> row_done(static_cast<size_t>(dim()), false);
    for (Eigen::Index r = 0; r < dim(); ++r) {
      Eigen::Index r2 = index_map(r);
      if (r2 != r && !row_done[static_cast<size_t>(r)]) {
        rho_.row(r).swap(rho_.row(r2));
        row_done[static_cast<size_t>(r)] = row_done[static_cast<size_t>(r2)] = true;
      }
    }
    std::vector<bool> col_done(static_cast<size_t>(dim()), false);
    for (Eigen::Index c = 0; c < dim(); ++c) {
      Eigen::Index c2 = index_map(c);
      if (c2 != c && !col_done[static_cast<size_t>(c)]) {
        rho_.col(c).swap(rho_.col(c2));
        col_done[static_cast<size_t>(c)] = col_done[static_cast<size_t>(c2)] = true;
      }
    }
  }
};

namespace gates {

inline Eigen::Matrix2cd h() {
  Eigen::Matrix2cd m;
  const double r = 0.70710678118654752440;
  m << r, r, r, -r;
  return m;
}
inline Eigen::Matrix2cd x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd y() {
  Eigen::Matrix2cd m;
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}
inline Eigen::Matrix2cd z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
inline Eigen::Matrix2cd s() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, cplx(0, 1);
  return m;
}
inline Eigen::Matrix2cd sdg() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, cplx(0, -1);
  return m;
}
inline Eigen::Matrix2cd rz(double theta) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::polar(1.0, -theta / 2);
  m(1, 1) = std::polar(1.0, theta / 2);
  return m;
}
inline Eigen::Matrix2cd pauli(char p) {
  switch (p) {
    case 'I': return Eigen::Matrix2cd::Identity();
    case 'X': return x();
    case 'Y': return y();
    case 'Z': return z();
  }
  throw SimError("unknown Pauli letter");
}

}  // namespace gates

struct OracleOptions {
  int qubit_limit = 11;
  // Bits whose values must appear in outputs; branches for other bits merge
  // once dead. Ignored when report_all_bits is true.
  bool report_all_bits = true;
  std::vector<int> report_bits;
};

struct OracleBitDistribution {
  Distribution dist;               // strings over `positions` bits, in order
  std::vector<int> bit_order;      // classical bit index per string position
  std::vector<std::string> roles;  // role per position
};

class ExactEngine {
 public:
  ExactEngine(const Circuit& c, const NoiseModel& noise, OracleOptions opts = {})
      : c_(c), noise_(noise), opts_(std::move(opts)) {
    noise.validate();
    if (c.n_qubits > opts_.qubit_limit) throw SimError("oracle qubit limit exceeded");
    analyze_bits();
    run();
  }

  // Joint distribution over the reported + frozen bits, readout confusion
  // included. Matches sample_counts in the infinite-shot limit.
  OracleBitDistribution bit_distribution() const {
    OracleBitDistribution out;
    for (int b = 0; b < c_.n_bits; ++b) {
      if (reported(b) || frozen_bit_qubit_.count(b)) {
        out.bit_order.push_back(b);
        out.roles.push_back(c_.metadata.bit_roles[static_cast<size_t>(b)]);
      }
    }
    for (const auto& br : branches_) {
      // Joint diagonal over frozen qubits, then per-bit confusion.
      std::vector<int> fq;
      std::vector<int> fbit;
      for (int b : out.bit_order) {
        auto it = frozen_bit_qubit_.find(b);
        if (it != frozen_bit_qubit_.end()) {
          fbit.push_back(b);
          fq.push_back(it->second);
        }
      }
      std::vector<double> joint(size_t{1} << fq.size(), 0.0);
      std::vector<double> diag = br.rho.diagonal();
      for (size_t idx = 0; idx < diag.size(); ++idx) {
        if (diag[idx] == 0) continue;
        size_t key = 0;
        for (size_t i = 0; i < fq.size(); ++i)
          if (idx & (size_t{1} << fq[i])) key |= size_t{1} << i;
        joint[key] += diag[idx];
      }
      confuse_in_place(joint, fbit);
      for (size_t key = 0; key < joint.size(); ++key) {
        if (joint[key] <= 0) continue;
        std::string s;
        s.reserve(out.bit_order.size());
        for (size_t pos = 0; pos < out.bit_order.size(); ++pos) {
          int b = out.bit_order[pos];
          auto rec = br.record.find(b);
          if (rec != br.record.end()) {
            s.push_back(rec->second ? '1' : '0');
          } else {
            size_t i = 0;
            while (fbit[i] != b) ++i;
            s.push_back((key & (size_t{1} << i)) ? '1' : '0');
          }
        }
        out.dist[s] += joint[key];
      }
    }
    return out;
  }

  // Normalized reduced state on `keep` given recorded bit values; returns the
  // probability of the condition alongside. Conditioning on a frozen bit
  // applies the confusion-weighted projection to its qubit; conditioning on a
  // consumed bit selects branches (the bit must then be reported).
  std::pair<DensityMatrix, double> conditional_state(const std::vector<int>& keep,
                                                     const std::map<int, int>& conditions) const {
    DensityMatrix acc(static_cast<int>(keep.size()),
                      Eigen::MatrixXcd::Zero(Eigen::Index{1} << keep.size(),
                                             Eigen::Index{1} << keep.size()));
    double prob = 0;
    for (const auto& br : branches_) {
      bool ok = true;
      DensityMatrix rho = br.rho;
      for (const auto& [b, v] : conditions) {
        auto rec = br.record.find(b);
        if (rec != br.record.end()) {
          if (rec->second != v) ok = false;
        } else {
          auto it = frozen_bit_qubit_.find(b);
          if (it == frozen_bit_qubit_.end()) throw SimError("conditioning on unreported bit");
          condition_frozen(rho, it->second, v);
        }
        if (!ok) break;
      }
      if (!ok) continue;
      prob += rho.trace();
      DensityMatrix red = rho.partial_trace(keep);
      acc.matrix() += red.matrix();
    }
    if (prob > 0) acc.matrix() /= prob;
    return {std::move(acc), prob};
  }

 private:
  struct Branch {
    std::map<int, int> record;  // live recorded bits
    DensityMatrix rho;          // unnormalized; trace = branch probability
  };

  const Circuit& c_;
  NoiseModel noise_;
  OracleOptions opts_;
  std::vector<Branch> branches_;
  std::map<int, int> frozen_bit_qubit_;
  std::vector<bool> frozen_qubit_;
  std::vector<int> last_read_;  // per bit, last op index reading it (-1 none)

  bool reported(int b) const {
    if (opts_.report_all_bits) return true;
    return std::find(opts_.report_bits.begin(), opts_.report_bits.end(), b) !=
           opts_.report_bits.end();
  }

  void analyze_bits() {
    last_read_.assign(static_cast<size_t>(c_.n_bits), -1);
    for (size_t i = 0; i < c_.ops.size(); ++i)
      for (int b : c_.ops[i].bits) last_read_[static_cast<size_t>(b)] = static_cast<int>(i);
  }

  void confuse_in_place(std::vector<double>& joint, const std::vector<int>& bits) const {
    if (noise_.eps01 == 0 && noise_.eps10 == 0) return;
    // conf[o][r]: P(read r | true o)
    const double c00 = 1 - noise_.eps10, c01 = noise_.eps01;
    const double c10 = noise_.eps10, c11 = 1 - noise_.eps01;
    for (size_t i = 0; i < bits.size(); ++i) {
      size_t step = size_t{1} << i;
      for (size_t base = 0; base < joint.size(); base += 2 * step)
        for (size_t k = base; k < base + step; ++k) {
          double p0 = joint[k], p1 = joint[k + step];
          joint[k] = c00 * p0 + c01 * p1;
          joint[k + step] = c10 * p0 + c11 * p1;
        }
    }
  }

  void condition_frozen(DensityMatrix& rho, int q, int read_value) const {
    DensityMatrix p0 = rho, p1 = rho;
    p0.project(q, 0);
    p1.project(q, 1);
    const double c0 = read_value == 0 ? 1 - noise_.eps10 : noise_.eps10;
    const double c1 = read_value == 0 ? noise_.eps01 : 1 - noise_.eps01;
    rho.matrix() = c0 * p0.matrix() + c1 * p1.matrix();
  }

  void apply_gate_noise_1q(Branch& br, int q) {
    if (!frozen_qubit_[static_cast<size_t>(q)]) br.rho.depolarize_1q(q, noise_.p1);
  }

  void run() {
    frozen_qubit_.assign(static_cast<size_t>(c_.n_qubits), false);
    branches_.push_back({{}, DensityMatrix(c_.n_qubits)});

    const std::vector<int> layer_of = two_qubit_layers(c_);
    int total_depth = 0;
    two_qubit_layers(c_, &total_depth);
    const double theta_err = noise_.effective_coherent_z();
    int completed_layers = 0;

    auto idle_damp_all = [&](int up_to_layer) {
      for (; completed_layers < up_to_layer; ++completed_layers) {
        if (noise_.gamma_idle <= 0) continue;
        for (int q = 0; q < c_.n_qubits; ++q)
          if (!frozen_qubit_[static_cast<size_t>(q)])
            for (auto& br : branches_) br.rho.amplitude_damp(q, noise_.gamma_idle);
      }
    };

    for (size_t i = 0; i < c_.ops.size(); ++i) {
      const GateOp& op = c_.ops[i];
      if (frozen_qubit_[static_cast<size_t>(op.q0)] ||
          (op.q1 >= 0 && frozen_qubit_[static_cast<size_t>(op.q1)]))
        throw SimError("gate on a qubit after its terminal measurement");
      if (op.is_two_qubit() && layer_of[i] > completed_layers + 1)
        idle_damp_all(layer_of[static_cast<size_t>(i)] - 1);

      switch (op.kind) {
        case GateKind::H:
        case GateKind::X:
        case GateKind::Y:
        case GateKind::Z:
        case GateKind::S:
        case GateKind::Sdg:
        case GateKind::RZ: {
          Eigen::Matrix2cd u;
          switch (op.kind) {
            case GateKind::H: u = gates::h(); break;
            case GateKind::X: u = gates::x(); break;
            case GateKind::Y: u = gates::y(); break;
            case GateKind::Z: u = gates::z(); break;
            case GateKind::S: u = gates::s(); break;
            case GateKind::Sdg: u = gates::sdg(); break;
            default: u = gates::rz(op.angle); break;
          }
          for (auto& br : branches_) {
            br.rho.apply_1q(op.q0, u);
            apply_gate_noise_1q(br, op.q0);
          }
          break;
        }
        case GateKind::CNOT:
          for (auto& br : branches_) {
            br.rho.cnot(op.q0, op.q1);
            if (theta_err != 0) {
              br.rho.apply_1q(op.q0, gates::rz(theta_err));
              br.rho.apply_1q(op.q1, gates::rz(theta_err));
            }
            br.rho.depolarize_2q(op.q0, op.q1, noise_.p2);
          }
          break;
        case GateKind::SWAP:
          for (auto& br : branches_) {
            br.rho.swap_qubits(op.q0, op.q1);
            for (int rep = 0; rep < 3; ++rep) br.rho.depolarize_2q(op.q0, op.q1, noise_.p2);
          }
          break;
        case GateKind::Measure: {
          for (auto& br : branches_) br.rho.amplitude_damp(op.q0, noise_.gamma_meas);
          Eigen::Matrix2cd rot = Eigen::Matrix2cd::Identity();
          if (op.basis == Basis::Y) rot = gates::h() * gates::sdg();
          if (op.basis == Basis::X) rot = gates::h();
          if (op.basis != Basis::Z)
            for (auto& br : branches_) br.rho.apply_1q(op.q0, rot);

          const bool consumed = last_read_[static_cast<size_t>(op.bit)] >= 0;
          if (!consumed) {
            for (auto& br : branches_) br.rho.dephase(op.q0);
            frozen_qubit_[static_cast<size_t>(op.q0)] = true;
            frozen_bit_qubit_[op.bit] = op.q0;
          } else {
            // conf[o][r]: P(read r | true o)
            const double conf[2][2] = {{1 - noise_.eps10, noise_.eps10},
                                       {noise_.eps01, 1 - noise_.eps01}};
            std::vector<Branch> next;
            next.reserve(branches_.size() * 2);
            for (auto& br : branches_) {
              DensityMatrix p0 = br.rho, p1 = br.rho;
              p0.project(op.q0, 0);
              p1.project(op.q0, 1);
              for (int r = 0; r < 2; ++r) {
                DensityMatrix mix(c_.n_qubits,
                                  conf[0][r] * p0.matrix() + conf[1][r] * p1.matrix());
                if (mix.trace() < 1e-15) continue;
                Branch nb{br.record, std::move(mix)};
                nb.record[op.bit] = r;
                next.push_back(std::move(nb));
              }
            }
            branches_ = std::move(next);
          }
          break;
        }
        case GateKind::Reset:
          for (auto& br : branches_) {
            DensityMatrix p1 = br.rho;
            p1.project(op.q0, 1);
            br.rho.project(op.q0, 0);
            p1.apply_1q(op.q0, gates::x());
            br.rho.matrix() += p1.matrix();
          }
          break;
        case GateKind::CondX:
        case GateKind::CondZ:
          for (auto& br : branches_) {
            int parity = 0;
            for (int b : op.bits) parity ^= br.record.at(b);
            if (parity) {
              br.rho.apply_1q(op.q0, op.kind == GateKind::CondX ? gates::x() : gates::z());
              apply_gate_noise_1q(br, op.q0);
            }
          }
          break;
      }

      // Drop dead unreported bits and merge coinciding branches.
      bool dropped = false;
      for (int b = 0; b < c_.n_bits; ++b) {
        if (last_read_[static_cast<size_t>(b)] == static_cast<int>(i) && !reported(b)) {
          for (auto& br : branches_) br.record.erase(b);
          dropped = true;
        }
      }
      if (dropped && branches_.size() > 1) {
        std::map<std::map<int, int>, size_t> by_record;
        std::vector<Branch> merged;
        for (auto& br : branches_) {
          auto it = by_record.find(br.record);
          if (it == by_record.end()) {
            by_record[br.record] = merged.size();
            merged.push_back(std::move(br));
          } else {
            merged[it->second].rho.matrix() += br.rho.matrix();
          }
        }
        branches_ = std::move(merged);
      }
    }
    idle_damp_all(total_depth);
  }
};

// Depth-first enumeration of measurement branches of a noiseless circuit.
class PureEngine {
 public:
  // callback(record, probability, final state)
  using BranchFn =
      std::function<void(const std::vector<int>&, double, const StateVector&)>;

  static void for_each_branch(const Circuit& c, const BranchFn& fn, int qubit_limit = 20) {
    if (c.n_qubits > qubit_limit) throw SimError("pure oracle qubit limit exceeded");
    StateVector psi(c.n_qubits);
    std::vector<int> record(static_cast<size_t>(c.n_bits), 0);
    recurse(c, 0, psi, record, 1.0, fn);
  }

  static Distribution bit_distribution(const Circuit& c, int qubit_limit = 20) {
    Distribution d;
    for_each_branch(
        c,
        [&](const std::vector<int>& record, double p, const StateVector&) {
          std::string s(record.size(), '0');
          for (size_t b = 0; b < record.size(); ++b)
            if (record[b]) s[b] = '1';
          d[s] += p;
        },
        qubit_limit);
    return d;
  }

  // Mixed state on `keep`, averaged over branches that satisfy `conditions`
  // (record bit -> required value). Returns the state and its probability.
  static std::pair<Eigen::MatrixXcd, double> reduced_state(
      const Circuit& c, const std::vector<int>& keep, const std::map<int, int>& conditions = {},
      int qubit_limit = 20) {
    const Eigen::Index d = Eigen::Index{1} << keep.size();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
    double prob = 0;
    for_each_branch(
        c,
        [&](const std::vector<int>& record, double p, const StateVector& psi) {
          for (const auto& [b, v] : conditions)
            if (record[static_cast<size_t>(b)] != v) return;
          prob += p;
          accumulate_reduced(psi, keep, p, acc);
        },
        qubit_limit);
    if (prob > 0) acc /= prob;
    return {std::move(acc), prob};
  }

 private:
  static void accumulate_reduced(const StateVector& psi, const std::vector<int>& keep, double p,
                                 Eigen::MatrixXcd& acc) {
    const int n = psi.n_qubits();
    const int k = static_cast<int>(keep.size());
    std::vector<int> env;
    for (int q = 0; q < n; ++q)
      if (std::find(keep.begin(), keep.end(), q) == keep.end()) env.push_back(q);
    const size_t kd = size_t{1} << k, ed = size_t{1} << env.size();
    auto compose = [&](size_t kidx, size_t eidx) {
      size_t full = 0;
      for (int i = 0; i < k; ++i)
        if (kidx & (size_t{1} << i)) full |= size_t{1} << keep[static_cast<size_t>(i)];
      for (size_t i = 0; i < env.size(); ++i)
        if (eidx & (size_t{1} << i)) full |= size_t{1} << env[i];
      return full;
    };
    const auto& amps = psi.amplitudes();
    // psi as a (kd x ed) matrix; contribution = p * M M^dagger.
    Eigen::MatrixXcd m(kd, ed);
    for (size_t a = 0; a < kd; ++a)
      for (size_t e = 0; e < ed; ++e) m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(e)) = amps[compose(a, e)];
    acc += p * (m * m.adjoint());
  }

  static void recurse(const Circuit& c, size_t op_index, StateVector& psi,
                      std::vector<int>& record, double prob, const BranchFn& fn) {
    for (size_t i = op_index; i < c.ops.size(); ++i) {
      const GateOp& op = c.ops[i];
      switch (op.kind) {
        case GateKind::H: psi.h(op.q0); break;
        case GateKind::X: psi.x(op.q0); break;
        case GateKind::Y: psi.y(op.q0); break;
        case GateKind::Z: psi.z(op.q0); break;
        case GateKind::S: psi.s(op.q0); break;
        case GateKind::Sdg: psi.sdg(op.q0); break;
        case GateKind::RZ: psi.rz(op.q0, op.angle); break;
        case GateKind::CNOT: psi.cnot(op.q0, op.q1); break;
        case GateKind::SWAP: psi.swap(op.q0, op.q1); break;
        case GateKind::CondX:
          if (detail_parity(op.bits, record)) psi.x(op.q0);
          break;
        case GateKind::CondZ:
          if (detail_parity(op.bits, record)) psi.z(op.q0);
          break;
        case GateKind::Reset:
        case GateKind::Measure: {
          if (op.kind == GateKind::Measure) {
            if (op.basis == Basis::Y) psi.sdg(op.q0);
            if (op.basis != Basis::Z) psi.h(op.q0);
          }
          double p1 = psi.prob_one(op.q0);
          for (int outcome = 0; outcome < 2; ++outcome) {
            double po = outcome ? p1 : 1.0 - p1;
            if (po < 1e-12) continue;
            StateVector branch = psi;
            branch.collapse(op.q0, outcome, po);
            if (op.kind == GateKind::Reset) {
              if (outcome) branch.x(op.q0);
            } else {
              record[static_cast<size_t>(op.bit)] = outcome;
            }
            recurse(c, i + 1, branch, record, prob * po, fn);
          }
          if (op.kind == GateKind::Measure) record[static_cast<size_t>(op.bit)] = 0;
          return;
        }
      }
    }
    fn(record, prob, psi);
  }

  static bool detail_parity(const std::vector<int>& bits, const std::vector<int>& record) {
    int p = 0;
    for (int b : bits) p ^= record[static_cast<size_t>(b)];
    return p == 1;
  }
};

// Choi matrix of the channel a circuit induces on `io_qubits` (input = output
// wires), via maximally entangled references prepended to the circuit;
// noiseless circuits only. Basis order: (ref_k..ref_0, io_k..io_0) with io
// qubits in the given order occupying the low half.
inline Eigen::MatrixXcd pure_choi_matrix(const Circuit& c, const std::vector<int>& io_qubits,
                                         const std::map<int, int>& conditions = {},
                                         int qubit_limit = 20) {
  const int k = static_cast<int>(io_qubits.size());
  Circuit ext(c.n_qubits + k, c.n_bits);
  ext.metadata.bit_roles = c.metadata.bit_roles;
  for (int i = 0; i < k; ++i) {
    int ref = c.n_qubits + i;
    ext.append(GateOp::h(ref));
    ext.append(GateOp::cnot(ref, io_qubits[static_cast<size_t>(i)]));
  }
  for (const GateOp& op : c.ops) ext.append(op);
  std::vector<int> keep;
  for (int i = 0; i < k; ++i) keep.push_back(io_qubits[static_cast<size_t>(i)]);
  for (int i = 0; i < k; ++i) keep.push_back(c.n_qubits + i);
  auto [rho, prob] = PureEngine::reduced_state(ext, keep, conditions, qubit_limit);
  return rho;
}

}  // namespace qedkit
