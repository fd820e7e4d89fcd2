#pragma once

// Monte Carlo process certification battery and Bell-state tomography
// battery.
//
// For the ideal CNOT exactly 16 (input Pauli, output Pauli) combinations have
// non-vanishing Choi components; each term is estimated by preparing a
// uniformly random +/-1 eigenstate pair of the *conjugated* input Pauli (sign
// tracked), running the protocol, and measuring the output Pauli on control
// and target. The four eigenstate preparations per term are materialized as
// four circuit variants; the runner samples a variant per shot.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "qedkit/circuit.hpp"
#include "qedkit/density.hpp"

namespace qedkit {

struct CertTerm {
  std::array<char, 2> input{'I', 'I'};   // (control, target) Pauli letters
  std::array<char, 2> output{'I', 'I'};
  int ideal_sign = 1;                    // ideal Choi component, +1 or -1
  std::array<Circuit, 4> variants;       // eigenstate index e = e_c + 2*e_t
  std::array<int, 4> prep_signs{1, 1, 1, 1};
  std::array<int, 2> out_bits{-1, -1};   // -1 where the output letter is I
};

namespace detail {

inline Eigen::Matrix4cd two_qubit_pauli(char pc, char pt) {
  // Control is the high-order factor: qubit 0 = control occupies bit 0...
  // basis index b = q1*2 + q0 with q0 = control. Kron order: target (x)
  // control when control is bit 0? Keep explicit: entry ((t r, c r),(t c, c c)).
  Eigen::Matrix2cd mc = gates::pauli(pc), mt = gates::pauli(pt);
  Eigen::Matrix4cd out;
  for (int tr = 0; tr < 2; ++tr)
    for (int cr = 0; cr < 2; ++cr)
      for (int tc = 0; tc < 2; ++tc)
        for (int cc = 0; cc < 2; ++cc)
          out(2 * tr + cr, 2 * tc + cc) = mt(tr, tc) * mc(cr, cc);
  return out;
}

inline Eigen::Matrix4cd cnot_matrix() {
  // qubit 0 = control, qubit 1 = target; basis index = 2*t + c.
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u(0, 0) = 1;  // |00>
  u(1, 3) = 1;  // c=1,t=0 -> c=1,t=1 : index 1 -> 3
  u(2, 2) = 1;  // |t=1,c=0>
  u(3, 1) = 1;
  return u;
}

// Appends preparation of the e-th eigenstate of the conjugate of Pauli `p`
// on qubit q; returns the tracked eigenvalue sign (+1/-1).
inline int append_eigenstate_prep(Circuit& c, int q, char p, int e) {
  switch (p) {
    case 'I':
      if (e) c.append(GateOp::x(q));
      return 1;
    case 'X':  // X* = X; |+>/|->
      if (e) c.append(GateOp::x(q));
      c.append(GateOp::h(q));
      return e ? -1 : 1;
    case 'Y':  // Y* = -Y; +1 eigenstate of Y* is |-i> = S H X |0>
      if (!e) c.append(GateOp::x(q));
      c.append(GateOp::h(q));
      c.append(GateOp::s(q));
      return e ? -1 : 1;
    case 'Z':
      if (e) c.append(GateOp::x(q));
      return e ? -1 : 1;
  }
  throw CircuitError("unknown Pauli letter");
}

}  // namespace detail

// Enumerates the non-vanishing terms of the ideal CNOT in the Pauli basis of
// the Choi state and builds the estimation circuits around `protocol`, which
// must carry "control" and "target" qubit roles.
inline std::vector<CertTerm> build_certification_battery(const Circuit& protocol) {
  auto controls = protocol.qubits_with_role("control");
  auto targets = protocol.qubits_with_role("target");
  if (controls.size() != 1 || targets.size() != 1)
    throw CircuitError("protocol lacks designated control/target metadata");
  const int qc = controls[0], qt = targets[0];

  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  const Eigen::Matrix4cd u = detail::cnot_matrix();

  std::vector<CertTerm> battery;
  for (char jc : letters)
    for (char jt : letters) {
      // sigma = Tr[P_out U P_in^T U^dagger] / 4 over all P_out; one survives.
      Eigen::Matrix4cd pin = detail::two_qubit_pauli(jc, jt).transpose();
      Eigen::Matrix4cd image = u * pin * u.adjoint();
      for (char ic : letters)
        for (char it : letters) {
          cplx overlap = (detail::two_qubit_pauli(ic, it) * image).trace() / 4.0;
          if (std::abs(overlap) < 1e-12) continue;
          CertTerm term;
          term.input = {jc, jt};
          term.output = {ic, it};
          term.ideal_sign = overlap.real() > 0 ? 1 : -1;

          for (int e = 0; e < 4; ++e) {
            const int ec = e & 1, et = (e >> 1) & 1;
            Circuit v(protocol.n_qubits, protocol.n_bits + 2);
            v.metadata = protocol.metadata;
            v.metadata.bit_roles.push_back("out");
            v.metadata.bit_roles.push_back("out");
            int sign = detail::append_eigenstate_prep(v, qc, jc, ec) *
                       detail::append_eigenstate_prep(v, qt, jt, et);
            for (const GateOp& op : protocol.ops) v.append(op);
            int next_bit = protocol.n_bits;
            if (ic != 'I') {
              term.out_bits[0] = next_bit;
              v.append(GateOp::measure(qc, ic == 'X' ? Basis::X : ic == 'Y' ? Basis::Y : Basis::Z,
                                       next_bit++));
            }
            if (it != 'I') {
              term.out_bits[1] = next_bit;
              v.append(GateOp::measure(qt, it == 'X' ? Basis::X : it == 'Y' ? Basis::Y : Basis::Z,
                                       next_bit++));
            }
            term.prep_signs[static_cast<size_t>(e)] = sign;
            term.variants[static_cast<size_t>(e)] = std::move(v);
          }
          battery.push_back(std::move(term));
        }
    }
  return battery;
}

// Nine measurement-basis circuits {X,Y,Z} x {X,Y,Z} on the Bell pair
// produced by `bell_prep`. Basis order: XX, XY, XZ, YX, ..., ZZ; the two
// fresh bits (roles "out") hold (first, second) qubit outcomes.
inline std::vector<Circuit> build_bell_tomography_battery(const Circuit& bell_prep,
                                                          std::pair<int, int> pair) {
  const char letters[3] = {'X', 'Y', 'Z'};
  std::vector<Circuit> battery;
  for (char a : letters)
    for (char b : letters) {
      Circuit c(bell_prep.n_qubits, bell_prep.n_bits + 2);
      c.metadata = bell_prep.metadata;
      c.metadata.bit_roles.push_back("out");
      c.metadata.bit_roles.push_back("out");
      for (const GateOp& op : bell_prep.ops) c.append(op);
      c.append(GateOp::measure(pair.first, a == 'X' ? Basis::X : a == 'Y' ? Basis::Y : Basis::Z,
                               bell_prep.n_bits));
      c.append(GateOp::measure(pair.second, b == 'X' ? Basis::X : b == 'Y' ? Basis::Y : Basis::Z,
                               bell_prep.n_bits + 1));
      c.metadata.labels["tomo_basis"] = std::string(1, a) + b;
      battery.push_back(std::move(c));
    }
  return battery;
}

}  // namespace qedkit
