#pragma once

// Monte Carlo trajectory execution with mid-circuit measurement and
// feedforward. A shot is a pure function of (circuit, noise, seed); counts
// use per-shot seeds seed+i, so results are identical for any execution
// order or degree of parallelism.

#include <random>
#include <string>

#include "qedkit/circuit.hpp"
#include "qedkit/counts.hpp"
#include "qedkit/noise.hpp"
#include "qedkit/statevector.hpp"

namespace qedkit {

struct RunOptions {
  int qubit_limit = 24;
  bool check_norm = true;  // assert L2 norm 1 within 1e-10 after every op
};

namespace detail {

inline void sample_depol_1q(StateVector& psi, int q, double p, std::mt19937_64& rng) {
  if (p <= 0) return;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) >= p) return;
  std::uniform_int_distribution<int> pick(1, 3);
  psi.pauli(q, pick(rng));
}

inline void sample_depol_2q(StateVector& psi, int a, int b, double p, std::mt19937_64& rng) {
  if (p <= 0) return;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) >= p) return;
  std::uniform_int_distribution<int> pick(1, 15);  // non-identity Pauli pairs
  int k = pick(rng);
  psi.pauli(a, k & 3);
  psi.pauli(b, (k >> 2) & 3);
}

inline int apply_readout_error(int outcome, const NoiseModel& noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (outcome == 1 && noise.eps01 > 0 && u(rng) < noise.eps01) return 0;
  if (outcome == 0 && noise.eps10 > 0 && u(rng) < noise.eps10) return 1;
  return outcome;
}

inline void rotate_to_z_basis(StateVector& psi, int q, Basis basis) {
  if (basis == Basis::Y) psi.sdg(q);
  if (basis != Basis::Z) psi.h(q);
}

inline bool parity(const std::vector<int>& bits, const std::vector<int>& record) {
  int p = 0;
  for (int b : bits) p ^= record[static_cast<size_t>(b)];
  return p == 1;
}

}  // namespace detail

// Executes one trajectory; returns the classical record ('0'/'1' per bit,
// bit 0 leftmost).
inline std::string run_shot(const Circuit& c, const NoiseModel& noise, std::uint64_t seed,
                            const RunOptions& opts = {}) {
  noise.validate();
  if (c.n_qubits > opts.qubit_limit) throw SimError("qubit limit exceeded");
  std::mt19937_64 rng(seed);
  StateVector psi(c.n_qubits);
  std::vector<int> record(static_cast<size_t>(c.n_bits), 0);

  const std::vector<int> layer_of = two_qubit_layers(c);
  const double theta_err = noise.effective_coherent_z();
  int completed_layers = 0;

  auto idle_damp_all = [&](int up_to_layer) {
    for (; completed_layers < up_to_layer; ++completed_layers)
      if (noise.gamma_idle > 0)
        for (int q = 0; q < c.n_qubits; ++q) psi.amplitude_damp(q, noise.gamma_idle, rng);
  };

  for (size_t i = 0; i < c.ops.size(); ++i) {
    const GateOp& op = c.ops[i];
    if (op.is_two_qubit() && layer_of[i] > completed_layers + 1) idle_damp_all(layer_of[i] - 1);

    switch (op.kind) {
      case GateKind::H:
        psi.h(op.q0);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::X:
        psi.x(op.q0);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::Y:
        psi.y(op.q0);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::Z:
        psi.z(op.q0);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::S:
        psi.s(op.q0);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::Sdg:
        psi.sdg(op.q0);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::RZ:
        psi.rz(op.q0, op.angle);
        detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        break;
      case GateKind::CNOT:
        psi.cnot(op.q0, op.q1);
        if (theta_err != 0) {
          psi.rz(op.q0, theta_err);
          psi.rz(op.q1, theta_err);
        }
        detail::sample_depol_2q(psi, op.q0, op.q1, noise.p2, rng);
        break;
      case GateKind::SWAP:
        psi.swap(op.q0, op.q1);
        for (int rep = 0; rep < 3; ++rep)  // three-CNOT realization
          detail::sample_depol_2q(psi, op.q0, op.q1, noise.p2, rng);
        break;
      case GateKind::Measure: {
        if (noise.gamma_meas > 0) psi.amplitude_damp(op.q0, noise.gamma_meas, rng);
        detail::rotate_to_z_basis(psi, op.q0, op.basis);
        int outcome = psi.measure_z(op.q0, rng);
        record[static_cast<size_t>(op.bit)] = detail::apply_readout_error(outcome, noise, rng);
        break;
      }
      case GateKind::Reset: {
        double p1 = psi.prob_one(op.q0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int outcome = u(rng) < p1 ? 1 : 0;
        psi.collapse(op.q0, outcome, outcome ? p1 : 1.0 - p1);
        if (outcome) psi.x(op.q0);
        break;
      }
      case GateKind::CondX:
        if (detail::parity(op.bits, record)) {
          psi.x(op.q0);
          detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        }
        break;
      case GateKind::CondZ:
        if (detail::parity(op.bits, record)) {
          psi.z(op.q0);
          detail::sample_depol_1q(psi, op.q0, noise.p1, rng);
        }
        break;
    }
    if (opts.check_norm && std::abs(psi.norm_sq() - 1.0) > 1e-10)
      throw SimError("state norm drifted beyond 1e-10");
  }
  int total_depth = 0;
  two_qubit_layers(c, &total_depth);
  idle_damp_all(total_depth);

  std::string out(static_cast<size_t>(c.n_bits), '0');
  for (int b = 0; b < c.n_bits; ++b)
    if (record[static_cast<size_t>(b)]) out[static_cast<size_t>(b)] = '1';
  return out;
}

inline Counts sample_counts(const Circuit& c, const NoiseModel& noise, std::uint64_t n_shots,
                            std::uint64_t seed, const RunOptions& opts = {}) {
  Counts counts;
  counts.bit_order.resize(static_cast<size_t>(c.n_bits));
  for (int b = 0; b < c.n_bits; ++b) counts.bit_order[static_cast<size_t>(b)] = b;
  counts.bit_roles = c.metadata.bit_roles;
  for (std::uint64_t i = 0; i < n_shots; ++i) counts.add(run_shot(c, noise, seed + i, opts));
  return counts;
}

}  // namespace qedkit
