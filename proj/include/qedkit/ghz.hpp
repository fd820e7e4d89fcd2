#pragma once

// GHZ preparation with sparse parity checks, and the multiple-quantum
// coherence verification battery.
//
// Preparation grows entanglement in BFS layers over the coupling graph. Each
// flag is a Z_i Z_j stabilizer check: (after s routing SWAPs) two CNOTs from
// the checked pair onto a fresh ancilla, then a Z measurement whose 1 outcome
// marks a bit-flip or damping error on the pair. Type-0 checks are scheduled
// in the earliest layer where both data qubits are entangled; a type-1 check
// swaps the flag with its one adjacent data qubit first, and the displaced
// data qubit simply lives at the flag's node from then on (GHZ states are
// permutation invariant, so nothing else changes).

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "qedkit/circuit.hpp"
#include "qedkit/layout.hpp"

namespace qedkit {

namespace detail {
inline std::string format_phase(double phi) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", phi);
  return buf;
}
}  // namespace detail

struct GhzSpec {
  std::vector<int> data;
  int root = -1;
  std::vector<FlagPlacement> flags;
};

struct GhzCircuit {
  Circuit circuit;              // preparation + parity checks; no data measurement
  std::vector<int> data_qubits; // final data locations (type-1 checks relocate one)
  int root = -1;
  std::vector<int> flag_bits;
  std::vector<GateOp> prep_ops; // the unitary spread at final locations
};

inline GhzCircuit build_ghz_ex(const CouplingGraph& g, const GhzSpec& spec) {
  if (spec.data.empty()) throw CircuitError("empty data set");
  for (const FlagPlacement& f : spec.flags) {
    if (f.s != static_cast<int>(f.swap_route.size()) || f.s < 0 || f.s > 1)
      throw CircuitError("flag placement must have s in {0,1} matching its route");
  }
  auto layers = bfs_schedule(g, spec.root, spec.data);  // validates connectivity

  Circuit c(g.n_nodes(), static_cast<int>(spec.flags.size()));
  c.metadata.qubit_roles.assign(static_cast<size_t>(g.n_nodes()), "ancilla");
  for (int q : spec.data) c.set_qubit_role(q, "data");
  c.metadata.bit_roles.assign(spec.flags.size(), "flag");

  // Entangle-layer index per data node.
  std::vector<int> layer_of(static_cast<size_t>(g.n_nodes()), 0);
  for (size_t l = 0; l < layers.size(); ++l)
    for (auto& [p, v] : layers[l]) layer_of[static_cast<size_t>(v)] = static_cast<int>(l) + 1;

  std::vector<GateOp> prep;
  prep.push_back(GateOp::h(spec.root));
  c.append(prep.back());

  int next_bit = 0;
  std::vector<int> flag_bits;
  auto emit_type0 = [&](const FlagPlacement& f) {
    int a = std::min(f.checked.first, f.checked.second);
    int b = std::max(f.checked.first, f.checked.second);
    if (!g.has_edge(a, f.flag) || !g.has_edge(b, f.flag))
      throw CircuitError("type-0 flag must be adjacent to both checked qubits");
    c.set_qubit_role(f.flag, "flag");
    c.append(GateOp::cnot(a, f.flag));
    c.append(GateOp::cnot(b, f.flag));
    flag_bits.push_back(next_bit);
    c.append(GateOp::measure(f.flag, Basis::Z, next_bit++));
  };

  for (size_t l = 0; l <= layers.size(); ++l) {
    if (l < layers.size())
      for (auto& [p, v] : layers[l]) {
        prep.push_back(GateOp::cnot(p, v));
        c.append(prep.back());
      }
    for (const FlagPlacement& f : spec.flags) {
      if (f.s != 0) continue;
      int ready = std::max(layer_of[static_cast<size_t>(f.checked.first)],
                           layer_of[static_cast<size_t>(f.checked.second)]);
      if (ready == static_cast<int>(l) + 1) emit_type0(f);
    }
  }

  // Type-1 checks after the spread; the checked pair must be graph-adjacent
  // and the flag adjacent to the routed qubit.
  std::vector<int> final_data = spec.data;
  for (const FlagPlacement& f : spec.flags) {
    if (f.s != 1) continue;
    int moved = f.swap_route[0];
    int other = f.checked.first == moved ? f.checked.second : f.checked.first;
    if (!g.has_edge(f.flag, moved) || !g.has_edge(moved, other))
      throw CircuitError("type-1 flag needs flag-moved and moved-other adjacency");
    c.set_qubit_role(f.flag, "flag");
    c.append(GateOp::swap(f.flag, moved));
    // Data now lives at f.flag; the ancilla sits at `moved`.
    c.append(GateOp::cnot(f.flag, moved));
    c.append(GateOp::cnot(other, moved));
    flag_bits.push_back(next_bit);
    c.append(GateOp::measure(moved, Basis::Z, next_bit++));
    for (int& q : final_data)
      if (q == moved) q = f.flag;
    for (GateOp& op : prep) {
      if (op.q0 == moved) op.q0 = f.flag;
      if (op.q1 == moved) op.q1 = f.flag;
    }
    c.set_qubit_role(f.flag, "data");
    c.set_qubit_role(moved, "flag");
  }

  c.metadata.labels["protocol"] = "ghz";
  c.metadata.labels["n"] = std::to_string(spec.data.size());

  GhzCircuit out;
  out.data_qubits = std::move(final_data);
  out.root = spec.root;
  out.flag_bits = std::move(flag_bits);
  out.prep_ops = std::move(prep);
  out.circuit = std::move(c);
  return out;
}

inline Circuit build_ghz(const CouplingGraph& g, const GhzSpec& spec) {
  return build_ghz_ex(g, spec).circuit;
}

// Appends a Z measurement of every data qubit (bits tagged "data", after the
// flag bits).
inline Circuit with_data_measurement(const GhzCircuit& ghz) {
  const Circuit& base = ghz.circuit;
  const int n = static_cast<int>(ghz.data_qubits.size());
  Circuit c(base.n_qubits, base.n_bits + n);
  c.metadata = base.metadata;
  c.metadata.bit_roles.resize(static_cast<size_t>(base.n_bits + n), "data");
  for (const GateOp& op : base.ops) c.append(op);
  for (int i = 0; i < n; ++i)
    c.append(GateOp::measure(ghz.data_qubits[static_cast<size_t>(i)], Basis::Z, base.n_bits + i));
  return c;
}

// Nyquist-rate phase sweep for the n-th Fourier mode: phi_j = pi j/(n+1).
inline std::vector<double> mqc_phases(int n) {
  std::vector<double> out;
  for (int j = 0; j <= 2 * n + 1; ++j)
    out.push_back(std::numbers::pi * j / static_cast<double>(n + 1));
  return out;
}

// The 2n+3 verification circuits: for each phi_j a coherence circuit
// (prepare; rotate every data qubit by RZ(phi); un-prepare with the inverse
// spread; measure data in Z), then one population circuit (prepare; measure
// data in Z). Flag checks stay in place and their bits come first.
inline std::vector<Circuit> build_mqc_battery(const GhzCircuit& ghz) {
  const int n = static_cast<int>(ghz.data_qubits.size());
  std::vector<Circuit> battery;
  for (double phi : mqc_phases(n)) {
    Circuit staged(ghz.circuit.n_qubits, ghz.circuit.n_bits + n);
    staged.metadata = ghz.circuit.metadata;
    staged.metadata.bit_roles.resize(static_cast<size_t>(ghz.circuit.n_bits + n), "data");
    for (const GateOp& op : ghz.circuit.ops) staged.append(op);
    for (int q : ghz.data_qubits) staged.append(GateOp::rz(q, phi));
    for (auto it = ghz.prep_ops.rbegin(); it != ghz.prep_ops.rend(); ++it)
      staged.append(inverse_op(*it));
    for (int i = 0; i < n; ++i)
      staged.append(
          GateOp::measure(ghz.data_qubits[static_cast<size_t>(i)], Basis::Z, ghz.circuit.n_bits + i));
    staged.metadata.labels["mqc_phase"] = detail::format_phase(phi);
    battery.push_back(std::move(staged));
  }
  battery.push_back(with_data_measurement(ghz));
  battery.back().metadata.labels["mqc_phase"] = "population";
  return battery;
}

}  // namespace qedkit
