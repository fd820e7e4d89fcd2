#pragma once

// Builders for the long-range CNOT family, fan-out, GHZ preparation with
// parity-check flags, and the verification circuit batteries.
//
// Long-range CNOT circuits share a three-phase structure: grow a linear-chain
// GHZ over the intermediates (entangle), reduce it to a Bell pair on the
// chain ends (disentangle, unitarily where the variant allows), then teleport
// the gate through the Bell pair with local operations and two classical
// bits. Disentangled intermediates end in |0> and may be measured as
// error-detection flags; any 1 signals a bit-flip or damping error.
//
// Qubit convention for CNOT variants: 0 = control, 1..n = intermediate chain
// (head adjacent to control, tail adjacent to target), n+1 = target.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qedkit/circuit.hpp"
#include "qedkit/density.hpp"
#include "qedkit/layout.hpp"

namespace qedkit {

enum class TeleportVariant {
  UnitaryEntangleDisentangle,
  MeasurementBased,
  FullyUnitaryDisentangle,
  Mixed,
};

struct TeleportSpec {
  int n = 3;                    // intermediate chain length
  bool error_detection = false;
  TeleportVariant variant = TeleportVariant::UnitaryEntangleDisentangle;
  int k = 1;                    // Mixed only: number of parallel blocks

  void validate() const {
    if (n < 3) throw CircuitError("chain length must be at least 3");
    if (variant == TeleportVariant::Mixed && (k < 1 || k > n / 2))
      throw CircuitError("mixed-style branch count must satisfy 1 <= k <= n/2");
  }
};

namespace detail {

// H on chain[root], then CNOTs spreading toward both ends (the longer, or
// target-side, branch first so greedy layering staggers them).
inline void emit_chain_entangle(Circuit& c, const std::vector<int>& chain, int root) {
  c.append(GateOp::h(chain[static_cast<size_t>(root)]));
  const int len = static_cast<int>(chain.size());
  for (int i = root; i + 1 < len; ++i)
    c.append(GateOp::cnot(chain[static_cast<size_t>(i)], chain[static_cast<size_t>(i + 1)]));
  for (int i = root; i - 1 >= 0; --i)
    c.append(GateOp::cnot(chain[static_cast<size_t>(i)], chain[static_cast<size_t>(i - 1)]));
}

inline int chain_root_index(int len) { return (len - 1) / 2; }  // ties toward the head

}  // namespace detail

// Unitary entangle-disentangle protocol. Phase A grows the chain GHZ from a
// mid-chain root; phase B unitarily disentangles all intermediates except
// head, root, and tail with CNOTs directed toward the ends; phase C removes
// the root with an X-basis measurement whose outcome feeds the final Z
// correction; phase D is the teleported-CNOT block.
inline Circuit build_unitary_ed_cnot(const TeleportSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int n_flags = spec.error_detection ? n - 3 : 0;
  Circuit c(n + 2, n_flags + 3);
  const int control = 0, target = n + 1;
  std::vector<int> chain(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) chain[static_cast<size_t>(i)] = 1 + i;
  const int root = detail::chain_root_index(n);

  c.metadata.qubit_roles.assign(static_cast<size_t>(n + 2), "data");
  c.set_qubit_role(control, "control");
  c.set_qubit_role(target, "target");
  c.metadata.bit_roles.assign(static_cast<size_t>(n_flags + 3), "locc");
  for (int b = 0; b < n_flags; ++b) c.set_bit_role(b, "flag");

  detail::emit_chain_entangle(c, chain, root);
  c.metadata.labels["entangle_end"] = std::to_string(c.ops.size());

  // Disentangle toward the ends: left run outer-first anchored at the root,
  // right run outer-first anchored at the root.
  for (int i = 1; i < root; ++i)
    c.append(GateOp::cnot(chain[static_cast<size_t>(i + 1)], chain[static_cast<size_t>(i)]));
  for (int i = n - 2; i > root; --i)
    c.append(GateOp::cnot(chain[static_cast<size_t>(i - 1)], chain[static_cast<size_t>(i)]));
  c.metadata.labels["disentangle_end"] = std::to_string(c.ops.size());

  int next_bit = 0;
  if (spec.error_detection) {
    for (int i = 1; i < n - 1; ++i) {
      if (i == root) continue;
      c.append(GateOp::measure(chain[static_cast<size_t>(i)], Basis::Z, next_bit++, true));
      c.set_qubit_role(chain[static_cast<size_t>(i)], "flag");
    }
  }

  int b_mid = next_bit++;
  c.append(GateOp::measure(chain[static_cast<size_t>(root)], Basis::X, b_mid));

  c.append(GateOp::cnot(control, chain[0]));
  c.append(GateOp::cnot(chain[static_cast<size_t>(n - 1)], target));
  int b_head = next_bit++;
  c.append(GateOp::measure(chain[0], Basis::Z, b_head));
  int b_tail = next_bit++;
  c.append(GateOp::measure(chain[static_cast<size_t>(n - 1)], Basis::X, b_tail));
  c.append(GateOp::cond_x(target, {b_head}));
  c.append(GateOp::cond_z(control, {b_mid, b_tail}));

  c.metadata.labels["protocol"] = "unitary-entangle-disentangle";
  c.metadata.labels["n"] = std::to_string(n);
  return c;
}

// Fully unitary disentangling variant: phase B reverses the entangling order
// and direction (CNOTs toward the center, middle qubits first), leaving a
// Bell pair on the chain ends and n-2 ground-state intermediates; no
// projective root measurement is needed.
inline Circuit build_fully_unitary_cnot(const TeleportSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int n_flags = spec.error_detection ? n - 2 : 0;
  Circuit c(n + 2, n_flags + 2);
  const int control = 0, target = n + 1;
  std::vector<int> chain(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) chain[static_cast<size_t>(i)] = 1 + i;
  const int root = detail::chain_root_index(n);

  c.metadata.qubit_roles.assign(static_cast<size_t>(n + 2), "data");
  c.set_qubit_role(control, "control");
  c.set_qubit_role(target, "target");
  c.metadata.bit_roles.assign(static_cast<size_t>(n_flags + 2), "locc");
  for (int b = 0; b < n_flags; ++b) c.set_bit_role(b, "flag");

  detail::emit_chain_entangle(c, chain, root);
  c.metadata.labels["entangle_end"] = std::to_string(c.ops.size());

  // Middle first, directions toward the center, anchored at the ends.
  for (int i = root; i >= 1; --i)
    c.append(GateOp::cnot(chain[static_cast<size_t>(i - 1)], chain[static_cast<size_t>(i)]));
  for (int i = root + 1; i <= n - 2; ++i)
    c.append(GateOp::cnot(chain[static_cast<size_t>(i + 1)], chain[static_cast<size_t>(i)]));
  c.metadata.labels["disentangle_end"] = std::to_string(c.ops.size());

  int next_bit = 0;
  if (spec.error_detection) {
    for (int i = 1; i <= n - 2; ++i) {
      c.append(GateOp::measure(chain[static_cast<size_t>(i)], Basis::Z, next_bit++, true));
      c.set_qubit_role(chain[static_cast<size_t>(i)], "flag");
    }
  }
  c.append(GateOp::cnot(control, chain[0]));
  c.append(GateOp::cnot(chain[static_cast<size_t>(n - 1)], target));
  int b_head = next_bit++;
  c.append(GateOp::measure(chain[0], Basis::Z, b_head));
  int b_tail = next_bit++;
  c.append(GateOp::measure(chain[static_cast<size_t>(n - 1)], Basis::X, b_tail));
  c.append(GateOp::cond_x(target, {b_head}));
  c.append(GateOp::cond_z(control, {b_tail}));

  c.metadata.labels["protocol"] = "fully-unitary-disentangle";
  c.metadata.labels["n"] = std::to_string(n);
  return c;
}

namespace detail {

struct MeasurementBasedPlan {
  std::vector<std::pair<int, int>> pairs;    // Bell pairs (left, right) chain indices
  bool has_plus = false;                     // odd n: extra |+> at the tail
  std::vector<std::pair<int, int>> fusions;  // (control idx, measured idx), chain order
  std::vector<int> members;                  // surviving GHZ chain indices, sorted
};

inline MeasurementBasedPlan measurement_based_plan(int n) {
  MeasurementBasedPlan plan;
  const int n_pairs = n / 2;
  for (int i = 0; i < n_pairs; ++i) plan.pairs.emplace_back(2 * i, 2 * i + 1);
  plan.has_plus = (n % 2 == 1);
  for (int i = 0; i + 1 < n_pairs; ++i) plan.fusions.emplace_back(2 * i + 1, 2 * i + 2);
  if (plan.has_plus) plan.fusions.emplace_back(n - 1, n - 2);
  std::vector<bool> consumed(static_cast<size_t>(n), false);
  for (auto& [ctrl, meas] : plan.fusions) consumed[static_cast<size_t>(meas)] = true;
  for (int i = 0; i < n; ++i) {
    bool in_pair_or_plus = i < 2 * n_pairs || plan.has_plus;
    if (in_pair_or_plus && !consumed[static_cast<size_t>(i)]) plan.members.push_back(i);
  }
  return plan;
}

}  // namespace detail

// Constant-depth measurement-based protocol: a Bell-pair layer, a fusion
// layer whose mid-circuit measurements feed X corrections, X-basis
// disentangling measurements whose parity feeds the final Z correction, and
// the teleported-CNOT block. For odd n an extra |+> qubit at the tail is
// fused in. The teleportation CNOTs commute with the fusion layer and are
// emitted inside it, which is what keeps the two-qubit depth at 2.
// `merged` defers every correction to the end of the circuit (the form the
// protocol is normally drawn in); both forms are channel-equivalent.
inline Circuit build_measurement_based_cnot_impl(int n, bool merged) {
  Circuit c(n + 2, n + 2);
  const int control = 0, target = n + 1;
  auto chain = [&](int i) { return 1 + i; };
  auto plan = detail::measurement_based_plan(n);

  c.metadata.qubit_roles.assign(static_cast<size_t>(n + 2), "data");
  c.set_qubit_role(control, "control");
  c.set_qubit_role(target, "target");
  c.metadata.bit_roles.assign(static_cast<size_t>(n + 2), "locc");

  for (auto& [l, r] : plan.pairs) {
    c.append(GateOp::h(chain(l)));
    c.append(GateOp::cnot(chain(l), chain(r)));
  }
  if (plan.has_plus) c.append(GateOp::h(chain(n - 1)));
  c.metadata.labels["entangle_end"] = std::to_string(c.ops.size());

  c.append(GateOp::cnot(control, chain(0)));
  c.append(GateOp::cnot(chain(n - 1), target));

  for (auto& [ctrl, meas] : plan.fusions) c.append(GateOp::cnot(chain(ctrl), chain(meas)));

  int next_bit = 0;
  std::vector<int> fusion_bits;
  for (auto& [ctrl, meas] : plan.fusions) {
    fusion_bits.push_back(next_bit);
    c.append(GateOp::measure(chain(meas), Basis::Z, next_bit++));
  }

  // Cumulative parity: a member is flipped by every fusion measured to its
  // left along the chain.
  auto member_parity = [&](int m) {
    std::vector<int> bits;
    for (size_t f = 0; f < plan.fusions.size(); ++f)
      if (plan.fusions[f].second < m) bits.push_back(fusion_bits[f]);
    return bits;
  };

  if (!merged) {
    for (int m : plan.members) {
      std::vector<int> bits = member_parity(m);
      if (bits.empty()) continue;
      c.append(GateOp::cond_x(chain(m), bits));
      if (m == n - 1) c.append(GateOp::cond_x(target, bits));  // tail CNOT already fired
    }
  }

  std::vector<int> x_bits;
  for (int m : plan.members) {
    if (m == 0 || m == n - 1) continue;
    x_bits.push_back(next_bit);
    c.append(GateOp::measure(chain(m), Basis::X, next_bit++));
  }
  int b_head = next_bit;
  c.append(GateOp::measure(chain(0), Basis::Z, next_bit++));
  int b_tail = next_bit;
  c.append(GateOp::measure(chain(n - 1), Basis::X, next_bit++));

  if (merged) {
    std::vector<int> xb = fusion_bits;
    xb.push_back(b_head);
    c.append(GateOp::cond_x(target, xb));
  } else {
    c.append(GateOp::cond_x(target, {b_head}));
  }
  std::vector<int> zb = x_bits;
  zb.push_back(b_tail);
  c.append(GateOp::cond_z(control, zb));

  c.metadata.labels["protocol"] = "measurement-based";
  c.metadata.labels["n"] = std::to_string(n);
  return c;
}

inline Circuit build_measurement_based_cnot(const TeleportSpec& spec) {
  spec.validate();
  return build_measurement_based_cnot_impl(spec.n, false);
}

inline Circuit build_measurement_based_cnot_merged(int n) {
  return build_measurement_based_cnot_impl(n, true);
}

// Mixed-style Bell-pair preparation over an n-qubit chain: k unitarily
// prepared GHZ blocks separated by k-1 fusion ancillas. Ancilla ZZ syndromes
// decode exactly like the bit-flip repetition code, feeding X corrections on
// downstream blocks; each block then disentangles in parallel and its root is
// projectively removed, with the root parities fixing the Bell-pair sign.
// Output is a Bell pair on qubits 0 and n-1.
inline Circuit build_mixed_style_bell(int n, int k, bool error_detection = false) {
  if (n < 3) throw CircuitError("chain length must be at least 3");
  if (k < 1 || k > n / 2) throw CircuitError("mixed-style branch count must satisfy 1 <= k <= n/2");

  const int data_total = n - (k - 1);
  std::vector<int> size(static_cast<size_t>(k), data_total / k);
  for (int i = 0; i < data_total % k; ++i) ++size[static_cast<size_t>(i)];

  std::vector<int> block_left(static_cast<size_t>(k)), block_right(static_cast<size_t>(k)),
      root(static_cast<size_t>(k));
  std::vector<int> ancilla;
  {
    int cursor = 0;
    for (int i = 0; i < k; ++i) {
      block_left[static_cast<size_t>(i)] = cursor;
      block_right[static_cast<size_t>(i)] = cursor + size[static_cast<size_t>(i)] - 1;
      root[static_cast<size_t>(i)] =
          block_left[static_cast<size_t>(i)] + (size[static_cast<size_t>(i)] - 1) / 2;
      cursor += size[static_cast<size_t>(i)];
      if (i + 1 < k) ancilla.push_back(cursor++);
    }
  }

  // Bits: k-1 fusion syndromes, then optional flags, then root X outcomes.
  std::vector<int> zeroed;
  for (int i = 0; i < k; ++i) {
    for (int q = block_left[static_cast<size_t>(i)]; q <= block_right[static_cast<size_t>(i)]; ++q) {
      bool survives = q == root[static_cast<size_t>(i)] || q == 0 || q == n - 1;
      if (!survives) zeroed.push_back(q);
    }
  }
  std::vector<int> measured_roots;
  for (int i = 0; i < k; ++i)
    if (root[static_cast<size_t>(i)] != 0 && root[static_cast<size_t>(i)] != n - 1)
      measured_roots.push_back(root[static_cast<size_t>(i)]);

  const int n_bits = (k - 1) + (error_detection ? static_cast<int>(zeroed.size()) : 0) +
                     static_cast<int>(measured_roots.size());
  Circuit c(n, n_bits);
  c.metadata.qubit_roles.assign(static_cast<size_t>(n), "data");
  for (int a : ancilla) c.set_qubit_role(a, "ancilla");
  c.metadata.bit_roles.assign(static_cast<size_t>(n_bits), "locc");

  for (int i = 0; i < k; ++i) {
    std::vector<int> block;
    for (int q = block_left[static_cast<size_t>(i)]; q <= block_right[static_cast<size_t>(i)]; ++q)
      block.push_back(q);
    detail::emit_chain_entangle(c, block, root[static_cast<size_t>(i)] - block_left[static_cast<size_t>(i)]);
  }
  c.metadata.labels["entangle_end"] = std::to_string(c.ops.size());

  int next_bit = 0;
  std::vector<int> syndrome_bits;
  for (int i = 0; i + 1 < k; ++i) {
    int a = ancilla[static_cast<size_t>(i)];
    c.append(GateOp::cnot(block_right[static_cast<size_t>(i)], a));
    c.append(GateOp::cnot(block_left[static_cast<size_t>(i + 1)], a));
    syndrome_bits.push_back(next_bit);
    c.append(GateOp::measure(a, Basis::Z, next_bit++));
  }
  // Repetition-code style corrections: block j flips on the parity of all
  // syndromes to its left.
  for (int j = 1; j < k; ++j) {
    std::vector<int> bits(syndrome_bits.begin(), syndrome_bits.begin() + j);
    for (int q = block_left[static_cast<size_t>(j)]; q <= block_right[static_cast<size_t>(j)]; ++q)
      c.append(GateOp::cond_x(q, bits));
  }

  for (int i = 0; i < k; ++i) {
    const int bl = block_left[static_cast<size_t>(i)], br = block_right[static_cast<size_t>(i)];
    const int r = root[static_cast<size_t>(i)];
    const int lstart = bl + (i == 0 ? 1 : 0);
    const int rend = br - (i == k - 1 ? 1 : 0);
    for (int t = lstart; t < r; ++t) c.append(GateOp::cnot(t + 1, t));
    for (int t = rend; t > r; --t) c.append(GateOp::cnot(t - 1, t));
  }
  c.metadata.labels["disentangle_end"] = std::to_string(c.ops.size());

  if (error_detection) {
    for (int q : zeroed) {
      c.set_bit_role(next_bit, "flag");
      c.set_qubit_role(q, "flag");
      c.append(GateOp::measure(q, Basis::Z, next_bit++, true));
    }
  }

  std::vector<int> root_bits;
  for (int r : measured_roots) {
    root_bits.push_back(next_bit);
    c.append(GateOp::measure(r, Basis::X, next_bit++));
  }
  if (!root_bits.empty()) c.append(GateOp::cond_z(0, root_bits));

  c.metadata.labels["protocol"] = "mixed-style-bell";
  c.metadata.labels["n"] = std::to_string(n);
  c.metadata.labels["k"] = std::to_string(k);
  return c;
}

// Long-range CNOT through a mixed-style Bell pair plus the standard
// teleportation block.
inline Circuit build_mixed_style_cnot(const TeleportSpec& spec) {
  spec.validate();
  const int n = spec.n;
  Circuit bell = build_mixed_style_bell(n, spec.k, spec.error_detection);
  Circuit c(n + 2, bell.n_bits + 2);
  const int control = 0, target = n + 1;
  std::vector<int> map(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) map[static_cast<size_t>(i)] = 1 + i;

  c.metadata.qubit_roles.assign(static_cast<size_t>(n + 2), "data");
  for (int i = 0; i < n; ++i)
    c.set_qubit_role(1 + i, bell.metadata.qubit_roles[static_cast<size_t>(i)]);
  c.set_qubit_role(control, "control");
  c.set_qubit_role(target, "target");
  c.metadata.bit_roles = bell.metadata.bit_roles;
  c.metadata.bit_roles.push_back("locc");
  c.metadata.bit_roles.push_back("locc");
  c.metadata.labels = bell.metadata.labels;

  append_circuit(c, bell, map, 0);
  c.append(GateOp::cnot(control, 1));
  c.append(GateOp::cnot(n, target));
  int b_head = bell.n_bits, b_tail = bell.n_bits + 1;
  c.append(GateOp::measure(1, Basis::Z, b_head));
  c.append(GateOp::measure(n, Basis::X, b_tail));
  c.append(GateOp::cond_x(target, {b_head}));
  c.append(GateOp::cond_z(control, {b_tail}));

  c.metadata.labels["protocol"] = "mixed-style";
  return c;
}

inline Circuit build_cnot(const TeleportSpec& spec) {
  switch (spec.variant) {
    case TeleportVariant::UnitaryEntangleDisentangle: return build_unitary_ed_cnot(spec);
    case TeleportVariant::MeasurementBased: return build_measurement_based_cnot(spec);
    case TeleportVariant::FullyUnitaryDisentangle: return build_fully_unitary_cnot(spec);
    case TeleportVariant::Mixed: return build_mixed_style_cnot(spec);
  }
  throw CircuitError("unknown variant");
}

// ---------------------------------------------------------------------------
// Fan-out
// ---------------------------------------------------------------------------

struct FanoutSpec {
  int control = 0;
  std::vector<int> targets;
  std::vector<int> path;  // ordered qubit list; consecutive entries coupled

  void validate() const {
    if (targets.empty()) throw CircuitError("fan-out needs at least one target");
    auto on_path = [&](int q) { return std::find(path.begin(), path.end(), q) != path.end(); };
    if (!on_path(control)) throw CircuitError("control not on path");
    for (int t : targets)
      if (!on_path(t)) throw CircuitError("target not on path");
  }
};

struct FanoutCircuit {
  Circuit circuit;
  int control_mediator = -1;
  std::vector<int> target_mediators;  // distinct, path order
  std::vector<int> zeroed;            // unitarily disentangled members
};

namespace detail {

// CNOT between path positions u and v acting only through nearest-neighbor
// gates, regardless of the state of the skipped qubits.
inline void emit_skip_cnot(Circuit& c, const std::vector<int>& path, int u, int v) {
  if (std::abs(u - v) == 1) {
    c.append(GateOp::cnot(path[static_cast<size_t>(u)], path[static_cast<size_t>(v)]));
    return;
  }
  int w = v > u ? v - 1 : v + 1;  // neighbor of v on the u side
  auto bridge = [&] { c.append(GateOp::cnot(path[static_cast<size_t>(w)], path[static_cast<size_t>(v)])); };
  bridge();
  emit_skip_cnot(c, path, u, w);
  bridge();
  emit_skip_cnot(c, path, u, w);
}

}  // namespace detail

// Long-range fan-out: GHZ over the path qubits skipping every party, reduce
// to the mediators (one GHZ qubit adjacent to each party, shared where
// possible), then local CNOTs and two rounds of classical communication.
inline FanoutCircuit build_fanout_ex(const FanoutSpec& spec, bool error_detection = false) {
  spec.validate();
  const auto& path = spec.path;
  const int len = static_cast<int>(path.size());
  auto pos_of = [&](int q) {
    for (int i = 0; i < len; ++i)
      if (path[static_cast<size_t>(i)] == q) return i;
    throw CircuitError("qubit not on path");
  };

  std::vector<bool> is_party(static_cast<size_t>(len), false);
  is_party[static_cast<size_t>(pos_of(spec.control))] = true;
  for (int t : spec.targets) is_party[static_cast<size_t>(pos_of(t))] = true;

  std::vector<int> members;  // path positions
  for (int i = 0; i < len; ++i)
    if (!is_party[static_cast<size_t>(i)]) members.push_back(i);
  if (members.empty()) throw CircuitError("no intermediate qubits available");

  auto member_neighbors = [&](int party_pos) {
    std::vector<int> out;
    if (party_pos > 0 && !is_party[static_cast<size_t>(party_pos - 1)]) out.push_back(party_pos - 1);
    if (party_pos + 1 < len && !is_party[static_cast<size_t>(party_pos + 1)])
      out.push_back(party_pos + 1);
    return out;
  };

  // Control claims its mediator first; targets then cover themselves
  // preferring mediators shared between two of them.
  const int cpos = pos_of(spec.control);
  auto cn = member_neighbors(cpos);
  if (cn.empty()) throw CircuitError("control has no adjacent mediator available");
  int control_mediator = cn[0];

  std::vector<int> tpos;
  for (int t : spec.targets) tpos.push_back(pos_of(t));
  std::sort(tpos.begin(), tpos.end());
  std::vector<int> target_meds;
  std::vector<bool> covered(static_cast<size_t>(len), false);
  auto candidates = [&](int p) {
    std::vector<int> out;
    for (int m : member_neighbors(p))
      if (m != control_mediator) out.push_back(m);
    return out;
  };
  for (int p : tpos) {
    auto cand = candidates(p);
    if (cand.empty()) throw CircuitError("a target has no adjacent mediator available");
    if (cand.size() == 1 && !covered[static_cast<size_t>(p)]) {
      if (std::find(target_meds.begin(), target_meds.end(), cand[0]) == target_meds.end())
        target_meds.push_back(cand[0]);
      for (int q : {cand[0] - 1, cand[0] + 1})
        if (q >= 0 && q < len) covered[static_cast<size_t>(q)] = true;
    }
  }
  for (int p : tpos) {
    if (covered[static_cast<size_t>(p)]) continue;
    auto cand = candidates(p);
    int best = cand[0], best_cover = -1;
    for (int m : cand) {
      int cover = 0;
      for (int q : {m - 1, m + 1})
        if (q >= 0 && q < len && is_party[static_cast<size_t>(q)] && q != cpos &&
            !covered[static_cast<size_t>(q)])
          ++cover;
      if (cover > best_cover) {
        best_cover = cover;
        best = m;
      }
    }
    target_meds.push_back(best);
    for (int q : {best - 1, best + 1})
      if (q >= 0 && q < len) covered[static_cast<size_t>(q)] = true;
  }
  std::sort(target_meds.begin(), target_meds.end());

  int n_qubits = 1 + *std::max_element(path.begin(), path.end());
  std::vector<int> member_idx_of_pos(static_cast<size_t>(len), -1);
  for (size_t i = 0; i < members.size(); ++i)
    member_idx_of_pos[static_cast<size_t>(members[i])] = static_cast<int>(i);
  auto is_mediator = [&](int pos) {
    return pos == control_mediator ||
           std::find(target_meds.begin(), target_meds.end(), pos) != target_meds.end();
  };

  std::vector<int> zeroed;
  for (int m : members)
    if (!is_mediator(m)) zeroed.push_back(m);

  const int n_target_meds = static_cast<int>(target_meds.size());
  const int n_bits = 1 + n_target_meds + (error_detection ? static_cast<int>(zeroed.size()) : 0);
  Circuit c(n_qubits, n_bits);
  c.metadata.qubit_roles.assign(static_cast<size_t>(n_qubits), "data");
  c.set_qubit_role(spec.control, "control");
  for (int t : spec.targets) c.set_qubit_role(t, "target");
  for (int m : members) c.set_qubit_role(path[static_cast<size_t>(m)], is_mediator(m) ? "mediator" : "flag");
  c.metadata.bit_roles.assign(static_cast<size_t>(n_bits), "locc");

  // Entangle the members with skip connections over the parties.
  c.append(GateOp::h(path[static_cast<size_t>(members[0])]));
  for (size_t i = 0; i + 1 < members.size(); ++i)
    detail::emit_skip_cnot(c, path, members[i], members[i + 1]);
  c.metadata.labels["entangle_end"] = std::to_string(c.ops.size());

  // Disentangle non-mediator members: runs between mediators collapse onto
  // their left mediator anchor; a run before the first mediator collapses
  // onto its right anchor.
  {
    const int m_count = static_cast<int>(members.size());
    int run_start = 0;
    for (int i = 0; i <= m_count; ++i) {
      bool at_end = i == m_count;
      if (!at_end && !is_mediator(members[static_cast<size_t>(i)])) continue;
      int run_end = i - 1;
      if (run_end >= run_start) {
        bool left_anchor = run_start > 0;
        if (left_anchor) {
          for (int t = run_end; t >= run_start; --t)
            detail::emit_skip_cnot(c, path, members[static_cast<size_t>(t - 1)],
                                   members[static_cast<size_t>(t)]);
        } else {
          for (int t = run_start; t <= run_end; ++t)
            detail::emit_skip_cnot(c, path, members[static_cast<size_t>(t + 1)],
                                   members[static_cast<size_t>(t)]);
        }
      }
      run_start = i + 1;
    }
  }
  c.metadata.labels["disentangle_end"] = std::to_string(c.ops.size());

  int next_bit = 0;
  if (error_detection) {
    for (int m : zeroed) {
      c.set_bit_role(next_bit, "flag");
      c.append(GateOp::measure(path[static_cast<size_t>(m)], Basis::Z, next_bit++, true));
    }
  }

  c.append(GateOp::cnot(spec.control, path[static_cast<size_t>(control_mediator)]));
  for (int p : tpos) {
    int med = -1;
    for (int m : {p - 1, p + 1})
      if (m >= 0 && m < len &&
          std::find(target_meds.begin(), target_meds.end(), m) != target_meds.end()) {
        med = m;
        break;
      }
    if (med < 0) throw CircuitError("a target has no adjacent mediator available");
    c.append(GateOp::cnot(path[static_cast<size_t>(med)], path[static_cast<size_t>(p)]));
  }
  int b_h = next_bit;
  c.append(GateOp::measure(path[static_cast<size_t>(control_mediator)], Basis::Z, next_bit++));
  std::vector<int> x_bits;
  for (int m : target_meds) {
    x_bits.push_back(next_bit);
    c.append(GateOp::measure(path[static_cast<size_t>(m)], Basis::X, next_bit++));
  }
  for (int p : tpos) c.append(GateOp::cond_x(path[static_cast<size_t>(p)], {b_h}));
  c.append(GateOp::cond_z(spec.control, x_bits));

  c.metadata.labels["protocol"] = "fan-out";

  FanoutCircuit out;
  out.control_mediator = path[static_cast<size_t>(control_mediator)];
  for (int m : target_meds) out.target_mediators.push_back(path[static_cast<size_t>(m)]);
  for (int m : zeroed) out.zeroed.push_back(path[static_cast<size_t>(m)]);
  out.circuit = std::move(c);
  return out;
}

inline Circuit build_fanout(const FanoutSpec& spec, bool error_detection = false) {
  return build_fanout_ex(spec, error_detection).circuit;
}

}  // namespace qedkit
