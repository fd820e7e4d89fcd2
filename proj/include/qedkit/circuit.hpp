#pragma once

// Circuit intermediate representation with mid-circuit measurement and
// classical feedforward. Circuits are validated eagerly on append and are
// treated as immutable once built; builders hand out values, never references.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedkit {

enum class GateKind {
  H,
  X,
  Y,
  Z,
  S,
  Sdg,
  RZ,
  CNOT,
  SWAP,
  Measure,
  Reset,
  CondX,
  CondZ,
};

enum class Basis { X, Y, Z };

inline const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Y: return "y";
    case GateKind::Z: return "z";
    case GateKind::S: return "s";
    case GateKind::Sdg: return "sdg";
    case GateKind::RZ: return "rz";
    case GateKind::CNOT: return "cnot";
    case GateKind::SWAP: return "swap";
    case GateKind::Measure: return "measure";
    case GateKind::Reset: return "reset";
    case GateKind::CondX: return "cond_x";
    case GateKind::CondZ: return "cond_z";
  }
  return "?";
}

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::X: return "x";
    case Basis::Y: return "y";
    case Basis::Z: return "z";
  }
  return "?";
}

struct GateOp {
  GateKind kind = GateKind::H;
  int q0 = -1;               // single qubit, or control (CNOT) / first (SWAP)
  int q1 = -1;               // target (CNOT) / second (SWAP)
  double angle = 0.0;        // RZ only
  Basis basis = Basis::Z;    // Measure only
  int bit = -1;              // Measure destination
  bool optional_flag = false;  // error-detection measurement, excluded from N_msmt
  std::vector<int> bits;     // CondX/CondZ parity source bits

  static GateOp h(int q) { return {GateKind::H, q}; }
  static GateOp x(int q) { return {GateKind::X, q}; }
  static GateOp y(int q) { return {GateKind::Y, q}; }
  static GateOp z(int q) { return {GateKind::Z, q}; }
  static GateOp s(int q) { return {GateKind::S, q}; }
  static GateOp sdg(int q) { return {GateKind::Sdg, q}; }
  static GateOp rz(int q, double theta) {
    GateOp op{GateKind::RZ, q};
    op.angle = theta;
    return op;
  }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, control, target}; }
  static GateOp swap(int a, int b) { return {GateKind::SWAP, a, b}; }
  static GateOp measure(int q, Basis basis, int bit, bool optional = false) {
    GateOp op{GateKind::Measure, q};
    op.basis = basis;
    op.bit = bit;
    op.optional_flag = optional;
    return op;
  }
  static GateOp reset(int q) { return {GateKind::Reset, q}; }
  static GateOp cond_x(int q, std::vector<int> parity_bits) {
    GateOp op{GateKind::CondX, q};
    op.bits = std::move(parity_bits);
    return op;
  }
  static GateOp cond_z(int q, std::vector<int> parity_bits) {
    GateOp op{GateKind::CondZ, q};
    op.bits = std::move(parity_bits);
    return op;
  }

  bool is_two_qubit() const { return kind == GateKind::CNOT || kind == GateKind::SWAP; }
  bool is_unitary() const {
    return kind != GateKind::Measure && kind != GateKind::Reset && kind != GateKind::CondX &&
           kind != GateKind::CondZ;
  }

  bool operator==(const GateOp& o) const {
    return kind == o.kind && q0 == o.q0 && q1 == o.q1 && angle == o.angle && basis == o.basis &&
           bit == o.bit && optional_flag == o.optional_flag && bits == o.bits;
  }
};

struct CircuitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Free-form labels plus per-qubit / per-bit roles ("control", "target",
// "data", "flag", "ancilla", "mediator"; bits: "data", "flag", "locc", "out").
struct CircuitMetadata {
  std::vector<std::string> qubit_roles;
  std::vector<std::string> bit_roles;
  std::map<std::string, std::string> labels;

  bool operator==(const CircuitMetadata& o) const {
    return qubit_roles == o.qubit_roles && bit_roles == o.bit_roles && labels == o.labels;
  }
};

class Circuit {
 public:
  int n_qubits = 0;
  int n_bits = 0;
  std::vector<GateOp> ops;
  CircuitMetadata metadata;

  Circuit() = default;
  Circuit(int nq, int nb) : n_qubits(nq), n_bits(nb), written_(static_cast<size_t>(nb), false) {
    if (nq < 0 || nb < 0) throw CircuitError("negative qubit/bit count");
    metadata.qubit_roles.assign(static_cast<size_t>(nq), "data");
    metadata.bit_roles.assign(static_cast<size_t>(nb), "data");
  }

  void append(GateOp op) {
    validate(op);
    if (op.kind == GateKind::Measure) written_[static_cast<size_t>(op.bit)] = true;
    ops.push_back(std::move(op));
  }

  bool bit_written(int b) const { return written_.at(static_cast<size_t>(b)); }

  void set_qubit_role(int q, const std::string& role) {
    metadata.qubit_roles.at(static_cast<size_t>(q)) = role;
  }
  void set_bit_role(int b, const std::string& role) {
    metadata.bit_roles.at(static_cast<size_t>(b)) = role;
  }

  std::vector<int> bits_with_role(const std::string& role) const {
    std::vector<int> out;
    for (int b = 0; b < n_bits; ++b)
      if (metadata.bit_roles[static_cast<size_t>(b)] == role) out.push_back(b);
    return out;
  }
  std::vector<int> qubits_with_role(const std::string& role) const {
    std::vector<int> out;
    for (int q = 0; q < n_qubits; ++q)
      if (metadata.qubit_roles[static_cast<size_t>(q)] == role) out.push_back(q);
    return out;
  }

  bool operator==(const Circuit& o) const {
    return n_qubits == o.n_qubits && n_bits == o.n_bits && ops == o.ops && metadata == o.metadata;
  }

 private:
  std::vector<bool> written_;

  void check_qubit(int q) const {
    if (q < 0 || q >= n_qubits) throw CircuitError("qubit index out of range");
  }
  void check_bit(int b) const {
    if (b < 0 || b >= n_bits) throw CircuitError("classical bit index out of range");
  }

  void validate(const GateOp& op) const {
    switch (op.kind) {
      case GateKind::CNOT:
      case GateKind::SWAP:
        check_qubit(op.q0);
        check_qubit(op.q1);
        if (op.q0 == op.q1) throw CircuitError("distinct qubits required");
        break;
      case GateKind::Measure:
        check_qubit(op.q0);
        check_bit(op.bit);
        if (written_[static_cast<size_t>(op.bit)])
          throw CircuitError("measurement writes an already-written bit");
        break;
      case GateKind::CondX:
      case GateKind::CondZ:
        check_qubit(op.q0);
        if (op.bits.empty()) throw CircuitError("empty parity set");
        for (int b : op.bits) {
          check_bit(b);
          if (!written_[static_cast<size_t>(b)])
            throw CircuitError("conditional references unwritten bit");
        }
        break;
      default:
        check_qubit(op.q0);
        break;
    }
  }
};

// Resource counters matching the two-qubit-gate depth convention: single-qubit
// gates and measurements contribute zero depth, and optional error-detection
// measurements are not counted in n_measure.
struct CircuitStats {
  int two_qubit_depth = 0;
  int n_cnot = 0;
  int n_swap = 0;
  int n_measure = 0;           // mandatory measurements only
  int n_measure_optional = 0;  // tagged error-detection flags

  bool operator==(const CircuitStats&) const = default;
};

// Greedy left-alignment of the two-qubit gates into layers. Returns the layer
// index (1-based) of each op; non-two-qubit ops get 0.
inline std::vector<int> two_qubit_layers(const Circuit& c, int* depth_out = nullptr) {
  std::vector<int> layer_of(c.ops.size(), 0);
  std::vector<int> last(static_cast<size_t>(c.n_qubits), 0);
  int depth = 0;
  for (size_t i = 0; i < c.ops.size(); ++i) {
    const GateOp& op = c.ops[i];
    if (!op.is_two_qubit()) continue;
    int l = 1 + std::max(last[static_cast<size_t>(op.q0)], last[static_cast<size_t>(op.q1)]);
    last[static_cast<size_t>(op.q0)] = l;
    last[static_cast<size_t>(op.q1)] = l;
    layer_of[i] = l;
    depth = std::max(depth, l);
  }
  if (depth_out) *depth_out = depth;
  return layer_of;
}

inline CircuitStats stats(const Circuit& c) {
  CircuitStats s;
  two_qubit_layers(c, &s.two_qubit_depth);
  for (const GateOp& op : c.ops) {
    switch (op.kind) {
      case GateKind::CNOT: ++s.n_cnot; break;
      case GateKind::SWAP: ++s.n_swap; break;
      case GateKind::Measure:
        if (op.optional_flag)
          ++s.n_measure_optional;
        else
          ++s.n_measure;
        break;
      default: break;
    }
  }
  return s;
}

// Full dependency-respecting layering: qubits and classical bits are the
// resources; ops within one layer act on disjoint resources and commute.
inline std::vector<std::vector<size_t>> layered_schedule(const Circuit& c) {
  std::vector<int> qubit_last(static_cast<size_t>(c.n_qubits), 0);
  std::vector<int> bit_last(static_cast<size_t>(c.n_bits), 0);
  std::vector<std::vector<size_t>> layers;
  for (size_t i = 0; i < c.ops.size(); ++i) {
    const GateOp& op = c.ops[i];
    int l = 1 + qubit_last[static_cast<size_t>(op.q0)];
    if (op.q1 >= 0) l = std::max(l, 1 + qubit_last[static_cast<size_t>(op.q1)]);
    if (op.bit >= 0) l = std::max(l, 1 + bit_last[static_cast<size_t>(op.bit)]);
    for (int b : op.bits) l = std::max(l, 1 + bit_last[static_cast<size_t>(b)]);
    qubit_last[static_cast<size_t>(op.q0)] = l;
    if (op.q1 >= 0) qubit_last[static_cast<size_t>(op.q1)] = l;
    if (op.bit >= 0) bit_last[static_cast<size_t>(op.bit)] = l;
    for (int b : op.bits) bit_last[static_cast<size_t>(b)] = l;
    if (static_cast<size_t>(l) > layers.size()) layers.resize(static_cast<size_t>(l));
    layers[static_cast<size_t>(l - 1)].push_back(i);
  }
  return layers;
}

inline GateOp inverse_op(const GateOp& op) {
  if (!op.is_unitary()) throw CircuitError("non-unitary op has no inverse");
  GateOp inv = op;
  switch (op.kind) {
    case GateKind::S: inv.kind = GateKind::Sdg; break;
    case GateKind::Sdg: inv.kind = GateKind::S; break;
    case GateKind::RZ: inv.angle = -op.angle; break;
    default: break;  // H, X, Y, Z, CNOT, SWAP are self-inverse
  }
  return inv;
}

inline Circuit inverse_unitary(const Circuit& c) {
  Circuit inv(c.n_qubits, c.n_bits);
  inv.metadata = c.metadata;
  for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it) inv.append(inverse_op(*it));
  return inv;
}

// Appends `src` onto `dst` with qubit indices remapped through `qubit_map`
// (size src.n_qubits) and bit indices shifted by `bit_offset`.
inline void append_circuit(Circuit& dst, const Circuit& src, const std::vector<int>& qubit_map,
                           int bit_offset) {
  if (qubit_map.size() != static_cast<size_t>(src.n_qubits))
    throw CircuitError("qubit map size mismatch");
  for (GateOp op : src.ops) {
    op.q0 = qubit_map.at(static_cast<size_t>(op.q0));
    if (op.q1 >= 0) op.q1 = qubit_map.at(static_cast<size_t>(op.q1));
    if (op.bit >= 0) op.bit += bit_offset;
    for (int& b : op.bits) b += bit_offset;
    dst.append(std::move(op));
  }
}

}  // namespace qedkit
