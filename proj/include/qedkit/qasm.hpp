#pragma once

// OpenQASM 3 export/import for the supported gate subset.
//
// X/Y-basis measurements are lowered to the fixed convention (X: h then
// measure; Y: sdg, h, then measure) and re-fused on import, so
// export-then-import is the identity on circuits built from this IR.
// Conditionals are rendered as if-statements on the XOR of classical bits.
// Optional (error-detection) measurements carry a trailing `// optional`
// marker that the importer understands.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "qedkit/circuit.hpp"

namespace qedkit {

namespace detail {

inline std::string format_angle(double a) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", a);
  return buf;
}

}  // namespace detail

inline std::string export_qasm(const Circuit& c) {
  std::ostringstream out;
  out << "OPENQASM 3.0;\n";
  out << "include \"stdgates.inc\";\n";
  out << "qubit[" << c.n_qubits << "] q;\n";
  out << "bit[" << c.n_bits << "] c;\n";
  for (const GateOp& op : c.ops) {
    switch (op.kind) {
      case GateKind::H: out << "h q[" << op.q0 << "];\n"; break;
      case GateKind::X: out << "x q[" << op.q0 << "];\n"; break;
      case GateKind::Y: out << "y q[" << op.q0 << "];\n"; break;
      case GateKind::Z: out << "z q[" << op.q0 << "];\n"; break;
      case GateKind::S: out << "s q[" << op.q0 << "];\n"; break;
      case GateKind::Sdg: out << "sdg q[" << op.q0 << "];\n"; break;
      case GateKind::RZ:
        out << "rz(" << detail::format_angle(op.angle) << ") q[" << op.q0 << "];\n";
        break;
      case GateKind::CNOT: out << "cx q[" << op.q0 << "], q[" << op.q1 << "];\n"; break;
      case GateKind::SWAP: out << "swap q[" << op.q0 << "], q[" << op.q1 << "];\n"; break;
      case GateKind::Reset: out << "reset q[" << op.q0 << "];\n"; break;
      case GateKind::Measure: {
        if (op.basis == Basis::Y) out << "sdg q[" << op.q0 << "];\nh q[" << op.q0 << "];\n";
        if (op.basis == Basis::X) out << "h q[" << op.q0 << "];\n";
        out << "c[" << op.bit << "] = measure q[" << op.q0 << "];";
        if (op.optional_flag) out << " // optional";
        out << "\n";
        break;
      }
      case GateKind::CondX:
      case GateKind::CondZ: {
        out << "if ((";
        for (size_t i = 0; i < op.bits.size(); ++i) {
          if (i) out << " ^ ";
          out << "c[" << op.bits[i] << "]";
        }
        out << ") == 1) { " << (op.kind == GateKind::CondX ? "x" : "z") << " q[" << op.q0
            << "]; }\n";
        break;
      }
    }
  }
  return out.str();
}

namespace detail {

struct QasmLine {
  std::string text;
  bool optional = false;
};

inline std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool parse_index(const std::string& s, const std::string& prefix, size_t& pos, int& out) {
  size_t p = s.find(prefix + "[", pos);
  if (p == std::string::npos) return false;
  p += prefix.size() + 1;
  size_t e = s.find(']', p);
  if (e == std::string::npos) return false;
  out = std::stoi(s.substr(p, e - p));
  pos = e + 1;
  return true;
}

}  // namespace detail

inline Circuit import_qasm(const std::string& text) {
  using detail::parse_index;
  using detail::strip;

  std::vector<detail::QasmLine> lines;
  {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
      bool optional = raw.find("// optional") != std::string::npos;
      size_t comment = raw.find("//");
      if (comment != std::string::npos) raw = raw.substr(0, comment);
      std::string s = strip(raw);
      if (s.empty()) continue;
      lines.push_back({s, optional});
    }
  }

  int n_qubits = -1, n_bits = -1;

  // Fuses [sdg q; h q; measure] into a Y-basis measurement and [h q; measure]
  // into an X-basis measurement, per the fixed basis-change convention.
  auto emit = [](Circuit& c, GateOp op) {
    if (op.kind == GateKind::Measure && op.basis == Basis::Z) {
      size_t n = c.ops.size();
      if (n >= 1 && c.ops[n - 1].kind == GateKind::H && c.ops[n - 1].q0 == op.q0) {
        bool y = n >= 2 && c.ops[n - 2].kind == GateKind::Sdg && c.ops[n - 2].q0 == op.q0;
        Circuit rebuilt(c.n_qubits, c.n_bits);
        rebuilt.metadata = c.metadata;
        for (size_t k = 0; k < n - (y ? 2 : 1); ++k) rebuilt.append(c.ops[k]);
        rebuilt.append(GateOp::measure(op.q0, y ? Basis::Y : Basis::X, op.bit, op.optional_flag));
        c = std::move(rebuilt);
        return;
      }
    }
    c.append(std::move(op));
  };

  Circuit circuit;
  bool header_done = false;
  for (const auto& line : lines) {
    const std::string& s = line.text;
    if (s.rfind("OPENQASM", 0) == 0 || s.rfind("include", 0) == 0) continue;
    if (s.rfind("qubit[", 0) == 0) {
      n_qubits = std::stoi(s.substr(6, s.find(']') - 6));
      continue;
    }
    if (s.rfind("bit[", 0) == 0) {
      n_bits = std::stoi(s.substr(4, s.find(']') - 4));
      continue;
    }
    if (!header_done) {
      if (n_qubits < 0 || n_bits < 0) throw CircuitError("qasm: missing register declarations");
      circuit = Circuit(n_qubits, n_bits);
      header_done = true;
    }

    size_t pos = 0;
    int q0 = -1, q1 = -1, bit = -1;
    if (s.rfind("if", 0) == 0) {
      std::vector<int> bits;
      size_t p = 0;
      int b;
      while (parse_index(s, "c", p, b)) bits.push_back(b);
      size_t body = s.find('{');
      if (body == std::string::npos) throw CircuitError("qasm: malformed if");
      std::string inner = strip(s.substr(body + 1, s.rfind('}') - body - 1));
      size_t ip = 0;
      if (!parse_index(inner, "q", ip, q0)) throw CircuitError("qasm: malformed if body");
      if (inner[0] == 'x')
        emit(circuit, GateOp::cond_x(q0, bits));
      else if (inner[0] == 'z')
        emit(circuit, GateOp::cond_z(q0, bits));
      else
        throw CircuitError("qasm: unsupported conditional gate");
      continue;
    }
    if (s.find("= measure") != std::string::npos) {
      parse_index(s, "c", pos, bit);
      parse_index(s, "q", pos, q0);
      emit(circuit, GateOp::measure(q0, Basis::Z, bit, line.optional));
      continue;
    }

    std::string name = s.substr(0, s.find_first_of(" ("));
    if (name == "rz") {
      size_t open = s.find('('), close = s.find(')');
      double angle = std::stod(s.substr(open + 1, close - open - 1));
      parse_index(s, "q", pos, q0);
      emit(circuit, GateOp::rz(q0, angle));
    } else if (name == "cx" || name == "swap") {
      parse_index(s, "q", pos, q0);
      parse_index(s, "q", pos, q1);
      emit(circuit, name == "cx" ? GateOp::cnot(q0, q1) : GateOp::swap(q0, q1));
    } else {
      parse_index(s, "q", pos, q0);
      if (name == "h") emit(circuit, GateOp::h(q0));
      else if (name == "x") emit(circuit, GateOp::x(q0));
      else if (name == "y") emit(circuit, GateOp::y(q0));
      else if (name == "z") emit(circuit, GateOp::z(q0));
      else if (name == "s") emit(circuit, GateOp::s(q0));
      else if (name == "sdg") emit(circuit, GateOp::sdg(q0));
      else if (name == "reset") emit(circuit, GateOp::reset(q0));
      else throw CircuitError("qasm: unsupported statement: " + s);
    }
  }
  if (!header_done) {
    if (n_qubits < 0 || n_bits < 0) throw CircuitError("qasm: missing register declarations");
    circuit = Circuit(n_qubits, n_bits);
  }
  return circuit;
}

}  // namespace qedkit
