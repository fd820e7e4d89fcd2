#pragma once

// JSON serialization mirroring the Circuit fields bit-exactly.

#include <json.hpp>

#include "qedkit/circuit.hpp"

namespace qedkit {

inline nlohmann::json to_json(const GateOp& op) {
  nlohmann::json j;
  j["kind"] = to_string(op.kind);
  j["q0"] = op.q0;
  switch (op.kind) {
    case GateKind::CNOT:
    case GateKind::SWAP:
      j["q1"] = op.q1;
      break;
    case GateKind::RZ:
      j["angle"] = op.angle;
      break;
    case GateKind::Measure:
      j["basis"] = to_string(op.basis);
      j["bit"] = op.bit;
      if (op.optional_flag) j["optional"] = true;
      break;
    case GateKind::CondX:
    case GateKind::CondZ:
      j["bits"] = op.bits;
      break;
    default:
      break;
  }
  return j;
}

inline GateOp gate_op_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int q0 = j.at("q0").get<int>();
  if (kind == "h") return GateOp::h(q0);
  if (kind == "x") return GateOp::x(q0);
  if (kind == "y") return GateOp::y(q0);
  if (kind == "z") return GateOp::z(q0);
  if (kind == "s") return GateOp::s(q0);
  if (kind == "sdg") return GateOp::sdg(q0);
  if (kind == "rz") return GateOp::rz(q0, j.at("angle").get<double>());
  if (kind == "cnot") return GateOp::cnot(q0, j.at("q1").get<int>());
  if (kind == "swap") return GateOp::swap(q0, j.at("q1").get<int>());
  if (kind == "reset") return GateOp::reset(q0);
  if (kind == "measure") {
    const std::string b = j.at("basis").get<std::string>();
    Basis basis = b == "x" ? Basis::X : b == "y" ? Basis::Y : Basis::Z;
    return GateOp::measure(q0, basis, j.at("bit").get<int>(), j.value("optional", false));
  }
  if (kind == "cond_x") return GateOp::cond_x(q0, j.at("bits").get<std::vector<int>>());
  if (kind == "cond_z") return GateOp::cond_z(q0, j.at("bits").get<std::vector<int>>());
  throw CircuitError("unknown gate kind in JSON: " + kind);
}

inline nlohmann::json to_json(const Circuit& c) {
  nlohmann::json j;
  j["n_qubits"] = c.n_qubits;
  j["n_bits"] = c.n_bits;
  j["ops"] = nlohmann::json::array();
  for (const GateOp& op : c.ops) j["ops"].push_back(to_json(op));
  j["metadata"]["qubit_roles"] = c.metadata.qubit_roles;
  j["metadata"]["bit_roles"] = c.metadata.bit_roles;
  j["metadata"]["labels"] = c.metadata.labels;
  return j;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c(j.at("n_qubits").get<int>(), j.at("n_bits").get<int>());
  for (const auto& jop : j.at("ops")) c.append(gate_op_from_json(jop));
  if (j.contains("metadata")) {
    const auto& m = j.at("metadata");
    if (m.contains("qubit_roles")) c.metadata.qubit_roles = m.at("qubit_roles").get<std::vector<std::string>>();
    if (m.contains("bit_roles")) c.metadata.bit_roles = m.at("bit_roles").get<std::vector<std::string>>();
    if (m.contains("labels")) c.metadata.labels = m.at("labels").get<std::map<std::string, std::string>>();
  }
  return c;
}

}  // namespace qedkit
