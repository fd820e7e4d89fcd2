#pragma once

// Noise model for the trajectory sampler and the exact oracle.
//
// Stochastic channels: uniform depolarizing after every single-qubit gate (p1)
// and after every CNOT (p2); a SWAP counts as three back-to-back two-qubit
// depolarizing events, matching its three-CNOT realization. Amplitude damping
// acts on every qubit once per completed two-qubit layer (gamma_idle) and on
// the measured qubit just before readout (gamma_meas). Readout confusion
// flips recorded bits (eps01: 1 read as 0, eps10: 0 read as 1); conditionals
// consume the recorded, possibly corrupted bits. The coherent component is a
// deterministic RZ(coherent_z) on both qubits after each CNOT; it models the
// residual coherent error that the suppression pipeline removes, so
// suppression_on forces it to zero.

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace qedkit {

struct NoiseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;
  double gamma_idle = 0.0;
  double gamma_meas = 0.0;
  double eps01 = 0.0;
  double eps10 = 0.0;
  double coherent_z = 0.0;
  bool suppression_on = false;

  double effective_coherent_z() const { return suppression_on ? 0.0 : coherent_z; }

  bool is_noiseless() const {
    return p1 == 0 && p2 == 0 && gamma_idle == 0 && gamma_meas == 0 && eps01 == 0 && eps10 == 0 &&
           effective_coherent_z() == 0;
  }

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (p < 0.0 || p > 1.0) throw NoiseError(std::string(name) + " must be in [0,1]");
    };
    prob(p1, "p1");
    prob(p2, "p2");
    prob(gamma_idle, "gamma_idle");
    prob(gamma_meas, "gamma_meas");
    prob(eps01, "eps01");
    prob(eps10, "eps10");
    if (!std::isfinite(coherent_z)) throw NoiseError("coherent_z must be finite");
  }

  bool operator==(const NoiseModel&) const = default;
};

inline nlohmann::json to_json(const NoiseModel& m) {
  return {{"p1", m.p1},
          {"p2", m.p2},
          {"gamma_idle", m.gamma_idle},
          {"gamma_meas", m.gamma_meas},
          {"eps01", m.eps01},
          {"eps10", m.eps10},
          {"coherent_z", m.coherent_z},
          {"suppression_on", m.suppression_on}};
}

inline NoiseModel noise_from_json(const nlohmann::json& j) {
  NoiseModel m;
  m.p1 = j.value("p1", 0.0);
  m.p2 = j.value("p2", 0.0);
  m.gamma_idle = j.value("gamma_idle", 0.0);
  m.gamma_meas = j.value("gamma_meas", 0.0);
  m.eps01 = j.value("eps01", 0.0);
  m.eps10 = j.value("eps10", 0.0);
  m.coherent_z = j.value("coherent_z", 0.0);
  m.suppression_on = j.value("suppression_on", false);
  m.validate();
  return m;
}

// Shipped presets. "ibm-like" keeps the readout error 4x the two-qubit error;
// "suppression-off" is the same device with its coherent component exposed.
// "dephasing" carries only the coherent Z term, so parity-check flags stay
// silent under it.
inline NoiseModel noise_preset(const std::string& name) {
  NoiseModel m;
  if (name == "noiseless") return m;
  if (name == "bitflip") {
    m.p1 = 0.001;
    m.p2 = 0.008;
    m.gamma_idle = 0.002;
    m.gamma_meas = 0.004;
    m.suppression_on = true;
    return m;
  }
  if (name == "dephasing") {
    m.coherent_z = 0.1;
    return m;
  }
  if (name == "ibm-like") {
    m.p1 = 0.0005;
    m.p2 = 0.005;
    m.gamma_idle = 0.001;
    m.gamma_meas = 0.003;
    m.eps01 = 0.02;
    m.eps10 = 0.02;
    m.coherent_z = 0.12;
    m.suppression_on = true;
    return m;
  }
  if (name == "suppression-off") {
    m = noise_preset("ibm-like");
    m.suppression_on = false;
    return m;
  }
  throw NoiseError("unknown noise preset: " + name);
}

}  // namespace qedkit
