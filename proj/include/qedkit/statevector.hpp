#pragma once

// Dense state vector with in-place gate kernels. Qubit q maps to bit q of the
// amplitude index (little-endian), so basis state |q_{n-1} ... q_1 q_0> lives
// at index sum q_i 2^i.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qedkit {

using cplx = std::complex<double>;

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class StateVector {
 public:
  explicit StateVector(int n_qubits) : n_(n_qubits), amps_(size_t{1} << n_qubits, cplx{0, 0}) {
    if (n_qubits < 0 || n_qubits > 30) throw SimError("qubit count out of range");
    amps_[0] = 1.0;
  }

  int n_qubits() const { return n_; }
  size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }

  double norm_sq() const {
    double s = 0;
    for (const cplx& a : amps_) s += std::norm(a);
    return s;
  }

  void apply_1q(int q, const cplx& u00, const cplx& u01, const cplx& u10, const cplx& u11) {
    const size_t step = size_t{1} << q;
    for (size_t base = 0; base < amps_.size(); base += 2 * step) {
      for (size_t i = base; i < base + step; ++i) {
        cplx a0 = amps_[i], a1 = amps_[i + step];
        amps_[i] = u00 * a0 + u01 * a1;
        amps_[i + step] = u10 * a0 + u11 * a1;
      }
    }
  }

  void h(int q) {
    constexpr double r = 0.70710678118654752440;
    apply_1q(q, r, r, r, -r);
  }
  void x(int q) {
    const size_t step = size_t{1} << q;
    for (size_t base = 0; base < amps_.size(); base += 2 * step)
      for (size_t i = base; i < base + step; ++i) std::swap(amps_[i], amps_[i + step]);
  }
  void y(int q) { apply_1q(q, 0, cplx{0, -1}, cplx{0, 1}, 0); }
  void z(int q) { phase_if_one(q, -1.0); }
  void s(int q) { phase_if_one(q, cplx{0, 1}); }
  void sdg(int q) { phase_if_one(q, cplx{0, -1}); }
  void rz(int q, double theta) {
    const cplx e0 = std::polar(1.0, -theta / 2), e1 = std::polar(1.0, theta / 2);
    const size_t step = size_t{1} << q;
    for (size_t base = 0; base < amps_.size(); base += 2 * step) {
      for (size_t i = base; i < base + step; ++i) {
        amps_[i] *= e0;
        amps_[i + step] *= e1;
      }
    }
  }

  void cnot(int control, int target) {
    const size_t cm = size_t{1} << control, tm = size_t{1} << target;
    for (size_t i = 0; i < amps_.size(); ++i)
      if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
  }

  void swap(int a, int b) {
    const size_t am = size_t{1} << a, bm = size_t{1} << b;
    for (size_t i = 0; i < amps_.size(); ++i)
      if ((i & am) && !(i & bm)) std::swap(amps_[i], amps_[(i & ~am) | bm]);
  }

  // Pauli by code: 1 = X, 2 = Y, 3 = Z.
  void pauli(int q, int code) {
    if (code == 1) x(q);
    else if (code == 2) y(q);
    else if (code == 3) z(q);
  }

  double prob_one(int q) const {
    const size_t m = size_t{1} << q;
    double p = 0;
    for (size_t i = 0; i < amps_.size(); ++i)
      if (i & m) p += std::norm(amps_[i]);
    return p;
  }

  // Projects qubit q onto |outcome> and renormalizes.
  void collapse(int q, int outcome, double prob) {
    const size_t m = size_t{1} << q;
    const double scale = 1.0 / std::sqrt(prob);
    for (size_t i = 0; i < amps_.size(); ++i) {
      bool one = (i & m) != 0;
      if (one == (outcome == 1))
        amps_[i] *= scale;
      else
        amps_[i] = 0;
    }
  }

  int measure_z(int q, std::mt19937_64& rng) {
    double p1 = prob_one(q);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int outcome = u(rng) < p1 ? 1 : 0;
    collapse(q, outcome, outcome ? p1 : 1.0 - p1);
    return outcome;
  }

  // Trajectory amplitude damping: jump |1> -> |0> with probability
  // gamma * P(1), otherwise the no-jump Kraus.
  void amplitude_damp(int q, double gamma, std::mt19937_64& rng) {
    if (gamma <= 0) return;
    double p1 = prob_one(q);
    double p_jump = gamma * p1;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const size_t m = size_t{1} << q;
    if (u(rng) < p_jump) {
      // K1 = sqrt(gamma) |0><1|, renormalized
      const double scale = 1.0 / std::sqrt(p1);
      for (size_t i = 0; i < amps_.size(); ++i) {
        if (i & m) {
          amps_[i & ~m] = amps_[i] * scale;
          amps_[i] = 0;
        }
      }
    } else {
      // K0 = diag(1, sqrt(1-gamma)), renormalized
      const double scale = std::sqrt(1.0 - gamma) / std::sqrt(1.0 - p_jump);
      const double scale0 = 1.0 / std::sqrt(1.0 - p_jump);
      for (size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & m) ? scale : scale0;
    }
  }

  // Expectation of a Z string over the given qubits.
  double expectation_zz(const std::vector<int>& qubits) const {
    size_t mask = 0;
    for (int q : qubits) mask |= size_t{1} << q;
    double e = 0;
    for (size_t i = 0; i < amps_.size(); ++i) {
      double p = std::norm(amps_[i]);
      e += (std::popcount(i & mask) % 2 == 0) ? p : -p;
    }
    return e;
  }

 private:
  int n_;
  std::vector<cplx> amps_;

  void phase_if_one(int q, cplx phase) {
    const size_t m = size_t{1} << q;
    for (size_t i = 0; i < amps_.size(); ++i)
      if (i & m) amps_[i] *= phase;
  }
};

}  // namespace qedkit
