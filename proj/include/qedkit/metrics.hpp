#pragma once

// Verification metrics: MQC coherence/population/fidelity, Hellinger
// fidelity, Monte Carlo process certification estimates, and two-qubit state
// tomography with PSD projection.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qedkit/counts.hpp"

namespace qedkit {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Probability of the all-0 plus the all-1 string: the population P of a GHZ
// state measured in Z (ideal state gives 1).
inline double population(const Distribution& data_dist, int n) {
  if (data_dist.empty()) throw MetricsError("population of empty distribution");
  double p = 0;
  auto it0 = data_dist.find(std::string(static_cast<size_t>(n), '0'));
  auto it1 = data_dist.find(std::string(static_cast<size_t>(n), '1'));
  if (it0 != data_dist.end()) p += it0->second;
  if (it1 != data_dist.end()) p += it1->second;
  return p;
}

inline double population(const Counts& data_counts) {
  if (data_counts.n_shots == 0) throw MetricsError("population of empty counts");
  return population(data_counts.distribution(), data_counts.n_positions());
}

// The variant with a 1/2 prefactor (ideal state gives 1/2), kept as a
// separate accessor.
inline double population_halved(const Distribution& d, int n) { return 0.5 * population(d, n); }

struct ParityOscillation {
  std::vector<double> phases;  // phi_j = pi j/(n+1), j = 0..2n+1
  std::vector<double> values;  // estimated overlap signal S~ at each phase
  int n = 0;

  void validate() const {
    if (static_cast<int>(phases.size()) != 2 * n + 2 || phases.size() != values.size())
      throw MetricsError("parity oscillation needs 2n+2 samples");
    for (size_t j = 0; j < phases.size(); ++j) {
      double expect = std::numbers::pi * static_cast<double>(j) / (n + 1);
      if (std::abs(phases[j] - expect) > 1e-9)
        throw MetricsError("phases must sit on the Nyquist grid pi*j/(n+1)");
    }
  }
};

struct CoherenceResult {
  double coherence = 0;             // C = 2 sqrt(max(I_n, 0))
  double i_n_raw = 0;               // n-th mode before clipping
  std::vector<double> modes;        // I_q for q = -n..n (index q+n)
};

// Inverse discrete Fourier transform of the parity oscillation:
// I_q = Re( sum_j exp(i q phi_j) S~_j ) / (2n+2).
inline CoherenceResult coherence(const ParityOscillation& osc) {
  osc.validate();
  const int n = osc.n;
  CoherenceResult out;
  out.modes.assign(static_cast<size_t>(2 * n + 1), 0.0);
  for (int q = -n; q <= n; ++q) {
    std::complex<double> acc{0, 0};
    for (size_t j = 0; j < osc.phases.size(); ++j)
      acc += std::polar(1.0, q * osc.phases[j]) * osc.values[j];
    out.modes[static_cast<size_t>(q + n)] = acc.real() / static_cast<double>(2 * n + 2);
  }
  out.i_n_raw = out.modes[static_cast<size_t>(2 * n)];
  out.coherence = 2.0 * std::sqrt(std::max(out.i_n_raw, 0.0));
  return out;
}

struct MqcResult {
  double coherence = 0;
  double population = 0;
  double fidelity = 0;
  bool gme = false;  // genuine multipartite entanglement: strictly F > 1/2
};

inline MqcResult mqc_fidelity(double c, double p) {
  MqcResult r;
  r.coherence = std::clamp(c, 0.0, 1.0);
  r.population = std::clamp(p, 0.0, 1.0);
  r.fidelity = 0.5 * (r.coherence + r.population);
  r.gme = r.fidelity > 0.5;
  return r;
}

// Squared Bhattacharyya coefficient between two normalized distributions.
inline double hellinger_fidelity(const Distribution& p, const Distribution& q) {
  auto total = [](const Distribution& d) {
    double s = 0;
    for (auto& [k, v] : d) s += v;
    return s;
  };
  if (std::abs(total(p) - 1.0) > 1e-9 || std::abs(total(q) - 1.0) > 1e-9)
    throw MetricsError("hellinger_fidelity expects normalized distributions");
  double bc = 0;
  for (const auto& [s, pv] : p) {
    auto it = q.find(s);
    if (it != q.end() && pv > 0 && it->second > 0) bc += std::sqrt(pv * it->second);
  }
  return bc * bc;
}

inline Distribution ideal_ghz_distribution(int n) {
  return {{std::string(static_cast<size_t>(n), '0'), 0.5},
          {std::string(static_cast<size_t>(n), '1'), 0.5}};
}

struct TermEstimate {
  int ideal_sign = 1;
  double estimate = 0;  // signed expectation of the output Pauli
};

struct GateFidelityResult {
  double f_process = 0;      // clipped to [0,1]
  double f_process_raw = 0;  // as estimated
  double f_gate = 0;         // (d F_process + 1)/(d+1), d = 4
  std::vector<double> term_values;
};

// Process fidelity from the 16 non-vanishing Pauli terms:
// F = sum_K rho_K sigma_K / d^2 with rho_K the ideal signs and d = 4.
inline GateFidelityResult gate_fidelity(const std::vector<TermEstimate>& terms) {
  if (terms.size() != 16) throw MetricsError("expected 16 certification terms");
  GateFidelityResult r;
  double acc = 0;
  for (const TermEstimate& t : terms) {
    acc += t.ideal_sign * t.estimate;
    r.term_values.push_back(t.estimate);
  }
  r.f_process_raw = acc / 16.0;
  r.f_process = std::clamp(r.f_process_raw, 0.0, 1.0);
  constexpr double d = 4.0;
  r.f_gate = (d * r.f_process + 1.0) / (d + 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// Two-qubit state tomography
// ---------------------------------------------------------------------------

struct TomographyResult {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  double fidelity = 0;     // <Phi+| rho |Phi+>
  double purity = 0;       // Tr rho^2
  double concurrence = 0;
};

namespace detail {

inline Eigen::Matrix2cd pauli_matrix(char p) {
  Eigen::Matrix2cd m;
  const std::complex<double> i{0, 1};
  switch (p) {
    case 'I': m << 1, 0, 0, 1; return m;
    case 'X': m << 0, 1, 1, 0; return m;
    case 'Y': m << 0.0 * i, -i, i, 0.0 * i; return m;
    case 'Z': m << 1, 0, 0, -1; return m;
  }
  throw MetricsError("unknown Pauli letter");
}

inline Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& first, const Eigen::Matrix2cd& second) {
  // First qubit indexes bit 0: basis |q1 q0>.
  Eigen::Matrix4cd out;
  for (int r1 = 0; r1 < 2; ++r1)
    for (int r0 = 0; r0 < 2; ++r0)
      for (int c1 = 0; c1 < 2; ++c1)
        for (int c0 = 0; c0 < 2; ++c0)
          out(2 * r1 + r0, 2 * c1 + c0) = second(r1, c1) * first(r0, c0);
  return out;
}

}  // namespace detail

// Truncate negative eigenvalues and rescale the positive ones to unit trace.
inline Eigen::Matrix4cd project_psd(const Eigen::Matrix4cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  Eigen::Vector4d vals = es.eigenvalues().cwiseMax(0.0);
  double total = vals.sum();
  if (total <= 0) throw MetricsError("tomography estimate has no positive part");
  vals /= total;
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

inline double two_qubit_concurrence(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd yy = detail::kron2(detail::pauli_matrix('Y'), detail::pauli_matrix('Y'));
  Eigen::Matrix4cd r = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(r);
  std::vector<double> lambdas;
  for (int i = 0; i < 4; ++i)
    lambdas.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  return std::max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]);
}

// Counts for each of the 9 bases in battery order (XX, XY, ..., ZZ), reduced
// to the two outcome bits (first qubit leftmost).
inline TomographyResult tomography(const std::vector<Counts>& basis_counts) {
  if (basis_counts.size() != 9) throw MetricsError("expected 9 basis count sets");
  const char letters[3] = {'X', 'Y', 'Z'};

  // Pairwise expectations <AB> from the matching basis; singles <AI>, <IB>
  // pooled over the three compatible bases.
  double e2[3][3];
  double e1_first[3] = {0, 0, 0}, e1_second[3] = {0, 0, 0};
  std::uint64_t n1_first[3] = {0, 0, 0}, n1_second[3] = {0, 0, 0};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Counts& counts = basis_counts[static_cast<size_t>(3 * a + b)];
      if (counts.n_shots == 0) throw MetricsError("empty counts for a tomography basis");
      double acc = 0;
      for (const auto& [s, c] : counts.counts) {
        int va = s[0] == '1' ? -1 : 1;
        int vb = s[1] == '1' ? -1 : 1;
        acc += static_cast<double>(c) * va * vb;
        e1_first[a] += static_cast<double>(c) * va;
        e1_second[b] += static_cast<double>(c) * vb;
      }
      e2[a][b] = acc / static_cast<double>(counts.n_shots);
      n1_first[a] += counts.n_shots;
      n1_second[b] += counts.n_shots;
    }
  for (int a = 0; a < 3; ++a) {
    e1_first[a] /= static_cast<double>(n1_first[a]);
    e1_second[a] /= static_cast<double>(n1_second[a]);
  }

  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Identity() * 0.25;
  for (int a = 0; a < 3; ++a) {
    rho += 0.25 * e1_first[a] *
           detail::kron2(detail::pauli_matrix(letters[a]), detail::pauli_matrix('I'));
    rho += 0.25 * e1_second[a] *
           detail::kron2(detail::pauli_matrix('I'), detail::pauli_matrix(letters[a]));
    for (int b = 0; b < 3; ++b)
      rho += 0.25 * e2[a][b] *
             detail::kron2(detail::pauli_matrix(letters[a]), detail::pauli_matrix(letters[b]));
  }
  rho = 0.5 * (rho + rho.adjoint().eval());

  TomographyResult out;
  out.rho = project_psd(rho);
  Eigen::Vector4cd phi;
  phi << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  out.fidelity = (phi.adjoint() * out.rho * phi)(0).real();
  out.purity = (out.rho * out.rho).trace().real();
  out.concurrence = two_qubit_concurrence(out.rho);
  return out;
}

}  // namespace qedkit
