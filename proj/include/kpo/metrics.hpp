// Copyright 2026 The kpogates Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "kpo/dynamics.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

/// \file metrics.hpp
/// Gate fidelities (closed-form average and finite-ensemble lossy estimate),
/// Wigner functions and simple state observables.

namespace kpo {

struct FidelityReport {
  double fbar = 0.0;
  double infidelity = 1.0;
  double leakage = 0.0;  ///< 1 - tr(U U^dag)/d
};

/// Average gate fidelity of the projected evolution U against the ideal U0:
/// [|tr(U0^dag U)|^2 + tr(U U^dag)] / (d (d + 1)).
inline FidelityReport average_fidelity(const DenseMatrix& u, const DenseMatrix& u0) {
  if (u.rows() != u.cols() || u0.rows() != u0.cols() || u.rows() != u0.rows()) {
    throw std::invalid_argument("average_fidelity: dimension mismatch");
  }
  const double d = static_cast<double>(u.rows());
  const double overlap = std::norm((u0.adjoint() * u).trace());
  const double norm = std::real((u * u.adjoint()).trace());
  FidelityReport r;
  r.fbar = (overlap + norm) / (d * (d + 1.0));
  r.infidelity = 1.0 - r.fbar;
  r.leakage = 1.0 - norm / d;
  return r;
}

/// Single-qubit initial states |0>, |1>, |+>, |->, |+i>, |-i> (qubit coordinates),
/// or their 36 pairwise products for d = 4.
inline std::vector<Vector> fidelity_initial_states(int d) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Vector> single;
  for (const auto& [a, b] : std::vector<std::pair<cplx, cplx>>{
           {1.0, 0.0}, {0.0, 1.0}, {s, s}, {s, -s}, {s, kI * s}, {s, -kI * s}}) {
    Vector v(2);
    v << a, b;
    single.push_back(v);
  }
  if (d == 2) return single;
  if (d != 4) throw std::invalid_argument("fidelity_initial_states: d must be 2 or 4");
  std::vector<Vector> out;
  for (const auto& u : single) {
    for (const auto& v : single) {
      Vector w(4);
      w << u(0) * v(0), u(0) * v(1), u(1) * v(0), u(1) * v(1);
      out.push_back(w);
    }
  }
  return out;
}

/// Matrix elements M[i][j](k, m) = <k~| E(|i~><j~|) |m~> of the lossy gate map E
/// restricted to the qubit space. Only i <= j are integrated; the rest follow
/// from E(X^dag) = E(X)^dag.
template <PulseShape P>
std::vector<std::vector<DenseMatrix>> projected_lossy_map(const GateProblem& problem, const P& pulse, double kappa,
                                                          const IntegratorConfig& config, double* max_trace_drift = nullptr) {
  const HamiltonianKernel kernel(problem);
  const DenseMatrix basis = basis_matrix(problem.basis);
  const int d = problem.qubit_dim();
  std::vector<std::vector<DenseMatrix>> map(static_cast<std::size_t>(d), std::vector<DenseMatrix>(static_cast<std::size_t>(d)));
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const DenseMatrix x0 = basis.col(i) * basis.col(j).adjoint();
      auto [x, tr] = evolve_operator(problem, kernel, pulse, x0, kappa, config, false);
      if (max_trace_drift != nullptr) *max_trace_drift = std::max(*max_trace_drift, tr.max_norm_drift);
      map[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = basis.adjoint() * x * basis;
      if (j != i) {
        map[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
            map[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].adjoint();
      }
    }
  }
  return map;
}

/// Fidelity of the lossy gate averaged over the fixed initial-state ensemble:
/// (1/N) sum_l <psi_l| U0^dag rho_l U0 |psi_l>.
template <PulseShape P>
double average_fidelity_loss(const GateProblem& problem, const P& pulse, double kappa,
                             const IntegratorConfig& config = {}) {
  const auto map = projected_lossy_map(problem, pulse, kappa, config);
  const int d = problem.qubit_dim();
  const auto inits = fidelity_initial_states(d);
  double sum = 0.0;
  for (const Vector& c : inits) {
    DenseMatrix rho = DenseMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) rho += c(i) * std::conj(c(j)) * map[i][j];
    }
    const Vector target = problem.target * c;
    sum += std::real(target.dot(rho * target));
  }
  return sum / static_cast<double>(inits.size());
}

/// Same quantity, integrating the master equation once per initial state.
template <PulseShape P>
double average_fidelity_loss_direct(const GateProblem& problem, const P& pulse, double kappa,
                                    const IntegratorConfig& config = {}) {
  const DenseMatrix basis = basis_matrix(problem.basis);
  const auto inits = fidelity_initial_states(problem.qubit_dim());
  double sum = 0.0;
  for (const Vector& c : inits) {
    const StateVector psi(problem.space, basis * c);
    const auto [rho, tr] = evolve_density(problem, pulse, DensityMatrix::pure(psi), kappa, config);
    sum += rho.overlap(StateVector(problem.space, basis * (problem.target * c)));
  }
  return sum / static_cast<double>(inits.size());
}

/// Dephasing-limited infidelity n_kpo (1/3)(1 - exp(-2 alpha^2 kappa T)), valid for alpha^2 >> 1.
inline double loss_infidelity_estimate(double alpha, double kappa, double gate_time, int n_kpo = 1) {
  if (alpha * alpha < 2.0) {
    std::clog << "warning: loss_infidelity_estimate assumes alpha^2 >> 1 (alpha^2=" << alpha * alpha << ")\n";
  }
  return n_kpo * (1.0 - std::exp(-2.0 * alpha * alpha * kappa * gate_time)) / 3.0;
}

// ---------------------------------------------------------------------------
// Observables

inline double mean_photon(const StateVector& psi, int mode = 0) {
  return std::real(psi.expectation(number_operator(psi.space(), mode)));
}

inline double mean_photon(const DensityMatrix& rho, int mode = 0) {
  return std::real(rho.expectation(number_operator(rho.space(), mode)));
}

inline double qubit_population(const StateVector& psi, const Operator& projector) {
  return std::real(psi.expectation(projector));
}

inline double qubit_population(const DensityMatrix& rho, const Operator& projector) {
  return std::real(rho.expectation(projector));
}

/// || H psi - <H> psi ||; zero iff psi is an eigenstate of H.
inline double eigen_residual(const Operator& h, const StateVector& psi) {
  require_same_space(h.space(), psi.space(), "eigen_residual");
  const Vector hpsi = h.matrix() * psi.amplitudes();
  const cplx e = psi.amplitudes().dot(hpsi);
  return (hpsi - e * psi.amplitudes()).norm();
}

// ---------------------------------------------------------------------------
// Wigner function in the quadratures x = (a + a^dag)/2, y = (a - a^dag)/(2i),
// normalized so that the integral over dx dy is 1 (vacuum peak 2/pi).

struct WignerGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  Eigen::MatrixXd values;  ///< values(iy, ix)

  /// Riemann-sum integral over the grid (uniform spacing assumed).
  double integral() const {
    if (xs.size() < 2 || ys.size() < 2) return 0.0;
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    const double dy = (ys.back() - ys.front()) / static_cast<double>(ys.size() - 1);
    return values.sum() * dx * dy;
  }
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return v;
}

namespace detail {

/// Rows 0..rows-1 of D(beta) restricted to columns 0..levels-1, built from
/// D(beta)|n> = (a^dag - conj(beta)) D(beta)|n-1> / sqrt(n).
inline DenseMatrix displacement_columns(cplx beta, int levels, Index rows) {
  DenseMatrix d(rows, levels);
  d(0, 0) = std::exp(-0.5 * std::norm(beta));
  for (Index m = 1; m < rows; ++m) d(m, 0) = d(m - 1, 0) * beta / std::sqrt(static_cast<double>(m));
  for (int n = 1; n < levels; ++n) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(n));
    d(0, n) = -std::conj(beta) * d(0, n - 1) * inv;
    for (Index m = 1; m < rows; ++m) {
      d(m, n) = (std::sqrt(static_cast<double>(m)) * d(m - 1, n - 1) - std::conj(beta) * d(m, n - 1)) * inv;
    }
  }
  return d;
}

inline Index displaced_rows(double radius, int cutoff) {
  const double spread = radius + std::sqrt(static_cast<double>(cutoff) + 1.0);
  return static_cast<Index>(std::ceil(spread * spread + 10.0 * spread + 30.0));
}

inline double wigner_from(const DenseMatrix& rho, cplx gamma, int cutoff) {
  const Index rows = displaced_rows(std::abs(gamma), cutoff);
  const DenseMatrix v = displacement_columns(-gamma, cutoff + 1, rows);
  const DenseMatrix vr = v * rho;
  double w = 0.0;
  for (Index m = 0; m < rows; ++m) {
    const double diag = std::real(vr.row(m).dot(v.row(m)));  // conj(v) . vr
    w += (m % 2 == 0) ? diag : -diag;
  }
  return 2.0 / std::numbers::pi * w;
}

}  // namespace detail

/// W(gamma) = (2/pi) Tr[rho D(gamma) Pi D(gamma)^dag], gamma = x + i y.
inline double wigner_point(const DensityMatrix& rho, cplx gamma) {
  if (rho.space().modes() != 1) throw std::invalid_argument("wigner: single-mode state required");
  return detail::wigner_from(rho.matrix(), gamma, rho.space().cutoff());
}

inline double wigner_point(const StateVector& psi, cplx gamma) {
  if (psi.space().modes() != 1) throw std::invalid_argument("wigner: single-mode state required");
  const int cutoff = psi.space().cutoff();
  const Index rows = detail::displaced_rows(std::abs(gamma), cutoff);
  const Vector shifted = detail::displacement_columns(-gamma, cutoff + 1, rows) * psi.amplitudes();
  double w = 0.0;
  for (Index m = 0; m < rows; ++m) w += ((m % 2 == 0) ? 1.0 : -1.0) * std::norm(shifted(m));
  return 2.0 / std::numbers::pi * w;
}

template <class State>
WignerGrid wigner(const State& state, std::vector<double> xs, std::vector<double> ys) {
  WignerGrid g{std::move(xs), std::move(ys), {}};
  g.values.resize(static_cast<Index>(g.ys.size()), static_cast<Index>(g.xs.size()));
  for (std::size_t iy = 0; iy < g.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < g.xs.size(); ++ix) {
      g.values(static_cast<Index>(iy), static_cast<Index>(ix)) = wigner_point(state, cplx(g.xs[ix], g.ys[iy]));
    }
  }
  return g;
}

inline void write_wigner_csv(std::ostream& os, const WignerGrid& g) {
  os << "x,y,W\n";
  os.precision(10);
  for (std::size_t iy = 0; iy < g.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < g.xs.size(); ++ix) {
      os << g.xs[ix] << ',' << g.ys[iy] << ',' << g.values(static_cast<Index>(iy), static_cast<Index>(ix)) << '\n';
    }
  }
}

}  // namespace kpo
