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

#include "kpo/model.hpp"
#include "kpo/pulses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// \file dynamics.hpp
/// Fixed-step fourth-order Runge-Kutta integration of the Schrodinger and
/// Lindblad equations under time-dependent gate and counter pulses.

namespace kpo {

struct IntegratorConfig {
  double dt = 1e-4;        ///< step size in units of 1/K
  int record_stride = 0;   ///< steps between snapshots; 0 records only t=0 and t=T
  bool keep_states = false;
  /// Norm (trace) drift beyond this is treated as a numerical blow-up.
  double divergence_tolerance = 1e-2;

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be positive");
    if (!(divergence_tolerance > 0.0)) throw std::invalid_argument("IntegratorConfig: divergence_tolerance must be positive");
    if (record_stride < 0) throw std::invalid_argument("IntegratorConfig: record_stride must be >= 0");
  }

  /// Number of steps covering [0, T]; all but the last have length dt.
  long step_count(double gate_time) const {
    validate();
    if (!(gate_time > 0.0)) throw std::invalid_argument("IntegratorConfig: gate time must be positive");
    return std::max(1L, static_cast<long>(std::ceil(gate_time / dt - 1e-9)));
  }
};

/// Observables recorded during one propagation. mean_photon is indexed
/// [mode][snapshot]; for block propagations the observables are averaged
/// over the propagated columns.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> mean_photon;
  std::vector<double> qubit_population;
  std::vector<double> norm_or_trace;
  std::vector<DenseMatrix> states;
  double max_norm_drift = 0.0;         ///< max |norm - 1| (state) or |trace - 1| (density)
  double max_hermiticity_drift = 0.0;  ///< density only
};

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t_K,mean_photon";
  if (tr.mean_photon.size() > 1) os << ",mean_photon_2";
  os << ",qubit_population,norm_or_trace\n";
  os.precision(12);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << tr.times[k];
    for (const auto& m : tr.mean_photon) os << ',' << m[k];
    os << ',' << tr.qubit_population[k] << ',' << tr.norm_or_trace[k] << '\n';
  }
}

/// H(t) = H_static + g0 A0 + g1 A1 stored on the union sparsity pattern so a
/// single pass produces the instantaneous matrix.
class HamiltonianKernel {
 public:
  explicit HamiltonianKernel(const GateProblem& problem) : dim_(problem.space.dimension()) {
    const SparseMatrix& s = problem.h_static.matrix();
    const SparseMatrix& a0 = problem.drive.matrix();
    const SparseMatrix& a1 = problem.counter_op.matrix();
    row_ptr_.reserve(static_cast<std::size_t>(dim_) + 1);
    row_ptr_.push_back(0);
    std::map<Index, std::array<cplx, 3>> row;
    for (Index r = 0; r < dim_; ++r) {
      row.clear();
      for (SparseMatrix::InnerIterator it(s, r); it; ++it) row[it.col()][0] += it.value();
      for (SparseMatrix::InnerIterator it(a0, r); it; ++it) row[it.col()][1] += it.value();
      for (SparseMatrix::InnerIterator it(a1, r); it; ++it) row[it.col()][2] += it.value();
      for (const auto& [c, v] : row) {
        if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) continue;
        cols_.push_back(c);
        static_.push_back(v[0]);
        drive_.push_back(v[1]);
        counter_.push_back(v[2]);
      }
      row_ptr_.push_back(static_cast<Index>(cols_.size()));
    }
  }

  Index dimension() const { return dim_; }
  std::size_t nonzeros() const { return cols_.size(); }

  void assemble(double g0, double g1, std::vector<cplx>& values) const {
    values.resize(cols_.size());
    for (std::size_t k = 0; k < cols_.size(); ++k) values[k] = static_[k] + g0 * drive_[k] + g1 * counter_[k];
  }

  /// y = -i H x, column by column.
  void apply_minus_i(const std::vector<cplx>& values, const DenseMatrix& x, DenseMatrix& y) const {
    const auto* v = reinterpret_cast<const double*>(values.data());
    for (Index c = 0; c < x.cols(); ++c) {
      const auto* xc = reinterpret_cast<const double*>(x.data() + c * dim_);
      auto* yc = reinterpret_cast<double*>(y.data() + c * dim_);
      for (Index r = 0; r < dim_; ++r) {
        double re = 0.0;
        double im = 0.0;
        for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
          const double hr = v[2 * k];
          const double hi = v[2 * k + 1];
          const double xr = xc[2 * cols_[k]];
          const double xi = xc[2 * cols_[k] + 1];
          re += hr * xr - hi * xi;
          im += hr * xi + hi * xr;
        }
        yc[2 * r] = im;
        yc[2 * r + 1] = -re;
      }
    }
  }

  /// y = -i (H x - x H) for a square x (H Hermitian). Column-major access only.
  void commutator_minus_i(const std::vector<cplx>& values, const DenseMatrix& x, DenseMatrix& y) const {
    apply_minus_i(values, x, y);
    // (x H)[:, s] = sum_k x[:, k] H[k, s] = sum_{k in row s} conj(H[s, k]) x[:, k]
    const auto* v = reinterpret_cast<const double*>(values.data());
    for (Index s = 0; s < dim_; ++s) {
      auto* ys = reinterpret_cast<double*>(y.data() + s * dim_);
      for (Index k = row_ptr_[s]; k < row_ptr_[s + 1]; ++k) {
        const double hr = v[2 * k];
        const double hi = -v[2 * k + 1];
        const auto* xk = reinterpret_cast<const double*>(x.data() + cols_[k] * dim_);
        // y += i * conj(h) * x[:, k]
        for (Index r = 0; r < dim_; ++r) {
          const double xr = xk[2 * r];
          const double xi = xk[2 * r + 1];
          ys[2 * r] -= hr * xi + hi * xr;
          ys[2 * r + 1] += hr * xr - hi * xi;
        }
      }
    }
  }

 private:
  Index dim_;
  std::vector<Index> row_ptr_;
  std::vector<Index> cols_;
  std::vector<cplx> static_;
  std::vector<cplx> drive_;
  std::vector<cplx> counter_;
};

/// Single-photon loss on every mode: (kappa/2) sum_i (2 a_i rho a_i^dag - n_i rho - rho n_i).
class LossKernel {
 public:
  LossKernel(const FockSpace& space, double kappa) : dim_(space.dimension()), kappa_(kappa) {
    if (!(kappa >= 0.0)) throw std::invalid_argument("loss rate must be >= 0");
    total_n_.assign(static_cast<std::size_t>(dim_), 0.0);
    for (int mode = 0; mode < space.modes(); ++mode) {
      std::vector<Index> src(static_cast<std::size_t>(dim_), -1);
      std::vector<double> amp(static_cast<std::size_t>(dim_), 0.0);
      for (Index i = 0; i < dim_; ++i) {
        const int n = space.occupation(i, mode);
        total_n_[static_cast<std::size_t>(i)] += n;
        // a|m> = sqrt(m)|m-1>: row i of a couples to the state with one more photon.
        if (n < space.cutoff()) {
          const Index j = space.modes() == 1 ? i + 1 : (mode == 0 ? i + space.levels() : i + 1);
          src[static_cast<std::size_t>(i)] = j;
          amp[static_cast<std::size_t>(i)] = std::sqrt(static_cast<double>(n + 1));
        }
      }
      source_.push_back(std::move(src));
      amplitude_.push_back(std::move(amp));
    }
  }

  double kappa() const { return kappa_; }

  /// y += L[x]
  void add(const DenseMatrix& x, DenseMatrix& y) const {
    if (kappa_ == 0.0) return;
    for (Index s = 0; s < dim_; ++s) {
      const double ns = total_n_[static_cast<std::size_t>(s)];
      for (Index r = 0; r < dim_; ++r) {
        y(r, s) -= 0.5 * kappa_ * (total_n_[static_cast<std::size_t>(r)] + ns) * x(r, s);
      }
    }
    for (std::size_t m = 0; m < source_.size(); ++m) {
      const auto& src = source_[m];
      const auto& amp = amplitude_[m];
      for (Index s = 0; s < dim_; ++s) {
        const Index ss = src[static_cast<std::size_t>(s)];
        if (ss < 0) continue;
        const double as = kappa_ * amp[static_cast<std::size_t>(s)];
        for (Index r = 0; r < dim_; ++r) {
          const Index rr = src[static_cast<std::size_t>(r)];
          if (rr < 0) continue;
          y(r, s) += as * amp[static_cast<std::size_t>(r)] * x(rr, ss);
        }
      }
    }
  }

 private:
  Index dim_;
  double kappa_;
  std::vector<double> total_n_;
  std::vector<std::vector<Index>> source_;
  std::vector<std::vector<double>> amplitude_;
};

namespace detail {

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

/// Per-mode photon-number diagonals and the qubit basis, used for observables.
struct ObservableSet {
  std::vector<Eigen::VectorXd> number_diag;
  DenseMatrix basis;

  explicit ObservableSet(const GateProblem& problem) : basis(basis_matrix(problem.basis)) {
    const FockSpace& space = problem.space;
    for (int mode = 0; mode < space.modes(); ++mode) {
      Eigen::VectorXd d(space.dimension());
      for (Index i = 0; i < space.dimension(); ++i) d(i) = space.occupation(i, mode);
      number_diag.push_back(std::move(d));
    }
  }
};

/// Drives a generic fixed-step RK4 loop. `rhs(t, y, dy, values)` evaluates the
/// derivative with the Hamiltonian values assembled for time t.
template <PulseShape P, class Rhs, class Record>
void integrate_rk4(const HamiltonianKernel& kernel, const P& pulse, const IntegratorConfig& config, DenseMatrix& y,
                   Rhs&& rhs, Record&& record) {
  const double T = pulse.duration();
  const long steps = config.step_count(T);
  DenseMatrix k(y.rows(), y.cols());
  DenseMatrix acc(y.rows(), y.cols());
  DenseMatrix tmp(y.rows(), y.cols());
  std::vector<cplx> h_start;
  std::vector<cplx> h_mid;
  std::vector<cplx> h_end;
  kernel.assemble(pulse.g0(0.0), pulse.g1(0.0), h_start);
  record(0L, 0.0, y);
  for (long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * config.dt;
    const double t_end = (n + 1 == steps) ? T : static_cast<double>(n + 1) * config.dt;
    const double h = t_end - t;
    const double t_mid = t + 0.5 * h;
    kernel.assemble(pulse.g0(t_mid), pulse.g1(t_mid), h_mid);
    kernel.assemble(pulse.g0(t_end), pulse.g1(t_end), h_end);

    rhs(h_start, y, k);
    acc = y + (h / 6.0) * k;
    tmp = y + (0.5 * h) * k;
    rhs(h_mid, tmp, k);
    acc += (h / 3.0) * k;
    tmp = y + (0.5 * h) * k;
    rhs(h_mid, tmp, k);
    acc += (h / 3.0) * k;
    tmp = y + h * k;
    rhs(h_end, tmp, k);
    y = acc + (h / 6.0) * k;

    std::swap(h_start, h_end);
    record(n + 1, t_end, y);
  }
}

inline bool should_record(long step, long steps, int stride) {
  return step == 0 || step == steps || (stride > 0 && step % stride == 0);
}

}  // namespace detail

/// Integrates i d/dt X = H(t) X for the columns of `x0`.
template <PulseShape P>
std::pair<DenseMatrix, Trajectory> evolve_block(const GateProblem& problem, const HamiltonianKernel& kernel,
                                                const P& pulse, DenseMatrix x0, const IntegratorConfig& config) {
  if (x0.rows() != problem.space.dimension()) throw std::invalid_argument("evolve: dimension mismatch");
  const long steps = config.step_count(pulse.duration());
  const detail::ObservableSet obs(problem);
  const Eigen::VectorXd initial_norms = x0.colwise().norm().transpose();
  Trajectory tr;
  tr.mean_photon.resize(obs.number_diag.size());
  constexpr long kCheckInterval = 64;

  auto record = [&](long step, double t, const DenseMatrix& y) {
    const bool snapshot = detail::should_record(step, steps, config.record_stride);
    if (!snapshot && step % kCheckInterval != 0) return;
    if (!y.allFinite()) {
      throw std::runtime_error("evolve_state: non-finite amplitudes at t=" + std::to_string(t) +
                               " (integration blew up; reduce dt)");
    }
    const Eigen::VectorXd norms = y.colwise().norm().transpose();
    for (Index c = 0; c < y.cols(); ++c) {
      const double ref = initial_norms(c) > 0.0 ? initial_norms(c) : 1.0;
      tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(norms(c) / ref - 1.0));
    }
    if (tr.max_norm_drift > config.divergence_tolerance) {
      throw std::runtime_error("evolve_state: norm drift " + std::to_string(tr.max_norm_drift) + " at t=" +
                               std::to_string(t) + " (integration unstable; reduce dt)");
    }
    if (!snapshot) return;
    const Eigen::MatrixXd prob = y.cwiseAbs2();
    const double cols = static_cast<double>(y.cols());
    tr.times.push_back(t);
    for (std::size_t m = 0; m < obs.number_diag.size(); ++m) {
      tr.mean_photon[m].push_back((obs.number_diag[m].transpose() * prob).sum() / cols);
    }
    tr.qubit_population.push_back((obs.basis.adjoint() * y).cwiseAbs2().sum() / cols);
    tr.norm_or_trace.push_back(norms.mean());
    if (config.keep_states) tr.states.push_back(y);
  };

  DenseMatrix y = std::move(x0);
  detail::integrate_rk4(
      kernel, pulse, config, y,
      [&](const std::vector<cplx>& h, const DenseMatrix& in, DenseMatrix& out) { kernel.apply_minus_i(h, in, out); },
      record);
  return {std::move(y), std::move(tr)};
}

/// Schrodinger evolution of a single state.
template <PulseShape P>
std::pair<StateVector, Trajectory> evolve_state(const GateProblem& problem, const P& pulse, const StateVector& psi0,
                                                const IntegratorConfig& config = {}) {
  require_same_space(problem.space, psi0.space(), "evolve_state");
  if (std::abs(psi0.norm() - 1.0) > 1e-8) throw std::invalid_argument("evolve_state: initial state not normalized");
  const HamiltonianKernel kernel(problem);
  DenseMatrix x0 = psi0.amplitudes();
  auto [y, tr] = evolve_block(problem, kernel, pulse, std::move(x0), config);
  return {StateVector(problem.space, y.col(0)), std::move(tr)};
}

/// Lindblad evolution of an arbitrary (not necessarily Hermitian) operator.
/// The map is linear, so this also propagates coherences |i><j|.
template <PulseShape P>
std::pair<DenseMatrix, Trajectory> evolve_operator(const GateProblem& problem, const HamiltonianKernel& kernel,
                                                   const P& pulse, DenseMatrix rho0, double kappa,
                                                   const IntegratorConfig& config, bool track_hermiticity = true) {
  const Index dim = problem.space.dimension();
  if (rho0.rows() != dim || rho0.cols() != dim) throw std::invalid_argument("evolve_density: dimension mismatch");
  const LossKernel loss(problem.space, kappa);
  const long steps = config.step_count(pulse.duration());
  const detail::ObservableSet obs(problem);
  const cplx trace0 = rho0.trace();
  const double rho0_scale = rho0.cwiseAbs().maxCoeff();
  Trajectory tr;
  tr.mean_photon.resize(obs.number_diag.size());
  constexpr long kCheckInterval = 64;

  auto record = [&](long step, double t, const DenseMatrix& r) {
    const bool snapshot = detail::should_record(step, steps, config.record_stride);
    if (!snapshot && step % kCheckInterval != 0) return;
    if (!r.allFinite()) {
      throw std::runtime_error("evolve_density: non-finite entries at t=" + std::to_string(t) +
                               " (integration blew up; reduce dt)");
    }
    const cplx tr_now = r.trace();
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(tr_now - trace0));
    if (tr.max_norm_drift > config.divergence_tolerance * std::max(1.0, std::abs(trace0)) ||
        r.cwiseAbs().maxCoeff() > 1e3 * std::max(1.0, rho0_scale)) {
      throw std::runtime_error("evolve_density: trace drift or growth at t=" + std::to_string(t) +
                               " (integration unstable; reduce dt)");
    }
    if (track_hermiticity) {
      tr.max_hermiticity_drift = std::max(tr.max_hermiticity_drift, (r - r.adjoint()).cwiseAbs().maxCoeff());
    }
    if (!snapshot) return;
    tr.times.push_back(t);
    for (std::size_t m = 0; m < obs.number_diag.size(); ++m) {
      tr.mean_photon[m].push_back(std::real(obs.number_diag[m].cast<cplx>().dot(r.diagonal())));
    }
    tr.qubit_population.push_back(std::real((obs.basis.adjoint() * r * obs.basis).trace()));
    tr.norm_or_trace.push_back(std::real(tr_now));
    if (config.keep_states) tr.states.push_back(r);
  };

  DenseMatrix y = std::move(rho0);
  detail::integrate_rk4(
      kernel, pulse, config, y,
      [&](const std::vector<cplx>& h, const DenseMatrix& in, DenseMatrix& out) {
        kernel.commutator_minus_i(h, in, out);
        loss.add(in, out);
      },
      record);
  return {std::move(y), std::move(tr)};
}

/// Master-equation evolution of a density matrix with single-photon loss rate kappa.
template <PulseShape P>
std::pair<DensityMatrix, Trajectory> evolve_density(const GateProblem& problem, const P& pulse,
                                                    const DensityMatrix& rho0, double kappa,
                                                    const IntegratorConfig& config = {}) {
  require_same_space(problem.space, rho0.space(), "evolve_density");
  if (std::abs(rho0.trace() - 1.0) > 1e-8) throw std::invalid_argument("evolve_density: trace(rho0) != 1");
  if (rho0.hermiticity_error() > 1e-10) throw std::invalid_argument("evolve_density: rho0 not Hermitian");
  const HamiltonianKernel kernel(problem);
  auto [y, tr] = evolve_operator(problem, kernel, pulse, rho0.matrix(), kappa, config);
  return {DensityMatrix(problem.space, std::move(y)), std::move(tr)};
}

/// Time-evolution operator projected onto the qubit space:
/// U(k, m) = <basis_k | psi_m(T)> with psi_m(0) = basis_m.
template <PulseShape P>
DenseMatrix propagate_gate(const GateProblem& problem, const HamiltonianKernel& kernel, const P& pulse,
                           const IntegratorConfig& config = {}, Trajectory* trajectory = nullptr) {
  const DenseMatrix basis = basis_matrix(problem.basis);
  auto [y, tr] = evolve_block(problem, kernel, pulse, basis, config);
  if (trajectory != nullptr) *trajectory = std::move(tr);
  return basis.adjoint() * y;
}

template <PulseShape P>
DenseMatrix propagate_gate(const GateProblem& problem, const P& pulse, const IntegratorConfig& config = {}) {
  const HamiltonianKernel kernel(problem);
  return propagate_gate(problem, kernel, pulse, config);
}

}  // namespace kpo
