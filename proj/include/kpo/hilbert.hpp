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

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/// \file hilbert.hpp
/// Truncated Fock-space linear algebra: spaces, sparse operators, pure and
/// mixed states, and the canonical coherent / cat / qubit-basis states.

namespace kpo {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr int kDefaultCutoff = 40;
inline constexpr cplx kI{0.0, 1.0};

/// Photon-number basis for one or two bosonic modes truncated at `cutoff`
/// photons per mode. Two-mode index is n1 * (cutoff + 1) + n2.
class FockSpace {
 public:
  explicit FockSpace(int cutoff = kDefaultCutoff, int modes = 1)
      : cutoff_(cutoff), modes_(modes) {
    if (cutoff < 1) throw std::invalid_argument("FockSpace: cutoff must be >= 1");
    if (modes != 1 && modes != 2) throw std::invalid_argument("FockSpace: modes must be 1 or 2");
  }

  int cutoff() const { return cutoff_; }
  int modes() const { return modes_; }
  int levels() const { return cutoff_ + 1; }
  Index dimension() const {
    return modes_ == 1 ? levels() : static_cast<Index>(levels()) * levels();
  }

  /// The single-mode space with the same cutoff.
  FockSpace single_mode() const { return FockSpace(cutoff_, 1); }

  Index index(int n1, int n2) const { return static_cast<Index>(n1) * levels() + n2; }

  /// Photon number of `mode` in basis state `idx`.
  int occupation(Index idx, int mode) const {
    if (modes_ == 1) return static_cast<int>(idx);
    return mode == 0 ? static_cast<int>(idx / levels()) : static_cast<int>(idx % levels());
  }

  void check_mode(int mode) const {
    if (mode < 0 || mode >= modes_) {
      throw std::invalid_argument("FockSpace: invalid mode index " + std::to_string(mode));
    }
  }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  int cutoff_;
  int modes_;
};

inline void require_same_space(const FockSpace& a, const FockSpace& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": Fock space mismatch");
}

class StateVector;

/// Sparse complex operator on a FockSpace.
class Operator {
 public:
  Operator(FockSpace space, SparseMatrix matrix, bool hermitian_hint = false)
      : space_(space), matrix_(std::move(matrix)), hermitian_(hermitian_hint) {
    if (matrix_.rows() != space_.dimension() || matrix_.cols() != space_.dimension()) {
      throw std::invalid_argument("Operator: matrix size does not match Fock space");
    }
    matrix_.makeCompressed();
  }

  static Operator identity(const FockSpace& space) {
    SparseMatrix m(space.dimension(), space.dimension());
    m.setIdentity();
    return {space, std::move(m), true};
  }

  static Operator zero(const FockSpace& space) {
    return {space, SparseMatrix(space.dimension(), space.dimension()), true};
  }

  const FockSpace& space() const { return space_; }
  const SparseMatrix& matrix() const { return matrix_; }
  bool hermitian_hint() const { return hermitian_; }
  DenseMatrix dense() const { return DenseMatrix(matrix_); }

  cplx operator()(Index row, Index col) const { return matrix_.coeff(row, col); }

  Operator adjoint() const { return {space_, SparseMatrix(matrix_.adjoint()), hermitian_}; }

  /// max |M - M^dagger| relative to the largest entry magnitude.
  double hermiticity_error() const {
    const SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
    double scale = 0.0;
    for (Index k = 0; k < matrix_.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    }
    double err = 0.0;
    for (Index k = 0; k < diff.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it) err = std::max(err, std::abs(it.value()));
    }
    return scale > 0.0 ? err / scale : err;
  }

  friend Operator operator+(const Operator& a, const Operator& b) {
    require_same_space(a.space_, b.space_, "Operator +");
    return {a.space_, a.matrix_ + b.matrix_, a.hermitian_ && b.hermitian_};
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    require_same_space(a.space_, b.space_, "Operator -");
    return {a.space_, a.matrix_ - b.matrix_, a.hermitian_ && b.hermitian_};
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    require_same_space(a.space_, b.space_, "Operator *");
    return {a.space_, SparseMatrix(a.matrix_ * b.matrix_), false};
  }
  friend Operator operator*(double s, const Operator& a) { return {a.space_, a.matrix_ * cplx(s), a.hermitian_}; }
  friend Operator operator*(cplx s, const Operator& a) {
    return {a.space_, a.matrix_ * s, a.hermitian_ && s.imag() == 0.0};
  }

  StateVector operator*(const StateVector& v) const;

 private:
  FockSpace space_;
  SparseMatrix matrix_;
  bool hermitian_;
};

/// Pure state in a FockSpace.
class StateVector {
 public:
  StateVector(FockSpace space, Vector amplitudes) : space_(space), amps_(std::move(amplitudes)) {
    if (amps_.size() != space_.dimension()) {
      throw std::invalid_argument("StateVector: amplitude count does not match Fock space");
    }
  }

  /// Fock basis state |n> (single mode) or |n1, n2> (two modes).
  static StateVector fock(const FockSpace& space, int n1, int n2 = 0) {
    if (n1 < 0 || n1 > space.cutoff() || n2 < 0 || n2 > space.cutoff()) {
      throw std::invalid_argument("StateVector::fock: photon number outside truncation");
    }
    Vector v = Vector::Zero(space.dimension());
    v(space.modes() == 1 ? n1 : space.index(n1, n2)) = 1.0;
    return {space, std::move(v)};
  }

  const FockSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amps_; }
  cplx operator[](Index i) const { return amps_(i); }
  double norm() const { return amps_.norm(); }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("StateVector: cannot normalize zero vector");
    return {space_, amps_ / n};
  }

  /// <this|other>
  cplx inner(const StateVector& other) const {
    require_same_space(space_, other.space_, "StateVector inner");
    return amps_.dot(other.amps_);
  }

  cplx expectation(const Operator& op) const {
    require_same_space(space_, op.space(), "StateVector expectation");
    return amps_.dot(op.matrix() * amps_);
  }

  friend StateVector operator+(const StateVector& a, const StateVector& b) {
    require_same_space(a.space_, b.space_, "StateVector +");
    return {a.space_, a.amps_ + b.amps_};
  }
  friend StateVector operator-(const StateVector& a, const StateVector& b) {
    require_same_space(a.space_, b.space_, "StateVector -");
    return {a.space_, a.amps_ - b.amps_};
  }
  friend StateVector operator*(cplx s, const StateVector& a) { return {a.space_, a.amps_ * s}; }

 private:
  FockSpace space_;
  Vector amps_;
};

inline StateVector Operator::operator*(const StateVector& v) const {
  require_same_space(space_, v.space(), "Operator * StateVector");
  return {space_, matrix_ * v.amplitudes()};
}

/// Mixed state in a FockSpace.
class DensityMatrix {
 public:
  DensityMatrix(FockSpace space, DenseMatrix matrix) : space_(space), rho_(std::move(matrix)) {
    if (rho_.rows() != space_.dimension() || rho_.cols() != space_.dimension()) {
      throw std::invalid_argument("DensityMatrix: size does not match Fock space");
    }
  }

  static DensityMatrix pure(const StateVector& psi) {
    return {psi.space(), psi.amplitudes() * psi.amplitudes().adjoint()};
  }

  const FockSpace& space() const { return space_; }
  const DenseMatrix& matrix() const { return rho_; }
  cplx trace() const { return rho_.trace(); }

  double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    const DenseMatrix herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

  cplx expectation(const Operator& op) const {
    require_same_space(space_, op.space(), "DensityMatrix expectation");
    return (op.matrix() * rho_).trace();
  }

  /// <psi|rho|psi>
  double overlap(const StateVector& psi) const {
    require_same_space(space_, psi.space(), "DensityMatrix overlap");
    return std::real(psi.amplitudes().dot(rho_ * psi.amplitudes()));
  }

 private:
  FockSpace space_;
  DenseMatrix rho_;
};

// ---------------------------------------------------------------------------
// Operators

namespace detail {

inline SparseMatrix single_mode_lowering(int levels) {
  SparseMatrix a(levels, levels);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int n = 1; n < levels; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

inline SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Index i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator ia(a, i); ia; ++ia) {
      for (Index j = 0; j < b.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator ib(b, j); ib; ++ib) {
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
        }
      }
    }
  }
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace detail

/// Kronecker product of two single-mode operators with the same cutoff;
/// `a` acts on mode 0, `b` on mode 1.
inline Operator tensor(const Operator& a, const Operator& b) {
  if (a.space().modes() != 1 || b.space().modes() != 1) {
    throw std::invalid_argument("tensor: both operators must be single-mode");
  }
  if (a.space().cutoff() != b.space().cutoff()) {
    throw std::invalid_argument("tensor: dimension mismatch (different cutoffs)");
  }
  return {FockSpace(a.space().cutoff(), 2), detail::kron(a.matrix(), b.matrix()),
          a.hermitian_hint() && b.hermitian_hint()};
}

inline StateVector tensor(const StateVector& u, const StateVector& v) {
  if (u.space().modes() != 1 || v.space().modes() != 1 || u.space().cutoff() != v.space().cutoff()) {
    throw std::invalid_argument("tensor: states must be single-mode with equal cutoff");
  }
  const Index n = u.space().levels();
  Vector out(n * n);
  for (Index i = 0; i < n; ++i) out.segment(i * n, n) = u[i] * v.amplitudes();
  return {FockSpace(u.space().cutoff(), 2), std::move(out)};
}

/// Lift a single-mode operator onto `mode` of a (possibly two-mode) space.
inline Operator embed(const Operator& single, const FockSpace& space, int mode) {
  space.check_mode(mode);
  if (single.space() != space.single_mode()) throw std::invalid_argument("embed: cutoff mismatch");
  if (space.modes() == 1) return single;
  const Operator id = Operator::identity(space.single_mode());
  return mode == 0 ? tensor(single, id) : tensor(id, single);
}

inline Operator annihilation(const FockSpace& space, int mode = 0) {
  space.check_mode(mode);
  const FockSpace single = space.single_mode();
  return embed(Operator(single, detail::single_mode_lowering(single.levels())), space, mode);
}

inline Operator creation(const FockSpace& space, int mode = 0) { return annihilation(space, mode).adjoint(); }

inline Operator number_operator(const FockSpace& space, int mode = 0) {
  const Operator a = annihilation(space, mode);
  return {space, SparseMatrix(a.adjoint().matrix() * a.matrix()), true};
}

/// Photon-number parity (-1)^{sum of photon numbers}.
inline Operator parity_operator(const FockSpace& space) {
  SparseMatrix m(space.dimension(), space.dimension());
  std::vector<Eigen::Triplet<cplx>> t;
  for (Index i = 0; i < space.dimension(); ++i) {
    int n = 0;
    for (int mode = 0; mode < space.modes(); ++mode) n += space.occupation(i, mode);
    t.emplace_back(i, i, (n % 2 == 0) ? 1.0 : -1.0);
  }
  m.setFromTriplets(t.begin(), t.end());
  return {space, std::move(m), true};
}

/// Permutation exchanging the two modes, |n1, n2> -> |n2, n1>.
inline Operator mode_swap(const FockSpace& space) {
  if (space.modes() != 2) throw std::invalid_argument("mode_swap: requires two modes");
  SparseMatrix m(space.dimension(), space.dimension());
  std::vector<Eigen::Triplet<cplx>> t;
  for (int n1 = 0; n1 < space.levels(); ++n1) {
    for (int n2 = 0; n2 < space.levels(); ++n2) t.emplace_back(space.index(n2, n1), space.index(n1, n2), 1.0);
  }
  m.setFromTriplets(t.begin(), t.end());
  return {space, std::move(m), true};
}

// ---------------------------------------------------------------------------
// States

/// 1 - (norm of the untruncated coherent amplitudes kept by the cutoff)^2.
inline double coherent_truncation_deficit(const FockSpace& space, cplx beta) {
  double kept = 0.0;
  double term = std::exp(-std::norm(beta));
  for (int n = 0; n <= space.cutoff(); ++n) {
    if (n > 0) term *= std::norm(beta) / n;
    kept += term;
  }
  return std::max(0.0, 1.0 - kept);
}

/// Coherent state |beta>, renormalized after truncation.
inline StateVector coherent_state(const FockSpace& space, cplx beta) {
  if (space.modes() != 1) throw std::invalid_argument("coherent_state: single-mode space required");
  if (std::norm(beta) > 0.5 * space.cutoff()) {
    std::clog << "warning: coherent_state |beta|^2=" << std::norm(beta) << " exceeds cutoff/2; truncation deficit "
              << coherent_truncation_deficit(space, beta) << '\n';
  }
  Vector v(space.levels());
  v(0) = 1.0;
  for (int n = 1; n <= space.cutoff(); ++n) v(n) = v(n - 1) * beta / std::sqrt(static_cast<double>(n));
  return StateVector(space, v).normalized();
}

enum class CatParity { Even, Odd };

/// Cat state (|alpha> +- |-alpha>), normalized in the truncated space.
inline StateVector cat_state(const FockSpace& space, double alpha, CatParity parity) {
  if (space.modes() != 1) throw std::invalid_argument("cat_state: single-mode space required");
  if (!(alpha > 0.0)) throw std::invalid_argument("cat_state: alpha must be positive");
  Vector v(space.levels());
  double c = 1.0;
  const int keep = parity == CatParity::Even ? 0 : 1;
  for (int n = 0; n <= space.cutoff(); ++n) {
    if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
    v(n) = (n % 2 == keep) ? c : 0.0;
  }
  return StateVector(space, v).normalized();
}

/// |0~> = (C+ + C-)/sqrt2, |1~> = (C+ - C-)/sqrt2.
inline std::pair<StateVector, StateVector> computational_basis(const FockSpace& space, double alpha) {
  const StateVector plus = cat_state(space, alpha, CatParity::Even);
  const StateVector minus = cat_state(space, alpha, CatParity::Odd);
  const double s = 1.0 / std::sqrt(2.0);
  return {cplx(s) * (plus + minus), cplx(s) * (plus - minus)};
}

/// Computational basis for one or two modes, ordered |0~>,|1~> or
/// |0~0~>,|0~1~>,|1~0~>,|1~1~>.
inline std::vector<StateVector> qubit_basis(const FockSpace& space, double alpha) {
  const auto [zero, one] = computational_basis(space.single_mode(), alpha);
  if (space.modes() == 1) return {zero, one};
  return {tensor(zero, zero), tensor(zero, one), tensor(one, zero), tensor(one, one)};
}

/// Basis states as columns of a dense matrix.
inline DenseMatrix basis_matrix(const std::vector<StateVector>& basis) {
  DenseMatrix m(basis.front().space().dimension(), static_cast<Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) m.col(static_cast<Index>(k)) = basis[k].amplitudes();
  return m;
}

// ---------------------------------------------------------------------------

struct CutoffSweepPoint {
  int cutoff;
  double value;
  double change;  ///< |value - previous value|, 0 for the first point
};

/// Evaluates `quantity(cutoff)` over increasing cutoffs so convergence can be
/// judged by the caller.
inline std::vector<CutoffSweepPoint> cutoff_sweep(std::span<const int> cutoffs,
                                                  const std::function<double(int)>& quantity) {
  std::vector<CutoffSweepPoint> out;
  for (int c : cutoffs) {
    const double v = quantity(c);
    out.push_back({c, v, out.empty() ? 0.0 : std::abs(v - out.back().value)});
  }
  return out;
}

}  // namespace kpo
