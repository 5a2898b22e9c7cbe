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

#include "kpo/hilbert.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

/// \file model.hpp
/// Kerr parametric oscillator Hamiltonians, gate drive and counter operators,
/// and the ideal rotations they implement on the cat-state qubit.

namespace kpo {

/// Frequencies are in units of the Kerr coefficient (kerr = 1 by default).
struct PhysicalConstants {
  double kerr = 1.0;
  double pump = 4.0;

  double alpha() const { return std::sqrt(pump / kerr); }
  double alpha_squared() const { return pump / kerr; }

  void validate() const {
    if (!(kerr > 0.0)) throw std::invalid_argument("PhysicalConstants: kerr must be positive");
    if (!(pump > 0.0)) throw std::invalid_argument("PhysicalConstants: pump must be positive");
  }
};

enum class GateKind { Rz, Rx, RzzTwoModeSqueezing, RzzBeamSplitter };

/// Counter-term operator choice. BeamSplitterOrthogonal is i(a1^dag a2 - a2^dag a1),
/// which has the wrong exchange symmetry and is kept only for comparison runs.
enum class CounterVariant { None, Standard, BeamSplitterOrthogonal };

inline int mode_count(GateKind kind) { return (kind == GateKind::Rz || kind == GateKind::Rx) ? 1 : 2; }
inline int qubit_dimension(GateKind kind) { return mode_count(kind) == 1 ? 2 : 4; }
inline bool is_two_qubit(GateKind kind) { return mode_count(kind) == 2; }

inline std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Rz: return "Rz";
    case GateKind::Rx: return "Rx";
    case GateKind::RzzTwoModeSqueezing: return "Rzz";
    case GateKind::RzzBeamSplitter: return "Rzz_bs";
  }
  return "?";
}

inline GateKind parse_gate_kind(std::string_view s) {
  if (s == "Rz" || s == "rz") return GateKind::Rz;
  if (s == "Rx" || s == "rx") return GateKind::Rx;
  if (s == "Rzz" || s == "rzz" || s == "Rzz_tms") return GateKind::RzzTwoModeSqueezing;
  if (s == "Rzz_bs" || s == "rzz_bs") return GateKind::RzzBeamSplitter;
  throw std::invalid_argument("unknown gate kind '" + std::string(s) + "'");
}

inline std::string_view to_string(CounterVariant c) {
  switch (c) {
    case CounterVariant::None: return "none";
    case CounterVariant::Standard: return "standard";
    case CounterVariant::BeamSplitterOrthogonal: return "beam_splitter_orthogonal";
  }
  return "?";
}

inline CounterVariant parse_counter_variant(std::string_view s) {
  if (s == "none") return CounterVariant::None;
  if (s == "standard") return CounterVariant::Standard;
  if (s == "beam_splitter_orthogonal") return CounterVariant::BeamSplitterOrthogonal;
  throw std::invalid_argument("unknown counter variant '" + std::string(s) + "'");
}

namespace detail {

inline void check_modes(GateKind kind, const FockSpace& space) {
  if (space.modes() != mode_count(kind)) {
    throw std::invalid_argument("gate " + std::string(to_string(kind)) + " needs " +
                                std::to_string(mode_count(kind)) + " mode(s), space has " +
                                std::to_string(space.modes()));
  }
}

/// i (X - X^dagger)
inline Operator i_antihermitian_part(const Operator& x) {
  return {x.space(), SparseMatrix(kI * (x.matrix() - SparseMatrix(x.matrix().adjoint()))), true};
}

inline Operator hermitian_sum(const Operator& x) {
  return {x.space(), SparseMatrix(x.matrix() + SparseMatrix(x.matrix().adjoint())), true};
}

}  // namespace detail

/// -(K/2) a^dag^2 a^2 + (p/2)(a^dag^2 + a^2) on `mode`.
inline Operator kpo_hamiltonian(const PhysicalConstants& c, const FockSpace& space, int mode = 0) {
  c.validate();
  const Operator a = annihilation(space, mode);
  const Operator ad = a.adjoint();
  const Operator a2 = a * a;
  const Operator ad2 = ad * ad;
  const Operator h = (-0.5 * c.kerr) * (ad2 * a2) + (0.5 * c.pump) * (ad2 + a2);
  return {space, h.matrix(), true};
}

/// Sum of single-KPO Hamiltonians over all modes of `space`.
inline Operator static_hamiltonian(const PhysicalConstants& c, const FockSpace& space) {
  Operator h = kpo_hamiltonian(c, space, 0);
  for (int m = 1; m < space.modes(); ++m) h = h + kpo_hamiltonian(c, space, m);
  return h;
}

/// Gate drive A0.
inline Operator drive_operator(GateKind kind, const FockSpace& space) {
  detail::check_modes(kind, space);
  switch (kind) {
    case GateKind::Rz: return detail::hermitian_sum(annihilation(space));
    case GateKind::Rx: return number_operator(space);
    case GateKind::RzzBeamSplitter:
      return detail::hermitian_sum(creation(space, 0) * annihilation(space, 1));
    case GateKind::RzzTwoModeSqueezing:
      return detail::hermitian_sum(creation(space, 0) * creation(space, 1));
  }
  throw std::logic_error("drive_operator: unreachable");
}

/// Counter-pulse operator A1. Zero for CounterVariant::None.
inline Operator counter_operator(GateKind kind, CounterVariant variant, const FockSpace& space) {
  detail::check_modes(kind, space);
  if (variant == CounterVariant::None) return Operator::zero(space);
  if (variant == CounterVariant::BeamSplitterOrthogonal) {
    if (!is_two_qubit(kind)) {
      throw std::invalid_argument("counter_operator: beam_splitter_orthogonal requires an Rzz gate");
    }
    return detail::i_antihermitian_part(creation(space, 0) * annihilation(space, 1));
  }
  switch (kind) {
    case GateKind::Rz: return detail::i_antihermitian_part(creation(space));
    case GateKind::Rx: return detail::i_antihermitian_part(creation(space) * creation(space));
    case GateKind::RzzBeamSplitter:
    case GateKind::RzzTwoModeSqueezing:
      return detail::i_antihermitian_part(creation(space, 0) * creation(space, 1));
  }
  throw std::logic_error("counter_operator: unreachable");
}

/// Target rotation in the computational basis (global phase as written in
/// the rotation definitions: Rz = diag(e^{-i phi/2}, e^{i phi/2}), etc.).
inline DenseMatrix ideal_unitary(GateKind kind, double angle) {
  const cplx em = std::exp(-kI * (angle / 2.0));
  const cplx ep = std::exp(kI * (angle / 2.0));
  switch (kind) {
    case GateKind::Rz: {
      DenseMatrix u = DenseMatrix::Zero(2, 2);
      u(0, 0) = em;
      u(1, 1) = ep;
      return u;
    }
    case GateKind::Rx: {
      DenseMatrix u(2, 2);
      const double c = std::cos(angle / 2.0);
      const double s = std::sin(angle / 2.0);
      u << c, -kI * s, -kI * s, c;
      return u;
    }
    case GateKind::RzzBeamSplitter:
    case GateKind::RzzTwoModeSqueezing: {
      DenseMatrix u = DenseMatrix::Zero(4, 4);
      u(0, 0) = em;
      u(1, 1) = ep;
      u(2, 2) = ep;
      u(3, 3) = em;
      return u;
    }
  }
  throw std::logic_error("ideal_unitary: unreachable");
}

/// Projector onto the computational (qubit) subspace.
inline Operator qubit_projector(const FockSpace& space, double alpha) {
  const DenseMatrix b = basis_matrix(qubit_basis(space, alpha));
  const DenseMatrix p = b * b.adjoint();
  return {space, p.sparseView(1.0, 1e-300), true};
}

/// Everything needed to simulate one gate: operators, target and basis.
struct GateProblem {
  GateKind kind;
  CounterVariant counter;
  double angle;
  PhysicalConstants constants;
  FockSpace space;
  Operator h_static;
  Operator drive;    ///< A0
  Operator counter_op;  ///< A1
  DenseMatrix target;   ///< ideal 2x2 / 4x4 unitary
  std::vector<StateVector> basis;

  int qubit_dim() const { return static_cast<int>(basis.size()); }
  bool has_counter() const { return counter != CounterVariant::None; }
};

inline GateProblem make_gate_problem(GateKind kind, CounterVariant counter, double angle,
                                     const PhysicalConstants& constants = {},
                                     int cutoff = kDefaultCutoff) {
  constants.validate();
  const FockSpace space(cutoff, mode_count(kind));
  return GateProblem{kind,
                     counter,
                     angle,
                     constants,
                     space,
                     static_hamiltonian(constants, space),
                     drive_operator(kind, space),
                     counter_operator(kind, counter, space),
                     ideal_unitary(kind, angle),
                     qubit_basis(space, constants.alpha())};
}

/// Same problem with a different target angle (operators are reused).
inline GateProblem with_angle(GateProblem problem, double angle) {
  problem.angle = angle;
  problem.target = ideal_unitary(problem.kind, angle);
  return problem;
}

/// H_static + g0 A0 + g1 A1.
inline Operator total_hamiltonian(const GateProblem& problem, double g0, double g1) {
  return problem.h_static + g0 * problem.drive + g1 * problem.counter_op;
}

}  // namespace kpo
