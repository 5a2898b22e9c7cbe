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

#include "kpo/dynamics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace kpo;

namespace {

constexpr double kPi = std::numbers::pi;

struct ConstantPulse {
  double value0 = 0.0;
  double value1 = 0.0;
  double gate_time = 1.0;
  double duration() const { return gate_time; }
  double g0(double) const { return value0; }
  double g1(double) const { return value1; }
};

// Rx drive is a^dag a; dropping the static part leaves H = g0 n.
GateProblem bare_problem(int cutoff) {
  GateProblem p = make_gate_problem(GateKind::Rx, CounterVariant::None, kPi / 2, {}, cutoff);
  p.h_static = Operator::zero(p.space);
  return p;
}

DenseMatrix random_matrix(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

AnalyticWaveform rz_analytic(double T, bool counter) {
  return analytic_pulse(GateKind::Rz, counter ? WaveformVariant::WithCounter : WaveformVariant::NoCounter, kPi, T);
}

}  // namespace

TEST(IntegratorConfig, StepCountCoversGateTime) {
  IntegratorConfig c;
  c.dt = 1e-3;
  EXPECT_EQ(c.step_count(1.0), 1000);
  EXPECT_EQ(c.step_count(1.0005), 1001);
  EXPECT_EQ(c.step_count(1e-5), 1);
  c.dt = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.record_stride = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(HamiltonianKernel, MatchesDenseProducts) {
  const GateProblem p = make_gate_problem(GateKind::RzzTwoModeSqueezing, CounterVariant::Standard, kPi / 2, {}, 5);
  const HamiltonianKernel kernel(p);
  std::mt19937_64 rng(3);
  const double g0 = 0.37;
  const double g1 = -1.21;
  std::vector<cplx> values;
  kernel.assemble(g0, g1, values);
  const DenseMatrix h = p.h_static.dense() + g0 * p.drive.dense() + g1 * p.counter_op.dense();
  const DenseMatrix x = random_matrix(p.space.dimension(), rng);
  DenseMatrix y(x.rows(), x.cols());
  kernel.apply_minus_i(values, x, y);
  EXPECT_LT((y - (-kI) * h * x).cwiseAbs().maxCoeff(), 1e-10);
  kernel.commutator_minus_i(values, x, y);
  EXPECT_LT((y - (-kI) * (h * x - x * h)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LossKernel, MatchesDenseDissipator) {
  for (int modes : {1, 2}) {
    const FockSpace space(4, modes);
    const double kappa = 0.3;
    const LossKernel loss(space, kappa);
    std::mt19937_64 rng(11 + modes);
    const DenseMatrix x = random_matrix(space.dimension(), rng);
    DenseMatrix expected = DenseMatrix::Zero(x.rows(), x.cols());
    for (int m = 0; m < modes; ++m) {
      const DenseMatrix a = annihilation(space, m).dense();
      const DenseMatrix n = a.adjoint() * a;
      expected += 0.5 * kappa * (2.0 * a * x * a.adjoint() - n * x - x * n);
    }
    DenseMatrix y = DenseMatrix::Zero(x.rows(), x.cols());
    loss.add(x, y);
    EXPECT_LT((y - expected).cwiseAbs().maxCoeff(), 1e-12) << modes << " modes";
  }
  EXPECT_THROW(LossKernel(FockSpace(4), -1.0), std::invalid_argument);
}

TEST(EvolveState, HarmonicRotationOfCoherentState) {
  const GateProblem p = bare_problem(30);
  const double delta = 1.7;
  const double T = 0.8;
  const cplx beta(1.2, 0.4);
  const StateVector psi0 = coherent_state(p.space, beta);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  const auto [psi, tr] = evolve_state(p, ConstantPulse{delta, 0.0, T}, psi0, cfg);
  const StateVector exact = coherent_state(p.space, beta * std::exp(-kI * delta * T));
  EXPECT_NEAR(std::abs(exact.inner(psi)), 1.0, 1e-10);
  // Global phase is exactly zero for H = delta n.
  EXPECT_LT((psi.amplitudes() - exact.amplitudes()).norm(), 1e-8);
  EXPECT_LT(tr.max_norm_drift, 1e-10);
}

TEST(EvolveState, FinalPartialStepLandsOnGateTime) {
  const GateProblem p = bare_problem(20);
  const double T = 0.10037;
  const StateVector psi0 = coherent_state(p.space, 1.0);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  const auto [psi, tr] = evolve_state(p, ConstantPulse{2.0, 0.0, T}, psi0, cfg);
  const StateVector exact = coherent_state(p.space, std::exp(-kI * 2.0 * T));
  EXPECT_LT((psi.amplitudes() - exact.amplitudes()).norm(), 1e-10);
  ASSERT_FALSE(tr.times.empty());
  EXPECT_DOUBLE_EQ(tr.times.back(), T);
}

TEST(EvolveState, CatIsStationaryWithoutDrive) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::None, kPi);
  const StateVector c = cat_state(p.space, p.constants.alpha(), CatParity::Even);
  IntegratorConfig cfg;
  cfg.dt = 1e-4;
  const auto [psi, tr] = evolve_state(p, ZeroPulse{1.0}, c, cfg);
  EXPECT_NEAR(std::abs(c.inner(psi)), 1.0, 1e-6);
  EXPECT_LT(tr.max_norm_drift, 1e-7);
}

TEST(EvolveState, RecordStrideDoesNotChangeResult) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::Standard, kPi);
  const auto pulse = rz_analytic(1.2, true);
  const StateVector c = p.basis[0];
  IntegratorConfig a;
  a.dt = 1e-3;
  IntegratorConfig b = a;
  b.record_stride = 7;
  b.keep_states = true;
  const auto [psi_a, tr_a] = evolve_state(p, pulse, c, a);
  const auto [psi_b, tr_b] = evolve_state(p, pulse, c, b);
  EXPECT_EQ((psi_a.amplitudes() - psi_b.amplitudes()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(tr_a.times.size(), 2u);
  EXPECT_EQ(tr_b.times.size(), tr_b.states.size());
  EXPECT_EQ(tr_b.times.size(), 1200u / 7u + 2u);
}

TEST(EvolveState, AnalyticRzStaysInQubitSpace) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::Standard, kPi);
  IntegratorConfig cfg;
  cfg.dt = 1e-4;
  cfg.record_stride = 500;
  const auto [psi, tr] = evolve_state(p, rz_analytic(1.3, false), p.basis[0], cfg);
  EXPECT_GT(tr.qubit_population.back(), 0.99);
  EXPECT_LT(tr.max_norm_drift, 1e-7);
  for (double n : tr.mean_photon[0]) {
    EXPECT_GT(n, 3.0);
    EXPECT_LT(n, 5.0);
  }
}

TEST(EvolveState, BlowUpIsReported) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::None, kPi);
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  EXPECT_THROW(evolve_state(p, rz_analytic(2.0, false), p.basis[0], cfg), std::runtime_error);
}

TEST(EvolveState, Rk4ConvergesAtFourthOrder) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::Standard, kPi);
  const auto pulse = rz_analytic(1.0, true);
  std::vector<Vector> out;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    out.push_back(evolve_state(p, pulse, p.basis[0], cfg).first.amplitudes());
  }
  const double order = std::log2((out[0] - out[1]).norm() / (out[1] - out[2]).norm());
  EXPECT_GT(order, 3.5);
  EXPECT_LT(order, 4.5);
  std::cout << "observed order " << order << "\n";
}

TEST(PropagateGate, IdleGateIsGlobalPhase) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::None, kPi);
  const double T = 0.7;
  const DenseMatrix u = propagate_gate(p, ZeroPulse{T});
  // Both cats sit at energy p^2 / (2K) = 8.
  const DenseMatrix expected = std::exp(-kI * 8.0 * T) * DenseMatrix::Identity(2, 2);
  EXPECT_LT((u - expected).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(std::abs(u.determinant()), 1.0, 1e-6);
}

TEST(PropagateGate, ProjectedMapIsContraction) {
  for (GateKind kind : {GateKind::Rz, GateKind::RzzTwoModeSqueezing}) {
    const GateProblem p = make_gate_problem(kind, CounterVariant::Standard, kPi / 2, {}, kind == GateKind::Rz ? 40 : 20);
    const auto pulse = analytic_pulse(kind, WaveformVariant::WithCounter, kPi / 2, 0.6);
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    const DenseMatrix u = propagate_gate(p, pulse, cfg);
    const double t = std::real((u * u.adjoint()).trace());
    EXPECT_LE(t, p.qubit_dim() + 1e-9);
    EXPECT_GT(t, 0.0);
    // Singular values of a projected isometry never exceed one.
    Eigen::JacobiSVD<DenseMatrix> svd(u);
    EXPECT_LE(svd.singularValues().maxCoeff(), 1.0 + 1e-9);
  }
}

TEST(EvolveDensity, PureLossDampsCoherentState) {
  const GateProblem p = bare_problem(30);
  const double kappa = 0.5;
  const double T = 1.0;
  const cplx beta(1.5, -0.5);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  const auto [rho, tr] = evolve_density(p, ZeroPulse{T}, DensityMatrix::pure(coherent_state(p.space, beta)), kappa, cfg);
  const StateVector exact = coherent_state(p.space, beta * std::exp(-0.5 * kappa * T));
  const DenseMatrix expected = DensityMatrix::pure(exact).matrix();
  EXPECT_LT((rho.matrix() - expected).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(tr.max_norm_drift, 1e-8);
  // <n> decays as |beta|^2 exp(-kappa t).
  EXPECT_NEAR(tr.mean_photon[0].back(), std::norm(beta) * std::exp(-kappa * T), 1e-8);
}

TEST(EvolveDensity, ZeroLossMatchesStateEvolution) {
  const GateProblem p = make_gate_problem(GateKind::Rz, CounterVariant::Standard, kPi, {}, 24);
  const auto pulse = rz_analytic(1.0, true);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  const StateVector psi0 = p.basis[1];
  const auto [psi, tr_s] = evolve_state(p, pulse, psi0, cfg);
  const auto [rho, tr_d] = evolve_density(p, pulse, DensityMatrix::pure(psi0), 0.0, cfg);
  EXPECT_LT((rho.matrix() - DensityMatrix::pure(psi).matrix()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(tr_d.max_norm_drift, 1e-8);
  EXPECT_LT(tr_d.max_hermiticity_drift, 1e-8);
}

TEST(EvolveDensity, TwoModeTraceAndHermiticity) {
  const GateProblem p = make_gate_problem(GateKind::RzzTwoModeSqueezing, CounterVariant::Standard, kPi / 2, {}, 8);
  const auto pulse = analytic_pulse(GateKind::RzzTwoModeSqueezing, WaveformVariant::WithCounter, kPi / 2, 0.4);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.record_stride = 50;
  const auto [rho, tr] = evolve_density(p, pulse, DensityMatrix::pure(p.basis[0]), 1e-2, cfg);
  EXPECT_NEAR(std::real(rho.trace()), 1.0, 1e-8);
  EXPECT_LT(tr.max_norm_drift, 1e-8);
  EXPECT_LT(tr.max_hermiticity_drift, 1e-8);
  ASSERT_EQ(tr.mean_photon.size(), 2u);
}

TEST(EvolveDensity, RejectsInvalidInput) {
  const GateProblem p = bare_problem(6);
  DenseMatrix m = DenseMatrix::Zero(7, 7);
  m(0, 0) = 2.0;
  EXPECT_THROW(evolve_density(p, ZeroPulse{1.0}, DensityMatrix(p.space, m), 0.1), std::invalid_argument);
  m(0, 0) = 1.0;
  m(0, 1) = 0.5;
  EXPECT_THROW(evolve_density(p, ZeroPulse{1.0}, DensityMatrix(p.space, m), 0.1), std::invalid_argument);
}

TEST(Trajectory, CsvColumns) {
  const GateProblem p = make_gate_problem(GateKind::RzzTwoModeSqueezing, CounterVariant::None, kPi / 2, {}, 4);
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.record_stride = 10;
  const auto [y, tr] = evolve_block(p, HamiltonianKernel(p), ZeroPulse{0.2}, basis_matrix(p.basis), cfg);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t_K,mean_photon,mean_photon_2,qubit_population,norm_or_trace");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
