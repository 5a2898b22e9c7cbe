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

#include "kpo/hilbert.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace kpo;

namespace {

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

// n! computed as a double, independent of the recursion used by the library.
double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST(FockSpace, DimensionMatchesCutoffAndModes) {
  EXPECT_EQ(FockSpace(40, 1).dimension(), 41);
  EXPECT_EQ(FockSpace(40, 2).dimension(), 41 * 41);
  EXPECT_EQ(FockSpace(3, 2).index(2, 1), 2 * 4 + 1);
  EXPECT_EQ(FockSpace(3, 2).occupation(9, 0), 2);
  EXPECT_EQ(FockSpace(3, 2).occupation(9, 1), 1);
  EXPECT_THROW(FockSpace(0, 1), std::invalid_argument);
  EXPECT_THROW(FockSpace(4, 3), std::invalid_argument);
}

TEST(Annihilation, MatrixElements) {
  const FockSpace s(2);
  const Operator a = annihilation(s);
  EXPECT_NEAR(std::abs(a(0, 1) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1, 2) - std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_EQ(a.matrix().nonZeros(), 2);
}

TEST(Annihilation, VacuumIsAnnihilated) {
  const FockSpace s(10);
  const StateVector out = annihilation(s) * StateVector::fock(s, 0);
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(Annihilation, InvalidModeThrows) {
  EXPECT_THROW(annihilation(FockSpace(5, 1), 1), std::invalid_argument);
  EXPECT_THROW(annihilation(FockSpace(5, 2), 2), std::invalid_argument);
}

TEST(NumberOperator, DiagonalPhotonNumbers) {
  const FockSpace s(12);
  const DenseMatrix n = number_operator(s).dense();
  for (Index i = 0; i < s.dimension(); ++i) {
    for (Index j = 0; j < s.dimension(); ++j) {
      EXPECT_NEAR(std::abs(n(i, j) - (i == j ? cplx(static_cast<double>(i)) : cplx(0.0))), 0.0, 1e-12) << i << "," << j;
    }
  }
}

TEST(Ladder, CommutatorIsIdentityBelowTopLevel) {
  const FockSpace s(15);
  const Operator a = annihilation(s);
  const DenseMatrix c = (a * a.adjoint() - a.adjoint() * a).dense();
  for (Index m = 0; m < s.dimension(); ++m) {
    for (Index n = 0; n < s.dimension(); ++n) {
      if (m == s.cutoff() && n == s.cutoff()) {
        // Truncation artefact lives only here: -cutoff.
        EXPECT_NEAR(c(m, n).real(), -static_cast<double>(s.cutoff()), 1e-12);
      } else {
        EXPECT_NEAR(std::abs(c(m, n) - (m == n ? 1.0 : 0.0)), 0.0, 1e-12);
      }
    }
  }
}

TEST(CoherentState, ZeroAmplitudeIsVacuum) {
  const FockSpace s(20);
  const StateVector v = coherent_state(s, 0.0);
  EXPECT_NEAR(std::abs(v[0] - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
}

TEST(CoherentState, MeanPhotonByDirectSum) {
  const FockSpace s(40);
  const cplx beta(2.0, 0.0);
  // Oracle: Poisson weights e^{-|b|^2}|b|^{2n}/n!, renormalized on 0..cutoff.
  double z = 0.0;
  double mean = 0.0;
  for (int n = 0; n <= s.cutoff(); ++n) {
    const double w = std::pow(std::norm(beta), n) / factorial(n);
    z += w;
    mean += n * w;
  }
  EXPECT_NEAR(mean / z, 4.0, 1e-8);
  const StateVector v = coherent_state(s, beta);
  EXPECT_NEAR(v.expectation(number_operator(s)).real(), mean / z, 1e-10);
  EXPECT_NEAR(v.expectation(number_operator(s)).real(), 4.0, 1e-8);
}

TEST(CoherentState, EigenvalueOfAnnihilation) {
  const FockSpace s(40);
  const cplx beta(2.0, 0.0);
  const StateVector v = coherent_state(s, beta);
  EXPECT_LT(std::abs(v.expectation(annihilation(s)) - beta), 1e-8);
}

TEST(CoherentState, NormalizedForAnyAmplitude) {
  const FockSpace s(30);
  for (cplx b : {cplx(0.3, 0.1), cplx(-1.5, 2.0), cplx(0.0, -3.0), cplx(4.5, 0.0)}) {
    EXPECT_NEAR(coherent_state(s, b).norm(), 1.0, 1e-12);
  }
  EXPECT_GT(coherent_truncation_deficit(FockSpace(5), cplx(3.0, 0.0)), 0.1);
  EXPECT_LT(coherent_truncation_deficit(FockSpace(40), cplx(2.0, 0.0)), 1e-15);
}

TEST(CatState, ParitiesAreOrthogonal) {
  const FockSpace s(40);
  const StateVector p = cat_state(s, 2.0, CatParity::Even);
  const StateVector m = cat_state(s, 2.0, CatParity::Odd);
  EXPECT_LT(std::abs(p.inner(m)), 1e-12);
  for (Index n = 1; n < s.dimension(); n += 2) EXPECT_EQ(p[n], cplx(0.0));
  for (Index n = 0; n < s.dimension(); n += 2) EXPECT_EQ(m[n], cplx(0.0));
}

TEST(CatState, MeanPhotonClosedForm) {
  const FockSpace s(40);
  const double alpha = 2.0;
  // Oracle: unnormalized superposition of two coherent vectors built from
  // factorials; <n> = a^2 tanh(a^2) for the even cat.
  Vector plus(s.dimension());
  for (int n = 0; n <= s.cutoff(); ++n) {
    const double c = std::exp(-alpha * alpha / 2) * std::pow(alpha, n) / std::sqrt(factorial(n));
    plus(n) = c + ((n % 2) ? -c : c);
  }
  plus /= plus.norm();
  double mean = 0.0;
  for (int n = 0; n <= s.cutoff(); ++n) mean += n * std::norm(plus(n));
  EXPECT_NEAR(mean, alpha * alpha * std::tanh(alpha * alpha), 1e-10);
  EXPECT_NEAR(mean, 3.99731, 1e-5);
  const StateVector p = cat_state(s, alpha, CatParity::Even);
  EXPECT_NEAR(p.expectation(number_operator(s)).real(), mean, 1e-10);
  EXPECT_LT((p.amplitudes() - plus).norm(), 1e-12);
  EXPECT_THROW(cat_state(s, 0.0, CatParity::Even), std::invalid_argument);
}

TEST(ComputationalBasis, OrthonormalAndCloseToCoherent) {
  const FockSpace s(40);
  const auto [zero, one] = computational_basis(s, 2.0);
  EXPECT_LT(std::abs(zero.inner(one)), 1e-12);
  EXPECT_NEAR(zero.norm(), 1.0, 1e-12);
  EXPECT_NEAR(one.norm(), 1.0, 1e-12);
  EXPECT_GT(std::norm(coherent_state(s, 2.0).inner(zero)), 0.999);
  EXPECT_GT(std::norm(coherent_state(s, -2.0).inner(one)), 0.999);
  const StateVector sum = zero + one;
  const StateVector ref = cplx(std::sqrt(2.0)) * cat_state(s, 2.0, CatParity::Even);
  EXPECT_LT((sum - ref).norm(), 1e-12);
}

TEST(Tensor, LowersFirstMode) {
  const FockSpace one(4);
  const Operator a = annihilation(one);
  const Operator id = Operator::identity(one);
  const StateVector in = tensor(StateVector::fock(one, 1), StateVector::fock(one, 0));
  const StateVector out = tensor(a, id) * in;
  EXPECT_LT((out - StateVector::fock(FockSpace(4, 2), 0, 0)).norm(), 1e-15);
  EXPECT_LT((tensor(id, id).dense() - Operator::identity(FockSpace(4, 2)).dense()).norm(), 1e-15);
}

TEST(Tensor, MatchesIndexArithmetic) {
  const int cutoff = 6;
  const FockSpace one(cutoff);
  const FockSpace two(cutoff, 2);
  const Operator a = annihilation(one);
  const DenseMatrix lib = tensor(a, a).dense();
  // Oracle: <m1 m2| a1 a2 |n1 n2> = sqrt(n1 n2) when m1 = n1-1 and m2 = n2-1.
  DenseMatrix ref = DenseMatrix::Zero(two.dimension(), two.dimension());
  const int L = cutoff + 1;
  for (int n1 = 1; n1 < L; ++n1) {
    for (int n2 = 1; n2 < L; ++n2) {
      ref((n1 - 1) * L + (n2 - 1), n1 * L + n2) = std::sqrt(static_cast<double>(n1 * n2));
    }
  }
  EXPECT_LT((lib - ref).cwiseAbs().maxCoeff(), 1e-14);
  // Same for the embedded single-mode operators.
  const DenseMatrix prod = (annihilation(two, 0) * annihilation(two, 1)).dense();
  EXPECT_LT((prod - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Tensor, HermitianStaysHermitian) {
  const FockSpace one(5);
  const Operator x = annihilation(one) + creation(one);
  const Operator n = number_operator(one);
  const Operator t = tensor(x, n);
  EXPECT_LT(t.hermiticity_error(), 1e-12);
}

TEST(Tensor, MismatchedCutoffsThrow) {
  EXPECT_THROW(tensor(annihilation(FockSpace(3)), annihilation(FockSpace(4))), std::invalid_argument);
  EXPECT_THROW(tensor(annihilation(FockSpace(3, 2)), annihilation(FockSpace(3))), std::invalid_argument);
}

TEST(Tensor, ActsFactorwiseOnProductStates) {
  std::mt19937_64 rng(7);
  const FockSpace one(5);
  const Operator A(one, SparseMatrix(DenseMatrix(random_vector(36, rng).reshaped(6, 6)).sparseView()));
  const Operator B = creation(one) * annihilation(one) + 0.5 * annihilation(one);
  const StateVector u(one, random_vector(6, rng));
  const StateVector v(one, random_vector(6, rng));
  const StateVector lhs = tensor(A, B) * tensor(u, v);
  const StateVector rhs = tensor(A * u, B * v);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * (1.0 + rhs.norm()));
}

TEST(DensityMatrix, PureStateInvariants) {
  const FockSpace s(20);
  const DensityMatrix rho = DensityMatrix::pure(cat_state(s, 2.0, CatParity::Odd));
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
  EXPECT_LT(rho.hermiticity_error(), 1e-10);
  EXPECT_GT(rho.min_eigenvalue(), -1e-8);
  EXPECT_NEAR(rho.overlap(cat_state(s, 2.0, CatParity::Odd)), 1.0, 1e-10);
}

TEST(Operators, ParityAndSwap) {
  const FockSpace two(3, 2);
  const DenseMatrix p = parity_operator(two).dense();
  EXPECT_EQ(p(two.index(1, 1), two.index(1, 1)), cplx(1.0));
  EXPECT_EQ(p(two.index(2, 1), two.index(2, 1)), cplx(-1.0));
  const Operator sw = mode_swap(two);
  const StateVector out = sw * StateVector::fock(two, 2, 0);
  EXPECT_EQ(out[two.index(0, 2)], cplx(1.0));
  const DenseMatrix sw2 = (sw * sw).dense();
  EXPECT_LT((sw2 - DenseMatrix::Identity(two.dimension(), two.dimension())).norm(), 1e-15);
}

TEST(CutoffSweep, ReportsChanges) {
  const std::vector<int> cutoffs{10, 20, 30};
  const auto pts = cutoff_sweep(cutoffs, [](int c) {
    return coherent_state(FockSpace(c), cplx(2.5, 0.0)).expectation(number_operator(FockSpace(c))).real();
  });
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0].change, 0.0);
  EXPECT_GT(pts[1].change, pts[2].change);
  EXPECT_NEAR(pts[2].value, 6.25, 1e-8);
}
