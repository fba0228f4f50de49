// Copyright 2026 The vlab Authors.
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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "testing.hpp"
#include "vlab/matrix_core.hpp"

namespace vlab {
namespace {

using vlab_test::max_abs;

TEST(FunctionalCalculus, IdentityFunctionReturnsInput) {
  std::mt19937_64 rng(1);
  Operator x(vlab_test::hermitian(rng, 4));
  auto y = functional_calculus(x, [](double v) { return v; });
  EXPECT_LT(max_abs(y.matrix() - x.matrix()), 1e-12);
}

TEST(FunctionalCalculus, SquareOnDiagonal) {
  auto y = functional_calculus(Operator::diagonal({2.0, -1.0}), [](double v) { return v * v; });
  EXPECT_LT(max_abs(y.matrix() - Operator::diagonal({4.0, 1.0}).matrix()), 1e-12);
}

TEST(FunctionalCalculus, StepFunctionOnDiagonal) {
  auto y = functional_calculus(Operator::diagonal({3.0, 1.0}),
                               [](double v) { return Interval::above(1.5).contains(v) ? 1.0 : 0.0; });
  EXPECT_LT(max_abs(y.matrix() - Operator::diagonal({1.0, 0.0}).matrix()), 1e-12);
}

TEST(FunctionalCalculus, RejectsNonSelfAdjoint) {
  Matrix m(2, 2);
  m << 0, 1, 0, 0;
  try {
    functional_calculus(Operator(m), [](double v) { return v; });
    FAIL() << "expected rejection";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("||x - x*||"), std::string::npos);
  }
}

TEST(FunctionalCalculus, CommutesWithInput) {
  std::mt19937_64 rng(2);
  Operator x(vlab_test::hermitian(rng, 5));
  auto y = functional_calculus(x, [](double v) { return std::exp(v); });
  EXPECT_LT(opnorm(x * y - y * x), 1e-9);
}

TEST(SpectralProjection, UpperTailOfDiagonal) {
  auto e = spectral_projection(Operator::diagonal({3.0, 1.0}), Interval::above(2.0));
  EXPECT_LT(max_abs(e.op().matrix() - Operator::diagonal({1.0, 0.0}).matrix()), 1e-12);
}

TEST(SpectralProjection, AboveNormIsZero) {
  std::mt19937_64 rng(3);
  Operator x(vlab_test::hermitian(rng, 4));
  auto e = spectral_projection(x, Interval::above(opnorm(x)));
  EXPECT_LT(max_abs(e.op().matrix()), 1e-12);
}

TEST(SpectralProjection, PartitionOfPositiveSpectrum) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    // Rank-deficient positive operator so that the {0} part is nontrivial.
    Matrix g = vlab_test::gaussian(rng, 5);
    g.col(0).setZero();
    Operator x(g.adjoint() * g);
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix());
    const double lambda = 0.5 * (es.eigenvalues()(2) + es.eigenvalues()(3));
    auto a = spectral_projection(x, Interval::open(0.0, lambda));
    auto b = spectral_projection(x, Interval::point(0.0));
    auto c = spectral_projection(x, Interval::at_least(lambda));
    Matrix sum = a.op().matrix() + b.op().matrix() + c.op().matrix();
    EXPECT_LT(max_abs(sum - Matrix::Identity(5, 5)), 1e-9);
    // Oracle: ranks from eigenvalue counts.
    int n0 = 0, nmid = 0, nhi = 0;
    for (int i = 0; i < 5; ++i) {
      const double v = es.eigenvalues()(i);
      if (std::abs(v) <= 1e-9) ++n0;
      else if (v < lambda) ++nmid;
      else ++nhi;
    }
    EXPECT_NEAR(a.trace() * 5, nmid, 1e-9);
    EXPECT_NEAR(b.trace() * 5, n0, 1e-9);
    EXPECT_NEAR(c.trace() * 5, nhi, 1e-9);
  }
}

TEST(SpectralProjection, CompressionHasSpectrumInClosure) {
  std::mt19937_64 rng(5);
  Operator x(vlab_test::hermitian(rng, 6));
  auto e = spectral_projection(x, Interval::closed(-0.5, 0.5));
  Operator y = e.op() * x * e.op();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (y.matrix() + y.matrix().adjoint()));
  for (int i = 0; i < 6; ++i) {
    const double v = es.eigenvalues()(i);
    EXPECT_TRUE(std::abs(v) <= 1e-9 || (v >= -0.5 - 1e-9 && v <= 0.5 + 1e-9));
  }
}

TEST(SpectralProjection, EndpointWithinToleranceFollowsClosedness) {
  Operator x = Operator::diagonal({1.0 + 5e-10, 0.0});
  EXPECT_NEAR(spectral_projection(x, Interval::above(1.0)).trace(), 0.0, 1e-15);
  EXPECT_NEAR(spectral_projection(x, Interval::at_least(1.0)).trace(), 0.5, 1e-15);
}

TEST(MuProfile, DiagonalSteps) {
  auto mu = mu_profile(Operator::diagonal({3.0, 1.0}));
  EXPECT_DOUBLE_EQ(mu.at(0.0), 3.0);
  EXPECT_DOUBLE_EQ(mu.at(0.49), 3.0);
  EXPECT_DOUBLE_EQ(mu.at(0.5), 1.0);
  EXPECT_DOUBLE_EQ(mu.at(0.99), 1.0);
  EXPECT_DOUBLE_EQ(mu.at(1.0), 0.0);
}

TEST(MuProfile, UnitaryIsFlat) {
  std::mt19937_64 rng(6);
  Eigen::HouseholderQR<Matrix> qr(vlab_test::gaussian(rng, 4));
  Matrix u = qr.householderQ();
  for (double v : mu_profile(Operator(u)).values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(MuProfile, ZeroOperator) {
  for (double v : mu_profile(Operator::zero(3)).values) EXPECT_EQ(v, 0.0);
}

TEST(MuProfile, AdjointAndModulusAgreeWithEigenOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Operator x(vlab_test::gaussian(rng, 4));
    auto a = mu_profile(x).values;
    auto b = mu_profile(x.adjoint()).values;
    auto c = mu_profile(abs(x)).values;
    Eigen::SelfAdjointEigenSolver<Matrix> es(x.matrix().adjoint() * x.matrix());
    for (int i = 0; i < 4; ++i) {
      const double oracle = std::sqrt(std::max(0.0, es.eigenvalues()(3 - i)));
      EXPECT_NEAR(a[i], oracle, 1e-10);
      EXPECT_NEAR(b[i], oracle, 1e-10);
      EXPECT_NEAR(c[i], oracle, 1e-10);
    }
    for (int i = 1; i < 4; ++i) EXPECT_GE(a[i - 1], a[i]);
  }
}

TEST(Norm, IdentityHasUnitNorm) {
  for (double p : {1.0, 1.5, 2.0, 4.0}) EXPECT_NEAR(norm(Operator::identity(3), NormSpec::lp(p)), 1.0, 1e-14);
  EXPECT_NEAR(norm(Operator::identity(3), NormSpec::inf()), 1.0, 1e-14);
  EXPECT_NEAR(norm(Operator::identity(3), NormSpec::weak(1.0)), 1.0, 1e-14);
}

TEST(Norm, WeakL1OfDiagonal) {
  EXPECT_DOUBLE_EQ(norm(Operator::diagonal({3.0, 1.0}), NormSpec::weak(1.0)), 1.5);
}

TEST(Norm, RejectsPBelowOne) {
  EXPECT_THROW(NormSpec::lp(0.5), PreconditionError);
  EXPECT_THROW(NormSpec::weak(0.9), PreconditionError);
}

TEST(Norm, WeakBelowStrongAndL2FromSingularValues) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Operator x(vlab_test::gaussian(rng, 5));
    for (double p : {1.0, 2.0, 3.0}) EXPECT_LE(norm(x, NormSpec::weak(p)), norm(x, NormSpec::lp(p)) + 1e-12);
    // ||x||_2^2 = tau(x*x) = sum |x_ij|^2 / d.
    EXPECT_NEAR(std::pow(norm(x, NormSpec::lp(2.0)), 2), x.matrix().squaredNorm() / 5.0, 1e-10);
  }
}

TEST(Norm, ProfileIsDecreasingRearrangement) {
  std::mt19937_64 rng(9);
  Operator x(vlab_test::gaussian(rng, 6));
  const auto mu = mu_profile(x);
  for (double p : {1.0, 2.5}) {
    // Integrate the step function on a fine grid aligned with its jumps.
    double s = 0.0;
    const int steps = 6000;
    for (int i = 0; i < steps; ++i) s += std::pow(mu.at((i + 0.5) / steps), p) / steps;
    EXPECT_NEAR(std::pow(s, 1.0 / p), norm(x, NormSpec::lp(p)), 1e-10);
  }
}

TEST(Algebra, TraceCyclicityAndHolder) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    Operator x(vlab_test::gaussian(rng, 4));
    Operator y(vlab_test::gaussian(rng, 4));
    EXPECT_LT(std::abs((x * y).trace() - (y * x).trace()), 1e-10);
    EXPECT_LE(norm(x * y, NormSpec::lp(1.0)),
              norm(x, NormSpec::lp(2.0)) * norm(y, NormSpec::lp(2.0)) + 1e-9);
  }
}

TEST(Algebra, AdjointIsInvolutionAndTraceFaithful) {
  std::mt19937_64 rng(11);
  Operator x(vlab_test::gaussian(rng, 3));
  EXPECT_EQ(x.adjoint().adjoint().matrix(), x.matrix());
  EXPECT_GT((x.adjoint() * x).trace().real(), 0.0);
  EXPECT_NEAR((Operator::zero(3).adjoint() * Operator::zero(3)).trace().real(), 0.0, 1e-12);
}

TEST(Algebra, RejectsNonFiniteEntries) {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Operator{m}, PreconditionError);
}

TEST(ProjectionType, RejectsNonIdempotent) {
  EXPECT_THROW(Projection(Operator::diagonal({0.5, 1.0})), PreconditionError);
}

TEST(Meet, DiagonalWithIdentity) {
  auto e = Projection(Operator::diagonal({1.0, 0.0}));
  auto m = projection_meet(e, Projection::identity(2));
  EXPECT_LT(max_abs(m.op().matrix() - e.op().matrix()), 1e-12);
}

TEST(Meet, TransversalRangesMeetInZero) {
  auto e = Projection(Operator::diagonal({1.0, 0.0}));
  Matrix q(2, 2);
  q << 0.5, 0.5, 0.5, 0.5;
  auto m = projection_meet(e, Projection(Operator(q)));
  EXPECT_LT(max_abs(m.op().matrix()), 1e-12);
}

TEST(Meet, IdempotentAndBelowBothArguments) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Projection e(Operator(vlab_test::random_projection(rng, 6, 4)));
    Projection q(Operator(vlab_test::random_projection(rng, 6, 4)));
    auto ee = projection_meet(e, e);
    EXPECT_LT(max_abs(ee.op().matrix() - e.op().matrix()), 1e-9);
    auto m = projection_meet(e, q);
    EXPECT_GE(order_gap(m.op(), e.op()), -1e-7);
    EXPECT_GE(order_gap(m.op(), q.op()), -1e-7);
    // Generic rank-4 subspaces of C^6 meet in dimension 2.
    EXPECT_NEAR(m.trace() * 6, 2.0, 1e-7);
  }
}

}  // namespace
}  // namespace vlab
