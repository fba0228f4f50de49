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
#include "vlab/cz.hpp"

namespace vlab {
namespace {

OperatorField random_positive(std::mt19937_64& rng, const RadixSequence& R, Index d) {
  std::vector<Operator> v;
  for (std::uint64_t t = 0; t < R.size(); ++t) {
    v.emplace_back(vlab_test::psd(rng, d) + 1e-6 * Matrix::Identity(d, d));
  }
  return OperatorField(R, std::move(v));
}

/// Cube average by direct summation.
Matrix naive_mean(const OperatorField& f, int k, std::uint64_t c) {
  const std::uint64_t Mk = f.radix().cumulative(k);
  Matrix s = Matrix::Zero(f.fiber_dim(), f.fiber_dim());
  int cnt = 0;
  for (std::uint64_t t = 0; t < f.size(); ++t) {
    if (t % Mk == c) {
      s += f[t].matrix();
      ++cnt;
    }
  }
  return s / cnt;
}

double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  return es.eigenvalues().minCoeff();
}

std::vector<double> wide_grid(double l1) {
  std::vector<double> g;
  for (int i = 0; i < 8; ++i) g.push_back(l1 * std::ldexp(1.0, i - 3));
  return g;
}

struct CZFixture : ::testing::Test {
  RadixSequence R = RadixSequence::uniform(2, 3);
  PsiTable psi{vilenkin_characters(R)};
  SupKernelBank bank{psi};
  std::mt19937_64 rng{7};
};

TEST_F(CZFixture, ConstantBelowLevelKeepsEverything) {
  auto f = OperatorField::constant(R, Operator(0.5 * Matrix::Identity(2, 2)));
  auto res = cuculescu(f, 0.5);
  for (int n = 0; n <= 3; ++n) {
    for (std::uint64_t c = 0; c < R.cumulative(n); ++c) {
      EXPECT_LT(vlab_test::max_abs(res.q_cube(n, c).matrix() - Matrix::Identity(2, 2)), 1e-12);
    }
  }
}

TEST_F(CZFixture, ConstantAboveLevelCutsAtFirstStep) {
  auto f = OperatorField::constant(R, Operator(2.0 * Matrix::Identity(2, 2)));
  auto res = cuculescu(f, 1.0);
  for (std::uint64_t c = 0; c < 2; ++c) EXPECT_LT(vlab_test::max_abs(res.q_cube(1, c).matrix()), 1e-12);
  const auto one = OperatorField::identity(R, 2);
  EXPECT_NEAR((one - res.terminal()).trace().real(), 1.0, 1e-12);
}

TEST_F(CZFixture, RejectsBadInput) {
  auto f = random_positive(rng, R, 2);
  EXPECT_THROW(cuculescu(f, 0.0), PreconditionError);
  EXPECT_THROW(cuculescu(-1.0 * f, 1.0), PreconditionError);
}

TEST_F(CZFixture, RandomSweepAgainstDirectEigenCheck) {
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_positive(rng, R, 2);
    for (double lambda : wide_grid(norm(f, NormSpec::lp(1.0)))) {
      auto res = cuculescu(f, lambda);
      for (int n = 1; n <= 3; ++n) {
        for (std::uint64_t c = 0; c < R.cumulative(n); ++c) {
          const Matrix qn = res.q_cube(n, c).matrix();
          const Matrix qp = res.q_cube(n - 1, c % R.cumulative(n - 1)).matrix();
          const Matrix fn = naive_mean(f, n, c);
          EXPECT_LT(vlab_test::max_abs(qn * qn - qn), 1e-9);
          EXPECT_GT(min_eig(qp - qn), -1e-9);
          EXPECT_GT(min_eig(lambda * qn - qn * fn * qn), -1e-8);
          const Matrix a = qp * fn * qp;
          EXPECT_LT(vlab_test::max_abs(qn * a - a * qn), 1e-8);
        }
      }
      const OperatorField one_minus_q = OperatorField::identity(R, 2) - res.terminal();
      EXPECT_LE(lambda * one_minus_q.trace().real(), (one_minus_q * f).trace().real() + 1e-8);
    }
  }
}

TEST_F(CZFixture, TailMonotoneInLambda) {
  auto f = random_positive(rng, R, 2);
  double prev = 2.0;
  for (double lambda : wide_grid(norm(f, NormSpec::lp(1.0)))) {
    auto res = cuculescu(f, lambda);
    const double tail = 1.0 - res.terminal().trace().real();
    EXPECT_LE(tail, prev + 1e-12);
    prev = tail;
  }
}

TEST_F(CZFixture, BoundedFieldHasTrivialDecomposition) {
  auto f = random_positive(rng, R, 2);
  const double lambda = opnorm(f) + 1.0;
  auto cz = cz_decompose(f, lambda);
  EXPECT_LT(norm(cz.g - f, NormSpec::inf()), 1e-12);
  EXPECT_LT(norm(cz.b_d, NormSpec::inf()), 1e-12);
  EXPECT_LT(norm(cz.b_off, NormSpec::inf()), 1e-12);
  auto w = weak11_certificate(f, lambda, bank);
  EXPECT_TRUE(w.passed) << w.message;
  EXPECT_NEAR(w.tail, 0.0, 1e-12);
  EXPECT_NEAR(w.fitted_c_total, 0.0, 1e-12);
}

TEST_F(CZFixture, DecompositionInvariantsOverSweep) {
  for (int trial = 0; trial < 5; ++trial) {
    auto f = random_positive(rng, R, 2);
    const double f1 = norm(f, NormSpec::lp(1.0));
    for (double lambda : lambda_grid(f)) {
      auto cz = cz_decompose(f, lambda);
      EXPECT_LT(norm(f - cz.g - cz.b_d - cz.b_off, NormSpec::lp(1.0)), 1e-9);
      EXPECT_LE(norm(cz.g, NormSpec::lp(1.0)), f1 + 1e-9);
      EXPECT_LE(opnorm(cz.g), 2.0 * lambda + 1e-8);
      // Oracle: good part assembled from its closed form q f q + sum p_k f_k p_k.
      OperatorField g = cz.cuculescu.terminal() * f * cz.cuculescu.terminal();
      for (int k = 1; k <= 3; ++k) {
        auto pk = cz.cuculescu.p_field(k);
        g += pk * cond_exp(f, k) * pk;
      }
      EXPECT_LT(norm(g - cz.g, NormSpec::inf()), 1e-10);
      for (const auto& piece : cz.pieces) {
        auto m1 = cond_exp(piece.bd_field(R), piece.k);
        auto m2 = cond_exp(piece.boff_field(R), piece.k);
        EXPECT_LT(opnorm(m1), 1e-9);
        EXPECT_LT(opnorm(m2), 1e-9);
      }
      EXPECT_LT(diagonal_vanishing_residual(cz, bank), 1e-9);
    }
  }
}

TEST_F(CZFixture, GoodPartBoundNeedsLevelAboveMean) {
  auto f = random_positive(rng, R, 2);
  const double mean = opnorm(cond_exp(f, 0));
  auto below = cz_decompose(f, 0.25 * mean);
  EXPECT_FALSE(below.checks.g_inf_applicable);
  EXPECT_LT(below.checks.reconstruction, 1e-9);
  auto at = cz_decompose(f, mean);
  EXPECT_TRUE(at.checks.g_inf_applicable);
  EXPECT_LE(at.checks.g_inf_excess, 1e-8);
}

TEST_F(CZFixture, MajorantsMatchFullKernelApplication) {
  auto f = random_positive(rng, R, 2);
  auto cz = cz_decompose(f, 0.5 * norm(f, NormSpec::lp(1.0)));
  for (const auto& piece : cz.pieces) {
    OperatorField expect(R, 2);
    for (int n = piece.k; n < 3; ++n) expect += abs(detail::tilde_sigma_linear(piece.boff_field(R), n, bank));
    for (std::uint64_t t = piece.cube; t < R.size(); t += R.cumulative(piece.k)) expect[t] = Operator::zero(2);
    EXPECT_LT(norm(expect - offdiag_majorant(piece, bank), NormSpec::inf()), 1e-12);
  }
}

TEST_F(CZFixture, WeakCertificatesOnRandomFields) {
  for (int trial = 0; trial < 3; ++trial) {
    auto f = random_positive(rng, R, 2);
    for (double lambda : lambda_grid(f)) {
      auto w = weak11_certificate(f, lambda, bank);
      EXPECT_TRUE(w.passed) << w.message;
      EXPECT_TRUE(std::isfinite(w.fitted_c_total));
      EXPECT_TRUE(std::isfinite(w.sup_bound));
      EXPECT_LE(w.e_below_q, 1e-7);
      EXPECT_LE(w.tail_bd, w.tail + 1e-12);
      EXPECT_LE(w.tail_boff, w.tail + 1e-12);
    }
  }
}

TEST_F(CZFixture, SpikeCertificate) {
  OperatorField f(R, 2);
  f[5] = Operator(static_cast<double>(R.size()) * Matrix::Identity(2, 2));
  auto w = weak11_certificate(f, 1.0, bank);
  EXPECT_TRUE(w.passed) << w.message;
  EXPECT_TRUE(std::isfinite(w.fitted_c_total));
  auto cz = cz_decompose(f, 1.0);
  for (int k = 1; k <= 3; ++k) {
    for (std::uint64_t c = 0; c < R.cumulative(k); ++c) {
      auto rep = verify_offdiag_l1(cz, bank, k, c);
      EXPECT_TRUE(rep.passed);
      EXPECT_TRUE(std::isfinite(rep.fitted_c));
    }
  }
}

TEST_F(CZFixture, OffDiagonalDegenerateBelowLevel) {
  auto f = random_positive(rng, R, 2);
  auto cz = cz_decompose(f, opnorm(f) + 1.0);
  auto rep = verify_offdiag_l1(cz, bank, 2, 1);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.lhs, 0.0);
  EXPECT_THROW(verify_offdiag_l1(cz, bank, 0, 0), PreconditionError);
  EXPECT_THROW(verify_offdiag_l1(cz, bank, 2, 4), PreconditionError);
}

}  // namespace
}  // namespace vlab
