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

#include <random>

#include "testing.hpp"
#include "vlab/sunouchi.hpp"

namespace vlab {
namespace {

OperatorField random_field(std::mt19937_64& rng, const RadixSequence& R, Index d) {
  std::vector<Operator> v;
  for (std::uint64_t t = 0; t < R.size(); ++t) v.emplace_back(vlab_test::gaussian(rng, d));
  return OperatorField(R, std::move(v));
}

/// sup_j sum_k m_k(j)^2 for radix 2 and n_k = 2^{k-1}, k = 1..N, in closed form.
double dyadic_reference(int N) {
  double best = 0.0;
  for (int l = 0; l < N; ++l) {
    const double j = std::ldexp(1.0, l + 1) - 1.0;
    double s = 1.0;
    for (int k = l + 2; k <= N; ++k) s += std::pow(j / std::ldexp(1.0, k - 1), 2);
    best = std::max(best, s);
  }
  return best;
}

TEST(Selection, DefaultSatisfiesSandwich) {
  for (const char* r : {"2,2,2,2", "3,2,5", "7"}) {
    auto R = RadixSequence::parse(r);
    auto s = LacunarySelection::standard(R);
    EXPECT_NO_THROW(s.validate(R));
    EXPECT_EQ(s.terms.size(), static_cast<std::size_t>(R.depth()));
  }
  auto R = RadixSequence::uniform(2, 4);
  LacunarySelection bad;
  bad.terms = {{1, 1}, {2, 4}};
  EXPECT_THROW(bad.validate(R), PreconditionError);
  EXPECT_THROW(LacunarySelection::standard(R, 3), PreconditionError);
}

TEST(Selection, SplittingUsesFewestSubsequences) {
  auto R = RadixSequence::uniform(2, 5);
  auto parts = split_lacunary({1, 2, 3, 5, 6, 7, 9, 20}, R);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].to_string(), "1 2 5 9 20");
  EXPECT_EQ(parts[1].to_string(), "3 6");
  EXPECT_EQ(parts[2].to_string(), "7");
  EXPECT_THROW(split_lacunary({3, 2}, R), PreconditionError);
}

TEST(Multiplier, TrivialValues) {
  auto R = RadixSequence::uniform(2, 4);
  auto s = LacunarySelection::standard(R);
  double at0 = 0.0;
  for (const auto& [k, n] : s.terms) at0 += std::pow(sunouchi_multiplier(R, 1, k, n, 0), 2);
  EXPECT_EQ(at0, 0.0);
  for (const auto& [k, n] : s.terms) {
    for (std::uint64_t j = n; j < R.cumulative(k); ++j) EXPECT_EQ(sunouchi_multiplier(R, 1, k, n, j), -1.0);
  }
}

TEST(Multiplier, SupMatchesClosedForm) {
  for (int N : {3, 6, 12}) {
    auto R = RadixSequence::uniform(2, N);
    EXPECT_NEAR(multiplier_sup(LacunarySelection::standard(R), R), dyadic_reference(N), 1e-12) << N;
  }
}

struct SunouchiFixture : ::testing::Test {
  RadixSequence R{std::vector<int>{2, 3, 2}};
  PsiTable psi{vilenkin_characters(R)};
  Sunouchi su{psi, LacunarySelection::standard(R)};
  std::mt19937_64 rng{21};
};

TEST_F(SunouchiFixture, ConstantsAreFixed) {
  auto f = OperatorField::constant(R, Operator(vlab_test::gaussian(rng, 2)));
  for (const auto& t : su.apply_T(f)) EXPECT_LT(opnorm(t), 1e-12);
}

TEST_F(SunouchiFixture, DiagonalOnCharacters) {
  Operator v(vlab_test::gaussian(rng, 2));
  for (std::uint64_t j = 0; j < R.size(); ++j) {
    auto f = OperatorField::scalar_times(psi.psi(j), v);
    auto T = su.apply_T(f);
    for (std::size_t i = 0; i < T.size(); ++i) {
      const auto [k, n] = su.selection().terms[i];
      double expect = 0.0;
      if (j < n) expect = -static_cast<double>(j) / n;
      else if (j < R.cumulative(k)) expect = -1.0;
      EXPECT_LT(norm(T[i] - expect * f, NormSpec::inf()), 1e-12) << j << " " << k;
    }
  }
}

TEST_F(SunouchiFixture, PipelinesAgreeAndL2Bound) {
  for (int i = 0; i < 5; ++i) {
    auto data = su.apply_U(random_field(rng, R, 2));
    EXPECT_TRUE(data.passed);
    EXPECT_LT(data.multiplier_residual, 1e-9);
    EXPECT_LE(data.l2_ratio, data.l2_bound + 1e-8);
  }
}

TEST_F(SunouchiFixture, HardyTwoRatio) {
  auto f = random_field(rng, R, 2);
  auto r = su.so1_ratio(f - cond_exp(f, 0), 2.0);
  EXPECT_LE(r.fitted_c, std::sqrt(su.multiplier_bound()) + 1e-8);
  auto g = OperatorField::scalar_times(psi.psi(R.cumulative(1)), Operator(vlab_test::gaussian(rng, 2)));
  EXPECT_TRUE(std::isfinite(su.so1_ratio(g, 1.0).fitted_c));
  EXPECT_THROW(su.so1_ratio(f, 3.0), PreconditionError);
}

TEST_F(SunouchiFixture, AtomsVanishAtLowLevels) {
  for (int i = 0; i < 20; ++i) {
    const int k = 1 + i % 2;
    auto e = Projection(Operator(vlab_test::random_projection(rng, 2, 1 + i % 2)));
    auto atom = make_simple_atom(R, k, static_cast<std::uint64_t>(i) % R.cumulative(k), e, 100 + i);
    EXPECT_LT(su.vanishing_residual(atom), 1e-10);
    auto rep = su.atom_numerator(atom);
    EXPECT_TRUE(rep.passed);
    EXPECT_GT(rep.lhs, 0.0);
  }
}

TEST_F(SunouchiFixture, RowEqualsColumnOfAdjoint) {
  auto f = random_field(rng, R, 2);
  auto T = su.apply_T(f);
  std::vector<OperatorField> Tstar;
  for (const auto& t : T) Tstar.push_back(t.adjoint());
  EXPECT_NEAR(seq_l2r_norm(T, 1.0), seq_l2c_norm(Tstar, 1.0), 1e-10);
}

TEST(SunouchiReal, OperatorsCommuteWithAdjointForRealKernels) {
  auto R = RadixSequence::uniform(2, 3);
  PsiTable psi{vilenkin_characters(R)};
  Sunouchi su{psi, LacunarySelection::standard(R)};
  std::mt19937_64 rng(4);
  auto f = random_field(rng, R, 2);
  EXPECT_NEAR(seq_l2r_norm(su.apply_T(f), 1.0), seq_l2c_norm(su.apply_T(f.adjoint()), 1.0), 1e-10);
}

TEST_F(SunouchiFixture, AsymmetricReport) {
  auto zero = OperatorField(R, 2);
  auto r0 = su.asym_maximal_report(zero, 1.0);
  EXPECT_TRUE(r0.degenerate);
  EXPECT_EQ(r0.lhs, 0.0);
  auto e = Projection(Operator(vlab_test::random_projection(rng, 2, 1)));
  auto atom = make_simple_atom(R, 1, 0, e, 5);
  auto r = su.asym_maximal_report(atom.a, 1.0);
  EXPECT_TRUE(std::isfinite(r.fitted_c));
  EXPECT_GT(r.lhs, 0.0);
}

TEST_F(SunouchiFixture, FullRangeDomination) {
  auto f = random_field(rng, R, 2);
  auto fit = fit_full_range(f, psi);
  ASSERT_TRUE(fit.finite);
  EXPECT_GE(full_range_gap(f, psi, fit.c_hat), -1e-8);
  EXPECT_LT(full_range_gap(f, psi, 0.9 * fit.c_hat), 0.0);
}

TEST(FactorSunouchi, DirectAndTransferredAgree) {
  Transference tr(RadixSequence::uniform(2, 3));
  auto sel = LacunarySelection::standard(tr.context().doubled(), 2);
  auto one = nc_sunouchi_ratio(Operator::identity(tr.context().dim()), 1.0, sel, tr);
  EXPECT_LT(one.direct_numerator, 1e-12);
  auto w1 = nc_sunouchi_ratio(tr.basis().W(1), 1.0, sel, tr);
  EXPECT_TRUE(w1.passed) << w1.message;
  EXPECT_LT(w1.transfer_residual, 1e-9);
  std::mt19937_64 rng(8);
  for (double p : {1.0, 2.0}) {
    auto r = nc_sunouchi_ratio(Operator(vlab_test::gaussian(rng, 8)), p, sel, tr);
    EXPECT_TRUE(r.passed) << r.message;
    EXPECT_LT(r.ratio_gap, 1e-8);
    EXPECT_TRUE(std::isfinite(r.direct_ratio));
  }
  EXPECT_THROW(factor_sunouchi_terms(tr.basis().W(1), LacunarySelection::standard(tr.context().doubled()), tr.basis()),
               PreconditionError);
}

}  // namespace
}  // namespace vlab
