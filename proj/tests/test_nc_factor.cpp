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
#include "vlab/nc_factor.hpp"

namespace vlab {
namespace {

const Matrix kZ = (Matrix(2, 2) << 1, 0, 0, -1).finished();
const Matrix kX = (Matrix(2, 2) << 0, 1, 1, 0).finished();

TEST(NcFactor, ContextDimensions) {
  FactorContext ctx(RadixSequence::parse("2,3"));
  EXPECT_EQ(ctx.dim(), 6);
  EXPECT_EQ(ctx.size(), 36u);
  EXPECT_EQ(ctx.doubled().radices(), (std::vector<int>{2, 2, 3, 3}));
}

TEST(NcFactor, SmallWalshElements) {
  FactorContext ctx(RadixSequence::uniform(2, 1));
  EXPECT_LT(vlab_test::max_abs(build_W(1, ctx).matrix.matrix() - kZ), 1e-15);
  EXPECT_LT(vlab_test::max_abs(build_W(2, ctx).matrix.matrix() - kX), 1e-15);
  EXPECT_LT(vlab_test::max_abs(build_W(3, ctx).matrix.matrix() - kZ * kX), 1e-15);
  EXPECT_THROW(build_W(4, ctx), PreconditionError);
}

TEST(NcFactor, LeftmostFactorIsFirst) {
  FactorContext ctx(RadixSequence::uniform(2, 2));
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_LT(vlab_test::max_abs(walsh_matrix(1, ctx).matrix() - detail::kron(kZ, I)), 1e-15);
  EXPECT_LT(vlab_test::max_abs(walsh_matrix(8, ctx).matrix() - detail::kron(I, kX)), 1e-15);
}

TEST(NcFactor, OrthonormalBasis) {
  for (const char* r : {"2,2,2", "3,2"}) {
    FactorContext ctx(RadixSequence::parse(r));
    auto g = walsh_gram(walsh_basis(ctx));
    EXPECT_LT(vlab_test::max_abs(g - Matrix::Identity(g.rows(), g.cols())), 1e-10) << r;
    for (std::uint64_t n = 0; n < ctx.size(); ++n) EXPECT_NO_THROW(build_W(n, ctx));
  }
}

TEST(NcFactor, StructureConstantExamples) {
  FactorContext ctx(RadixSequence::uniform(2, 2));
  auto s12 = structure_constants(1, 2, ctx);
  EXPECT_NEAR(std::abs(s12.omega - Complex(1.0)), 0.0, 1e-12);
  EXPECT_EQ(s12.sum_index, 3u);
  auto s21 = structure_constants(2, 1, ctx);
  EXPECT_NEAR(std::abs(s21.omega - Complex(-1.0)), 0.0, 1e-12);
  auto s11 = structure_constants(0, 1, ctx);
  EXPECT_NEAR(std::abs(s11.u - Complex(1.0)), 0.0, 1e-12);
  EXPECT_EQ(s11.neg_index, 1u);
}

TEST(NcFactor, StructureConstantsUnimodularEverywhere) {
  FactorContext ctx(RadixSequence::parse("3,2"));
  for (std::uint64_t m = 0; m < ctx.size(); ++m) {
    for (std::uint64_t n = 0; n < ctx.size(); ++n) {
      auto s = structure_constants(m, n, ctx);
      EXPECT_NEAR(std::abs(s.omega), 1.0, 1e-10);
      EXPECT_NEAR(std::abs(s.u), 1.0, 1e-10);
    }
  }
}

TEST(NcFactor, PauliStrings) {
  FactorContext ctx(RadixSequence::uniform(2, 3));
  for (std::uint64_t n = 0; n < ctx.size(); ++n) EXPECT_TRUE(is_pauli_string(n, ctx));
  EXPECT_FALSE(is_pauli_string(1, FactorContext(RadixSequence::parse("3,2"))));
}

struct FactorFixture : ::testing::Test {
  FactorBasis basis{FactorContext(RadixSequence::parse("2,3"))};
  std::mt19937_64 rng{3};
  Operator random() { return Operator(vlab_test::gaussian(rng, basis.context().dim())); }
};

TEST_F(FactorFixture, Reconstruction) {
  auto x = random();
  EXPECT_LT(vlab_test::max_abs(basis.synthesize(basis.fourier_all(x)).matrix() - x.matrix()), 1e-12);
  EXPECT_LT(vlab_test::max_abs(basis.partial_sum(x, basis.size()).matrix() - x.matrix()), 1e-12);
}

TEST_F(FactorFixture, CesaroExamples) {
  auto x = random();
  const Index D = basis.context().dim();
  EXPECT_LT(vlab_test::max_abs(basis.cesaro(x, 1).matrix() - x.trace() * Matrix::Identity(D, D)), 1e-12);
  const auto& w1 = basis.W(1);
  for (std::uint64_t n = 1; n <= basis.size(); ++n) {
    EXPECT_LT(vlab_test::max_abs(basis.cesaro(w1, n).matrix() - (1.0 - 1.0 / n) * w1.matrix()), 1e-12);
  }
  EXPECT_THROW(basis.cesaro(x, 0), PreconditionError);
  EXPECT_THROW(basis.cesaro(x, basis.size() + 1), PreconditionError);
}

TEST_F(FactorFixture, CesaroDecayBound) {
  auto x = random();
  auto c = basis.fourier_all(x);
  double bound = 0.0;
  for (Index k = 0; k < c.size(); ++k) bound += static_cast<double>(k) * std::abs(c(k));
  for (std::uint64_t n = 1; n <= basis.size(); ++n) {
    EXPECT_LE(opnorm(basis.cesaro(x, n) - x), bound / n + 1e-9);
  }
}

TEST_F(FactorFixture, ConditionalExpectationTwoFormulas) {
  const auto& ctx = basis.context();
  auto x = random();
  for (int k = 0; k <= ctx.depth(); ++k) {
    auto pt = factor_cond_exp(x, k, ctx);
    auto fs = basis.partial_sum(x, ctx.doubled().cumulative(2 * k));
    EXPECT_LT(vlab_test::max_abs(pt.matrix() - fs.matrix()), 1e-9) << k;
    for (int j = 0; j <= ctx.depth(); ++j) {
      auto a = factor_cond_exp(factor_cond_exp(x, j, ctx), k, ctx);
      EXPECT_LT(vlab_test::max_abs(a.matrix() - factor_cond_exp(x, std::min(j, k), ctx).matrix()), 1e-12);
    }
  }
  Operator p(vlab_test::psd(rng, ctx.dim()));
  for (int k = 0; k <= ctx.depth(); ++k) {
    auto e = factor_cond_exp(p, k, ctx);
    EXPECT_GE(min_eigenvalue(e), min_eigenvalue(p) - 1e-9);
    EXPECT_NEAR(std::abs(e.trace() - p.trace()), 0.0, 1e-12);
  }
}

TEST(NcFactor, ConditionalExpectationExamples) {
  FactorContext ctx(RadixSequence::uniform(2, 2));
  Operator zx(detail::kron(kZ, kX));
  EXPECT_LT(vlab_test::max_abs(factor_cond_exp(zx, 1, ctx).matrix()), 1e-15);
  Operator zi(detail::kron(kZ, Matrix::Identity(2, 2)));
  EXPECT_LT(vlab_test::max_abs(factor_cond_exp(zi, 1, ctx).matrix() - zi.matrix()), 1e-15);
}

}  // namespace
}  // namespace vlab
