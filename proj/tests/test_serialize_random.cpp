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
#include <limits>
#include <sstream>

#include "vlab/random.hpp"
#include "vlab/serialize.hpp"

namespace {

using namespace vlab;

TEST(Serialize, FieldRoundTripIsExact) {
  Rng rng(7);
  const OperatorField f = random_field(rng, RadixSequence::parse("2,3,2"), 3);
  const OperatorField g = field_from_text(field_text(f));
  ASSERT_EQ(g.size(), f.size());
  EXPECT_EQ(g.radix().to_string(), f.radix().to_string());
  EXPECT_EQ(g.fiber_dim(), f.fiber_dim());
  for (std::uint64_t t = 0; t < f.size(); ++t) EXPECT_TRUE((g[t].matrix().array() == f[t].matrix().array()).all());
  EXPECT_EQ(field_text(g), field_text(f));
}

TEST(Serialize, ExtremeValuesRoundTrip) {
  Matrix m(2, 2);
  m << Complex(std::numeric_limits<double>::denorm_min(), -0.0), Complex(1e308, 0.1),
      Complex(-std::numeric_limits<double>::epsilon(), 1.0 / 3.0), Complex(M_PI, -M_E);
  std::stringstream ss;
  write_operator(ss, Operator(m));
  const Operator y = read_operator(ss);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      EXPECT_EQ(y.matrix()(i, j).real(), m(i, j).real());
      EXPECT_EQ(y.matrix()(i, j).imag(), m(i, j).imag());
    }
  }
  EXPECT_TRUE(std::signbit(y.matrix()(0, 0).imag()));
}

TEST(Serialize, MalformedInputThrows) {
  EXPECT_THROW(field_from_text("VLAB-FIELD 2\n"), PreconditionError);
  EXPECT_THROW(field_from_text("VLAB-FIELD 1\nradix 2\ndepth 2\nfiber_dim 1\n0x1p+0 0x0p+0\n"), PreconditionError);
  EXPECT_THROW(field_from_text("VLAB-FIELD 1\nradix 2\ndepth 1\nfiber_dim 1\n1.0q 0\n0 0\n"), PreconditionError);
}

TEST(Serialize, CertificateJsonHasRequiredKeys) {
  const RadixSequence R = RadixSequence::parse("2").extended(3);
  Rng rng(3);
  const OperatorField f = random_positive_field(rng, R, 2);
  const PsiTable psi(validated(make_system("vilenkin-characters", R)));
  const SupKernelBank bank(psi);
  const auto c = weak11_certificate(f, lambda_grid(f).front(), bank);
  const Json j = to_json(c);
  for (const char* k : {"lambda", "depth", "fitted_c_bd", "fitted_c_boff", "fitted_c_total", "tail", "sup_bound"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_DOUBLE_EQ(j["lambda"].get<double>(), c.lambda);
  EXPECT_EQ(j["depth"].get<int>(), 3);
  EXPECT_FALSE(j.contains("e"));
  const Json w = to_json(c, true);
  ASSERT_TRUE(w.contains("e"));
  const OperatorField e = field_from_text(w["e"].get<std::string>());
  EXPECT_EQ(field_text(e), field_text(c.e));
}

TEST(Random, DerivedSeedsAreDeterministicAndDistinct) {
  EXPECT_EQ(derive_seed(1, "cz", 0), derive_seed(1, "cz", 0));
  EXPECT_NE(derive_seed(1, "cz", 0), derive_seed(1, "cz", 1));
  EXPECT_NE(derive_seed(1, "cz", 0), derive_seed(2, "cz", 0));
  EXPECT_NE(derive_seed(1, "cz", 0), derive_seed(1, "weak11", 0));
}

TEST(Random, SameSeedSameField) {
  const RadixSequence R = RadixSequence::parse("3,2");
  Rng a(derive_seed(9, "x", 4)), b(derive_seed(9, "x", 4));
  EXPECT_EQ(field_text(random_positive_field(a, R, 2)), field_text(random_positive_field(b, R, 2)));
}

TEST(Random, GeneratedObjectsSatisfyTheirInvariants) {
  Rng rng(11);
  const RadixSequence R = RadixSequence::parse("2,3,2");
  const OperatorField p = random_positive_field(rng, R, 3);
  EXPECT_GT(min_eigenvalue(p), 0.0);
  for (Index r = 0; r <= 3; ++r) {
    const Projection e = random_projection(rng, 3, r);
    EXPECT_NEAR(e.trace(), static_cast<double>(r) / 3.0, 1e-12);
  }
  for (int i = 0; i < 20; ++i) {
    const SimpleAtom a = random_atom(rng, R, 3);
    EXPECT_GE(a.k, 1);
    EXPECT_LT(a.k, R.depth());
    EXPECT_TRUE(check_atom(a).passed);
  }
  EXPECT_THROW(random_atom(rng, RadixSequence::parse("2"), 2), PreconditionError);
}

}  // namespace
