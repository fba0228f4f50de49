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

// Simple column atoms and the bilinear factorization of int a* b.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "vlab/operator_field.hpp"

namespace vlab {

/// a = a e with e = e_Q chi_Q, E_k(a) = 0, ||a||_2 = phi(e)^{-1/2}.
struct SimpleAtom {
  OperatorField a;
  int k = 0;
  /// Cube of D(F_k), labelled by its residue mod M_k.
  std::uint64_t cube = 0;
  Projection e_Q;

  /// phi(e) = tau(e_Q) |Q|.
  double support_measure() const {
    return e_Q.trace() / static_cast<double>(a.radix().cumulative(k));
  }
};

struct AtomCheck {
  double support_residual = 0.0;
  double mean_residual = 0.0;
  double l2_excess = 0.0;
  double l1_norm = 0.0;
  bool passed = true;
};

inline AtomCheck check_atom(const SimpleAtom& atom, double eps = 1e-10) {
  const auto& R = atom.a.radix();
  AtomCheck c;
  const Index d = atom.a.fiber_dim();
  const Operator comp = Operator::identity(d) - atom.e_Q.op();
  const std::uint64_t Mk = R.cumulative(atom.k);
  for (std::uint64_t t = 0; t < R.size(); ++t) {
    const double r = t % Mk == atom.cube ? opnorm(atom.a[t] * comp) : opnorm(atom.a[t]);
    c.support_residual = std::max(c.support_residual, r);
  }
  c.mean_residual = opnorm(cond_exp(atom.a, atom.k));
  c.l2_excess = norm(atom.a, NormSpec::lp(2.0)) - std::pow(atom.support_measure(), -0.5);
  c.l1_norm = norm(atom.a, NormSpec::lp(1.0));
  c.passed = c.support_residual <= eps && c.mean_residual <= eps && c.l2_excess <= eps && c.l1_norm <= 1.0 + eps;
  return c;
}

/// Random atom saturating the L_2 bound, supported on cube Q of level k.
inline SimpleAtom make_simple_atom(const RadixSequence& R, int k, std::uint64_t cube, const Projection& e_Q,
                                   std::uint64_t seed) {
  if (k < 1 || k > R.depth()) throw PreconditionError("make_simple_atom: level must lie in [1, N]");
  if (k == R.depth()) throw PreconditionError("make_simple_atom: k = N leaves Q without refinement, no mean-zero atom exists");
  if (cube >= R.cumulative(k)) throw PreconditionError("make_simple_atom: cube label out of range");
  if (e_Q.trace() <= 1e-12) throw PreconditionError("make_simple_atom: e_Q = 0");
  const Index d = e_Q.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto pts = cube_points(R, cube, k);
  OperatorField a(R, d);
  Matrix avg = Matrix::Zero(d, d);
  for (auto t : pts) {
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) m(i, j) = {g(rng), g(rng)};
    }
    m = m * e_Q.op().matrix();
    avg += m;
    a[t] = Operator(m);
  }
  avg /= static_cast<double>(pts.size());
  for (auto t : pts) a[t] = Operator(a[t].matrix() - avg);
  SimpleAtom atom{std::move(a), k, cube, e_Q};
  const double n2 = norm(atom.a, NormSpec::lp(2.0));
  if (n2 <= 1e-300) throw VerificationError("make_simple_atom: generated a zero field");
  atom.a *= Complex(std::pow(atom.support_measure(), -0.5) / n2);
  const auto chk = check_atom(atom);
  if (!chk.passed) {
    throw VerificationError("make_simple_atom: invariants failed (support " + detail::fmt(chk.support_residual) +
                            ", mean " + detail::fmt(chk.mean_residual) + ", L2 excess " + detail::fmt(chk.l2_excess) +
                            ", L1 " + detail::fmt(chk.l1_norm) + ")");
  }
  return atom;
}

/// int a* b = A u B with A = (int a*a)^{1/2}, B = (int b*b)^{1/2}, ||u|| <= 1.
struct BilinearFactorization {
  Operator A;
  Operator u;
  Operator B;
  double residual = 0.0;
  double u_norm = 0.0;
};

inline Operator field_integral(const OperatorField& f) {
  Matrix acc = Matrix::Zero(f.fiber_dim(), f.fiber_dim());
  for (const auto& v : f.values()) acc += v.matrix();
  return Operator(acc / static_cast<double>(f.size()));
}

inline BilinearFactorization bilinear_factorization(const OperatorField& a, const OperatorField& b,
                                                    double eps = 1e-8) {
  a.check_shape(b);
  const Operator ab = field_integral(a.adjoint() * b);
  BilinearFactorization out;
  out.A = sqrt_psd(field_integral(a.adjoint() * a));
  out.B = sqrt_psd(field_integral(b.adjoint() * b));
  out.u = pinv_self_adjoint(out.A, 1e-10) * ab * pinv_self_adjoint(out.B, 1e-10);
  out.residual = opnorm(ab - out.A * out.u * out.B);
  out.u_norm = opnorm(out.u);
  if (out.residual > eps || out.u_norm > 1.0 + eps) {
    throw VerificationError("bilinear_factorization: residual " + detail::fmt(out.residual) + ", ||u|| = " +
                            detail::fmt(out.u_norm));
  }
  return out;
}

}  // namespace vlab
