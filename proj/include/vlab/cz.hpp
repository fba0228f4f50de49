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

// Cuculescu projections, the Calderon-Zygmund decomposition along them and
// weak type (1,1) certificates for the sup-kernel means.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <string>
#include <vector>

#include "vlab/bound_report.hpp"
#include "vlab/operator_field.hpp"
#include "vlab/vector_norms.hpp"

namespace vlab {

/// Worst residuals of the Cuculescu properties.
struct CuculescuChecks {
  double decreasing = 0.0;   // max(-min eig(q_{n-1} - q_n), 0)
  double commutator = 0.0;   // max ||[q_n, q_{n-1} f_n q_{n-1}]||
  double level_excess = 0.0; // max eig(q_n f_n q_n) - lambda
  double weak_lower = 0.0;   // lambda phi(1-q) - phi((1-q) f)
  double weak_upper = 0.0;   // phi((1-q) f) - ||f||_1
  double telescoping = 0.0;  // ||sum p_n - (1 - q)||
  double disjointness = 0.0; // max ||p_Q q_Q||
};

/// q_0 = 1, q_n = q_{n-1} - chi_(lambda,inf)(q_{n-1} E_n(f) q_{n-1}), one fiber
/// projection per cube of D(F_n).
class CuculescuResult {
 public:
  double lambda = 0.0;
  RadixSequence radix;
  Index fiber_dim = 0;
  /// q[n][c]: projection on the cube c of level n, n = 0..N.
  std::vector<std::vector<Operator>> q;
  CuculescuChecks checks;

  int depth() const { return radix.depth(); }

  const Operator& q_cube(int n, std::uint64_t c) const { return q[static_cast<std::size_t>(n)][c]; }
  /// p_n on the cube c of level n, n = 1..N.
  Operator p_cube(int n, std::uint64_t c) const {
    return q_cube(n - 1, c % radix.cumulative(n - 1)) - q_cube(n, c);
  }
  OperatorField q_field(int n) const {
    std::vector<Operator> v;
    v.reserve(radix.size());
    for (std::uint64_t t = 0; t < radix.size(); ++t) v.push_back(q_cube(n, t % radix.cumulative(n)));
    return OperatorField(radix, std::move(v));
  }
  OperatorField p_field(int n) const {
    std::vector<Operator> v;
    v.reserve(radix.size());
    for (std::uint64_t t = 0; t < radix.size(); ++t) v.push_back(p_cube(n, t % radix.cumulative(n)));
    return OperatorField(radix, std::move(v));
  }
  /// Terminal projection q = q_N.
  OperatorField terminal() const { return q_field(depth()); }
};

inline CuculescuResult cuculescu(const OperatorField& f, double lambda, double eps = 1e-8) {
  if (!(lambda > 0.0)) throw PreconditionError("cuculescu: lambda must be positive");
  require_positive(f, "cuculescu");
  const auto& R = f.radix();
  const Index d = f.fiber_dim();
  const int N = R.depth();
  CuculescuResult out;
  out.lambda = lambda;
  out.radix = R;
  out.fiber_dim = d;
  out.q.push_back({Operator::identity(d)});
  auto& ck = out.checks;
  for (int n = 1; n <= N; ++n) {
    const auto fn = cond_exp(f, n);
    const std::uint64_t Mn = R.cumulative(n);
    const std::uint64_t Mp = R.cumulative(n - 1);
    std::vector<Operator> level;
    level.reserve(Mn);
    for (std::uint64_t c = 0; c < Mn; ++c) {
      const Operator& prev = out.q_cube(n - 1, c % Mp);
      const Operator a = prev * fn[c] * prev;
      const Projection cut = spectral_projection(a, Interval::above(lambda));
      const Projection qn(prev - cut.op());
      ck.commutator = std::max(ck.commutator, opnorm(qn.op() * a - a * qn.op()));
      ck.level_excess = std::max(ck.level_excess, max_eigenvalue(qn.op() * fn[c] * qn.op()) - lambda);
      ck.decreasing = std::max(ck.decreasing, -min_eigenvalue(prev - qn.op()));
      const Operator p = prev - qn.op();
      ck.disjointness = std::max(ck.disjointness, opnorm(p * qn.op()));
      level.push_back(qn.op());
    }
    out.q.push_back(std::move(level));
  }
  const OperatorField qN = out.terminal();
  const OperatorField one_minus_q = OperatorField::identity(R, d) - qN;
  OperatorField psum(R, d);
  for (int n = 1; n <= N; ++n) psum += out.p_field(n);
  double tel = 0.0;
  for (std::uint64_t t = 0; t < R.size(); ++t) tel = std::max(tel, opnorm(psum[t] - one_minus_q[t]));
  ck.telescoping = tel;
  const double tail = one_minus_q.trace().real();
  const double mass = (one_minus_q * f).trace().real();
  const double l1 = norm(f, NormSpec::lp(1.0));
  ck.weak_lower = lambda * tail - mass;
  ck.weak_upper = mass - l1;
  auto fail = [&](const char* what, double v) {
    throw VerificationError(std::string("cuculescu: ") + what + " residual " + detail::fmt(v) + " at lambda " +
                            detail::fmt(lambda));
  };
  if (ck.decreasing > eps) fail("monotonicity", ck.decreasing);
  if (ck.commutator > eps) fail("commutation", ck.commutator);
  if (ck.level_excess > eps) fail("level bound", ck.level_excess);
  if (ck.weak_lower > eps) fail("weak type lower", ck.weak_lower);
  if (ck.weak_upper > eps) fail("weak type upper", ck.weak_upper);
  if (ck.telescoping > eps) fail("telescoping", ck.telescoping);
  if (ck.disjointness > eps) fail("disjointness", ck.disjointness);
  return out;
}

/// Pieces of the bad parts on one cube Q of level k, stored on the points of Q
/// in increasing order.
struct CZPiece {
  int k = 0;
  std::uint64_t cube = 0;
  Operator p_Q;
  Operator q_Q;
  Operator f_Q;
  /// p_Q (f - f_Q) p_Q on Q
  std::vector<Operator> bd;
  /// p_Q (f - f_Q) q_Q + q_Q (f - f_Q) p_Q on Q
  std::vector<Operator> boff;

  /// chi_Q b_d^{k,Q} as a field.
  OperatorField bd_field(const RadixSequence& R) const { return expand(R, bd); }
  /// chi_Q b_off^{k,Q} as a field.
  OperatorField boff_field(const RadixSequence& R) const { return expand(R, boff); }

 private:
  OperatorField expand(const RadixSequence& R, const std::vector<Operator>& v) const {
    OperatorField out(R, p_Q.dim());
    const std::uint64_t Mk = R.cumulative(k);
    for (std::size_t j = 0; j < v.size(); ++j) out[cube + j * Mk] = v[j];
    return out;
  }
};

struct CZChecks {
  double reconstruction = 0.0;
  double g_l1_excess = 0.0;
  double g_inf_excess = 0.0;
  double diagonal_l1_excess = 0.0;
  double piece_mean = 0.0;
  /// ||E_0 f||_inf; the bound ||g||_inf <= R_reg lambda needs lambda >= top_mean.
  double top_mean = 0.0;
  bool g_inf_applicable = true;
};

/// f = g + b_d + b_off with g = q f q + sum_k p_k f_k p_k.
struct CZDecomposition {
  OperatorField f;
  double lambda = 0.0;
  double r_reg = 0.0;
  CuculescuResult cuculescu;
  OperatorField g;
  OperatorField b_d;
  OperatorField b_off;
  std::vector<CZPiece> pieces;
  CZChecks checks;
};

inline CZDecomposition cz_decompose(const OperatorField& f, double lambda, double eps = 1e-8) {
  CZDecomposition cz;
  cz.f = f;
  cz.lambda = lambda;
  cz.cuculescu = cuculescu(f, lambda);
  const auto& R = f.radix();
  const Index d = f.fiber_dim();
  const int N = R.depth();
  cz.r_reg = R.max_radix();
  const OperatorField q = cz.cuculescu.terminal();
  cz.g = q * f * q;
  cz.b_d = OperatorField(R, d);
  cz.b_off = OperatorField(R, d);
  double diag_l1 = 0.0;
  for (int k = 1; k <= N; ++k) {
    const std::uint64_t Mk = R.cumulative(k);
    const OperatorField fk = cond_exp(f, k);
    OperatorField level_bd(R, d);
    for (std::uint64_t c = 0; c < Mk; ++c) {
      CZPiece piece;
      piece.k = k;
      piece.cube = c;
      piece.p_Q = cz.cuculescu.p_cube(k, c);
      piece.q_Q = cz.cuculescu.q_cube(k, c);
      piece.f_Q = fk[c];
      for (std::uint64_t t = c; t < R.size(); t += Mk) {
        const Operator diff = f[t] - piece.f_Q;
        piece.bd.push_back(piece.p_Q * diff * piece.p_Q);
        piece.boff.push_back(piece.p_Q * diff * piece.q_Q + piece.q_Q * diff * piece.p_Q);
        const Operator& bd = piece.bd.back();
        const Operator& boff = piece.boff.back();
        cz.g[t] += piece.p_Q * piece.f_Q * piece.p_Q;
        cz.b_d[t] += bd;
        cz.b_off[t] += boff;
        level_bd[t] += bd;
      }
      Operator mean_bd = Operator::zero(d), mean_boff = Operator::zero(d);
      for (std::size_t j = 0; j < piece.bd.size(); ++j) {
        mean_bd = mean_bd + piece.bd[j];
        mean_boff = mean_boff + piece.boff[j];
      }
      const double cnt = static_cast<double>(piece.bd.size());
      cz.checks.piece_mean = std::max({cz.checks.piece_mean, opnorm(mean_bd) / cnt, opnorm(mean_boff) / cnt});
      cz.pieces.push_back(std::move(piece));
    }
    diag_l1 += norm(level_bd, NormSpec::lp(1.0));
  }
  const double f1 = norm(f, NormSpec::lp(1.0));
  cz.checks.reconstruction = norm(f - cz.g - cz.b_d - cz.b_off, NormSpec::lp(1.0));
  cz.checks.g_l1_excess = norm(cz.g, NormSpec::lp(1.0)) - f1;
  cz.checks.g_inf_excess = opnorm(cz.g) - cz.r_reg * lambda;
  cz.checks.top_mean = opnorm(cond_exp(f, 0));
  cz.checks.g_inf_applicable = lambda >= cz.checks.top_mean - tol::kEndpoint;
  cz.checks.diagonal_l1_excess = diag_l1 - 2.0 * f1;
  auto fail = [&](const char* what, double v) {
    throw VerificationError(std::string("cz_decompose: ") + what + " " + detail::fmt(v) + " at lambda " +
                            detail::fmt(lambda));
  };
  if (cz.checks.reconstruction > 1e-9) fail("reconstruction residual", cz.checks.reconstruction);
  if (cz.checks.g_l1_excess > 1e-9) fail("||g||_1 excess", cz.checks.g_l1_excess);
  if (cz.checks.g_inf_applicable && cz.checks.g_inf_excess > eps) fail("||g||_inf excess", cz.checks.g_inf_excess);
  if (cz.checks.diagonal_l1_excess > eps) fail("diagonal L1 excess", cz.checks.diagonal_l1_excess);
  if (cz.checks.piece_mean > 1e-9) fail("piece mean", cz.checks.piece_mean);
  return cz;
}

/// Levels lambda_i = ||E_0 f||_inf span^{i/(count-1)}, i < count, all in the
/// regime where the good part is bounded; the default is 2^{i/2}, i = 0..7.
inline std::vector<double> lambda_grid(const OperatorField& f, int count = 8, double span = std::pow(2.0, 3.5)) {
  if (count < 1) throw PreconditionError("lambda_grid: count must be >= 1");
  if (!(span >= 1.0)) throw PreconditionError("lambda_grid: span must be >= 1");
  const double base = opnorm(cond_exp(f, 0));
  if (!(base > 0.0)) throw PreconditionError("lambda_grid: f has zero mean");
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(count == 1 ? base : base * std::pow(span, double(i) / (count - 1)));
  return g;
}

namespace detail {

/// eta -> (1/M) sum_{t in Q} K(eta, t) v(t), where v lists the values of a
/// field supported on the cube Q of level k.
inline OperatorField kernel_on_cube(const Eigen::MatrixXd& K, const RadixSequence& R, Index d, int k,
                                    std::uint64_t cube, const std::vector<Operator>& v) {
  const std::uint64_t Mk = R.cumulative(k);
  const Index n = static_cast<Index>(v.size());
  Matrix S(n, d * d);
  Matrix Kq(static_cast<Index>(R.size()), n);
  for (Index j = 0; j < n; ++j) {
    S.row(j) = Eigen::Map<const ComplexVector>(v[static_cast<std::size_t>(j)].matrix().data(), d * d).transpose();
    Kq.col(j) = K.col(static_cast<Index>(cube + static_cast<std::uint64_t>(j) * Mk)).cast<Complex>();
  }
  return unstack(R, d, Kq * S / static_cast<double>(R.size()));
}

/// kernel_on_cube restricted to the complement of Q.
inline OperatorField kernel_on_cube_outside(const Eigen::MatrixXd& K, const RadixSequence& R, Index d, int k,
                                            std::uint64_t cube, const std::vector<Operator>& v) {
  OperatorField out = kernel_on_cube(K, R, d, k, cube, v);
  for (std::uint64_t t = cube; t < R.size(); t += R.cumulative(k)) out[t] = Operator::zero(d);
  return out;
}

}  // namespace detail

/// A_{k,Q} = sum_{n=k}^{N-1} |sigma~_n(b_off^{k,Q})| chi_{G \ Q}.
inline OperatorField offdiag_majorant(const CZPiece& piece, const SupKernelBank& bank) {
  const auto& R = bank.radix();
  const Index d = piece.p_Q.dim();
  OperatorField acc(R, d);
  for (int n = piece.k; n < R.depth(); ++n) {
    acc += abs(detail::kernel_on_cube_outside(bank.table(n), R, d, piece.k, piece.cube, piece.boff));
  }
  return acc;
}

/// sum_{n=k}^{N-1} sigma~_n(|b_d^{k,Q}|) chi_{G \ Q}.
inline OperatorField diagonal_majorant(const CZPiece& piece, const SupKernelBank& bank) {
  const auto& R = bank.radix();
  const Index d = piece.p_Q.dim();
  std::vector<Operator> mod;
  mod.reserve(piece.bd.size());
  for (const auto& x : piece.bd) mod.push_back(abs(x));
  OperatorField acc(R, d);
  for (int n = piece.k; n < R.depth(); ++n) {
    acc += detail::kernel_on_cube_outside(bank.table(n), R, d, piece.k, piece.cube, mod);
  }
  return acc;
}

/// Largest of ||q sigma~_n(b_d^{k,Q}) q|| on Q over all n < N and of
/// ||sigma~_n(b_d^{k,Q})|| for n < k, over all pieces.
inline double diagonal_vanishing_residual(const CZDecomposition& cz, const SupKernelBank& bank) {
  const auto& R = bank.radix();
  const int N = R.depth();
  const Index d = cz.f.fiber_dim();
  const OperatorField q = cz.cuculescu.terminal();
  double worst = 0.0;
  for (const auto& piece : cz.pieces) {
    const std::uint64_t Mk = R.cumulative(piece.k);
    for (int n = 0; n < N; ++n) {
      const OperatorField s = detail::kernel_on_cube(bank.table(n), R, d, piece.k, piece.cube, piece.bd);
      if (n < piece.k) worst = std::max(worst, opnorm(s));
      for (std::uint64_t t = piece.cube; t < R.size(); t += Mk) worst = std::max(worst, opnorm(q[t] * s[t] * q[t]));
    }
  }
  return worst;
}

struct WeakTypeCertificate {
  double lambda = 0.0;
  int depth = 0;
  double f_l1 = 0.0;
  OperatorField e1;
  OperatorField e2;
  OperatorField e;
  /// max_n ||e sigma~_n(f) e||
  double sup_bound = 0.0;
  /// phi(1 - e)
  double tail = 0.0;
  double tail_bd = 0.0;
  double tail_boff = 0.0;
  /// max_n ||e sigma~_n(b_d) e||, same for b_off, and max_n ||sigma~_n(g)||.
  double bd_sup = 0.0;
  double boff_sup = 0.0;
  double g_sup = 0.0;
  /// Bound on g: max_n int Ktilde_n times R_reg lambda.
  double g_bound = 0.0;
  double fitted_c_bd = 0.0;
  double fitted_c_boff = 0.0;
  double fitted_c_total = 0.0;
  double fitted_c_inf = 0.0;
  /// Largest excess of e over q in the semidefinite order.
  double e_below_q = 0.0;
  bool passed = true;
  std::string message;
};

/// Builds e1, e2, e from the majorants of the bad parts and verifies the
/// compressed bounds; the sums over n run over 0 <= n < N.
inline WeakTypeCertificate weak11_certificate(const OperatorField& f, double lambda, const SupKernelBank& bank) {
  const CZDecomposition cz = cz_decompose(f, lambda);
  const auto& R = f.radix();
  const Index d = f.fiber_dim();
  const int N = R.depth();
  WeakTypeCertificate c;
  c.lambda = lambda;
  c.depth = N;
  c.f_l1 = norm(f, NormSpec::lp(1.0));
  OperatorField Bd(R, d), Boff(R, d);
  for (const auto& piece : cz.pieces) {
    Bd += diagonal_majorant(piece, bank);
    Boff += offdiag_majorant(piece, bank);
  }
  const OperatorField q = cz.cuculescu.terminal();
  const Interval low = Interval::closed(-std::numeric_limits<double>::infinity(), lambda);
  c.e1 = projection_meet(spectral_projection(Bd, low), q);
  c.e2 = projection_meet(spectral_projection(Boff, low), q);
  c.e = projection_meet(c.e1, c.e2);
  c.tail = 1.0 - c.e.trace().real();
  c.tail_bd = 1.0 - c.e1.trace().real();
  c.tail_boff = 1.0 - c.e2.trace().real();
  for (std::uint64_t t = 0; t < R.size(); ++t) c.e_below_q = std::max(c.e_below_q, -order_gap(c.e[t], q[t]));

  std::vector<OperatorField> means;
  for (int n = 0; n < N; ++n) {
    const auto sbd = detail::tilde_sigma_linear(cz.b_d, n, bank);
    const auto sboff = detail::tilde_sigma_linear(cz.b_off, n, bank);
    const auto sg = detail::tilde_sigma_linear(cz.g, n, bank);
    c.bd_sup = std::max(c.bd_sup, opnorm(c.e * sbd * c.e));
    c.boff_sup = std::max(c.boff_sup, opnorm(c.e * sboff * c.e));
    c.g_sup = std::max(c.g_sup, opnorm(sg));
    means.push_back(tilde_sigma(f, n, bank));
    c.sup_bound = std::max(c.sup_bound, opnorm(c.e * means.back() * c.e));
  }
  c.g_bound = bank.max_integral() * cz.r_reg * lambda;
  c.fitted_c_bd = lambda * c.tail_bd / c.f_l1;
  c.fitted_c_boff = lambda * c.tail_boff / c.f_l1;
  c.fitted_c_total = lambda * c.tail / c.f_l1;
  c.fitted_c_inf = c.sup_bound / lambda;

  const auto cert = lambda_certificate(means, c.e, c.sup_bound, 1.0, LambdaFlavor::TwoSided, 1e-9);
  std::string msg;
  if (c.bd_sup > lambda + 1e-7) msg += "diagonal part exceeds lambda by " + detail::fmt(c.bd_sup - lambda) + "; ";
  if (c.boff_sup > lambda + 1e-7) msg += "off-diagonal part exceeds lambda by " + detail::fmt(c.boff_sup - lambda) + "; ";
  if (cz.checks.g_inf_applicable && c.g_sup > c.g_bound + 1e-8) msg += "good part exceeds its bound by " + detail::fmt(c.g_sup - c.g_bound) + "; ";
  if (c.e_below_q > tol::kMeet) msg += "e is not below q; ";
  if (!cert.passed) msg += "witness re-check failed: " + cert.message + "; ";
  c.passed = msg.empty();
  c.message = msg;
  return c;
}

/// ||A_{k,Q}||_1 against lambda^{1/2} phi(p_Q chi_Q)^{1/2} phi(p_Q f p_Q chi_Q)^{1/2}.
inline BoundReport verify_offdiag_l1(const CZDecomposition& cz, const SupKernelBank& bank, int k, std::uint64_t cube) {
  const auto& R = cz.f.radix();
  if (k < 1 || k > R.depth()) throw PreconditionError("verify_offdiag_l1: level out of range");
  if (cube >= R.cumulative(k)) throw PreconditionError("verify_offdiag_l1: cube out of range");
  const CZPiece* piece = nullptr;
  for (const auto& p : cz.pieces) {
    if (p.k == k && p.cube == cube) piece = &p;
  }
  if (!piece) throw PreconditionError("verify_offdiag_l1: no cached piece");
  const double self = opnorm(piece->p_Q * piece->f_Q * piece->q_Q);
  if (self > 1e-8) {
    throw VerificationError("verify_offdiag_l1: p_Q f_Q q_Q = " + detail::fmt(self) + " is not zero");
  }
  BoundReport rep;
  rep.claim = "AkQ";
  rep.depth = R.depth();
  rep.params = "k=" + std::to_string(k) + ";cube=" + std::to_string(cube) + ";lambda=" + format_real(cz.lambda);
  rep.samples = 1;
  const double Mk = static_cast<double>(R.cumulative(k));
  const double pq = piece->p_Q.trace().real() / Mk;
  double pfp = 0.0;
  for (std::uint64_t t = cube; t < R.size(); t += R.cumulative(k)) {
    pfp += (piece->p_Q * cz.f[t] * piece->p_Q).trace().real();
  }
  pfp /= static_cast<double>(R.size());
  rep.lhs = norm(offdiag_majorant(*piece, bank), NormSpec::lp(1.0));
  rep.rhs_unit = std::sqrt(cz.lambda) * std::sqrt(std::max(pq, 0.0)) * std::sqrt(std::max(pfp, 0.0));
  if (pq <= 1e-14) {
    rep.degenerate = true;
    rep.fitted_c = 0.0;
    rep.passed = rep.lhs <= 1e-9;
    return rep;
  }
  rep.fitted_c = rep.rhs_unit > 0.0 ? rep.lhs / rep.rhs_unit : (rep.lhs > 1e-12 ? INFINITY : 0.0);
  rep.passed = std::isfinite(rep.fitted_c);
  return rep;
}

}  // namespace vlab
