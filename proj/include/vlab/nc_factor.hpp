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

// Finite truncations of the hyperfinite factor as tensor products of matrix
// algebras, with the matrix Vilenkin system W_n, Fourier analysis, Cesaro
// means and conditional expectations onto the tensor prefixes.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vlab/matrix_core.hpp"
#include "vlab/radix.hpp"

namespace vlab {

/// R_N = M_{m_0} (x) ... (x) M_{m_{N-1}} with the doubled radix 2m.
class FactorContext {
 public:
  FactorContext() = default;
  explicit FactorContext(RadixSequence base) : base_(std::move(base)), doubled_(base_.doubled()) {
    if (base_.depth() < 1) throw PreconditionError("FactorContext: depth must be >= 1");
    dim_ = static_cast<Index>(base_.size());
  }

  const RadixSequence& base() const { return base_; }
  const RadixSequence& doubled() const { return doubled_; }
  int depth() const { return base_.depth(); }
  /// D = prod m_k.
  Index dim() const { return dim_; }
  /// M_{2N} = D^2, the number of basis elements.
  std::uint64_t size() const { return doubled_.size(); }
  /// Dimension of the first k tensor factors.
  Index prefix_dim(int k) const { return static_cast<Index>(base_.cumulative(k)); }

 private:
  RadixSequence base_;
  RadixSequence doubled_;
  Index dim_ = 1;
};

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

/// A = diag(exp(2 pi i j / m)).
inline Matrix clock(int m) {
  Matrix a = Matrix::Zero(m, m);
  for (int j = 0; j < m; ++j) a(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * j / m);
  return a;
}

/// B = sum_j e_{j, j+1 mod m}.
inline Matrix shift(int m) {
  Matrix b = Matrix::Zero(m, m);
  for (int j = 0; j < m; ++j) b(j, (j + 1) % m) = 1.0;
  return b;
}

inline Matrix matrix_power(const Matrix& a, int e) {
  Matrix out = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < e; ++i) out = out * a;
  return out;
}

/// tau(x y*) with the normalized trace.
inline Complex inner(const Matrix& x, const Matrix& y) {
  return x.cwiseProduct(y.conjugate()).sum() / static_cast<double>(x.rows());
}

}  // namespace detail

/// The factor A_k^{eta_{2k}} B_k^{eta_{2k+1}}.
inline Matrix walsh_factor(int m, int a_exp, int b_exp) {
  return detail::matrix_power(detail::clock(m), a_exp) * detail::matrix_power(detail::shift(m), b_exp);
}

struct WalshUnitary {
  std::uint64_t n = 0;
  Digits eta;
  Operator matrix;
};

/// W_n = (x)_k A_k^{eta_{2k}} B_k^{eta_{2k+1}} with eta the digits of n in 2m;
/// factor 0 is the leftmost tensor factor.
inline Operator walsh_matrix(std::uint64_t n, const FactorContext& ctx) {
  ctx.doubled().check_index(n, "build_W");
  const Digits eta = ctx.doubled().to_digits(n);
  Matrix w = Matrix::Identity(1, 1);
  for (int k = 0; k < ctx.depth(); ++k) {
    w = detail::kron(w, walsh_factor(ctx.base().radix(k), eta[2 * k], eta[2 * k + 1]));
  }
  return Operator(std::move(w));
}

/// W_n with its unitarity and trace conditions verified.
inline WalshUnitary build_W(std::uint64_t n, const FactorContext& ctx) {
  WalshUnitary w{n, {}, walsh_matrix(n, ctx)};
  w.eta = ctx.doubled().to_digits(n);
  const Index D = ctx.dim();
  const double unit = detail::spectral_norm(w.matrix.matrix() * w.matrix.matrix().adjoint() - Matrix::Identity(D, D));
  if (unit > 1e-10) throw VerificationError("build_W: W_" + std::to_string(n) + " not unitary, defect " + detail::fmt(unit));
  const Complex tr = w.matrix.trace();
  if (std::abs(tr - (n == 0 ? 1.0 : 0.0)) > 1e-10) {
    throw VerificationError("build_W: trace of W_" + std::to_string(n) + " is " + detail::fmt(tr.real()));
  }
  return w;
}

/// All W_n, n < M_{2N}.
inline std::vector<Operator> walsh_basis(const FactorContext& ctx) {
  std::vector<Operator> out;
  out.reserve(ctx.size());
  for (std::uint64_t n = 0; n < ctx.size(); ++n) out.push_back(walsh_matrix(n, ctx));
  return out;
}

/// Gram matrix tau(W_m W_n*).
inline Matrix walsh_gram(const std::vector<Operator>& basis) {
  const Index n = static_cast<Index>(basis.size());
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) g(i, j) = detail::inner(basis[i].matrix(), basis[j].matrix());
  }
  return g;
}

/// W_m W_n = omega W_{m triangle n} and W_n* = u W_{-n}.
struct StructureConstants {
  Complex omega;
  Complex u;
  std::uint64_t sum_index = 0;
  std::uint64_t neg_index = 0;
  double omega_residual = 0.0;
  double u_residual = 0.0;
};

inline StructureConstants structure_constants(std::uint64_t m, std::uint64_t n, const FactorContext& ctx) {
  const auto& R = ctx.doubled();
  R.check_index(m, "structure_constants");
  R.check_index(n, "structure_constants");
  StructureConstants s;
  s.sum_index = R.triangle_add(m, n);
  s.neg_index = R.negate(n);
  const Matrix wm = walsh_matrix(m, ctx).matrix();
  const Matrix wn = walsh_matrix(n, ctx).matrix();
  const Matrix ws = walsh_matrix(s.sum_index, ctx).matrix();
  const Matrix wneg = walsh_matrix(s.neg_index, ctx).matrix();
  const Matrix prod = wm * wn;
  s.omega = detail::inner(prod, ws);
  s.omega_residual = detail::spectral_norm(prod - s.omega * ws);
  s.u = detail::inner(wn.adjoint(), wneg);
  s.u_residual = detail::spectral_norm(wn.adjoint() - s.u * wneg);
  auto fail = [&](const char* what, double v) {
    throw VerificationError(std::string("structure_constants: ") + what + " " + detail::fmt(v) + " for m=" +
                            std::to_string(m) + ", n=" + std::to_string(n));
  };
  if (s.omega_residual > 1e-9) fail("product deviation", s.omega_residual);
  if (s.u_residual > 1e-9) fail("adjoint deviation", s.u_residual);
  if (std::abs(std::abs(s.omega) - 1.0) > 1e-10) fail("|omega| - 1 =", std::abs(s.omega) - 1.0);
  if (std::abs(std::abs(s.u) - 1.0) > 1e-10) fail("|u| - 1 =", std::abs(s.u) - 1.0);
  return s;
}

/// Fourier analysis on R_N against a cached basis.
class FactorBasis {
 public:
  explicit FactorBasis(FactorContext ctx) : ctx_(std::move(ctx)), basis_(walsh_basis(ctx_)) {}

  const FactorContext& context() const { return ctx_; }
  const std::vector<Operator>& basis() const { return basis_; }
  const Operator& W(std::uint64_t n) const {
    ctx_.doubled().check_index(n, "W");
    return basis_[n];
  }
  std::uint64_t size() const { return basis_.size(); }

  /// xhat(k) = tau(x W_k*).
  Complex fourier(const Operator& x, std::uint64_t k) const {
    check(x);
    return detail::inner(x.matrix(), W(k).matrix());
  }
  ComplexVector fourier_all(const Operator& x) const {
    check(x);
    ComplexVector c(static_cast<Index>(size()));
    for (std::uint64_t k = 0; k < size(); ++k) c(static_cast<Index>(k)) = detail::inner(x.matrix(), basis_[k].matrix());
    return c;
  }
  /// sum_k w_k c_k W_k.
  Operator synthesize(const ComplexVector& c, const RealVector& w) const {
    if (c.size() != static_cast<Index>(size()) || w.size() != c.size()) {
      throw PreconditionError("synthesize: coefficient length mismatch");
    }
    Matrix out = Matrix::Zero(ctx_.dim(), ctx_.dim());
    for (Index k = 0; k < c.size(); ++k) {
      if (w(k) != 0.0) out += (w(k) * c(k)) * basis_[static_cast<std::size_t>(k)].matrix();
    }
    return Operator(std::move(out));
  }
  Operator synthesize(const ComplexVector& c) const { return synthesize(c, RealVector::Ones(c.size())); }

  /// S_n x = sum_{k<n} xhat(k) W_k, 0 <= n <= M_{2N}.
  Operator partial_sum(const Operator& x, std::uint64_t n) const {
    if (n > size()) throw PreconditionError("nc_partial_sum: n exceeds M_{2N}");
    RealVector w = RealVector::Zero(static_cast<Index>(size()));
    w.head(static_cast<Index>(n)).setOnes();
    return synthesize(fourier_all(x), w);
  }
  /// sigma_n x = sum_{k<n} (1 - k/n) xhat(k) W_k, 1 <= n <= M_{2N}.
  Operator cesaro(const Operator& x, std::uint64_t n) const {
    if (n < 1 || n > size()) throw PreconditionError("nc_cesaro: n must lie in [1, M_{2N}]");
    return synthesize(fourier_all(x), cesaro_weights_(n));
  }

 private:
  void check(const Operator& x) const {
    if (x.dim() != ctx_.dim()) throw PreconditionError("FactorBasis: operator dimension differs from D");
  }
  RealVector cesaro_weights_(std::uint64_t n) const {
    RealVector w = RealVector::Zero(static_cast<Index>(size()));
    for (std::uint64_t k = 0; k < n; ++k) w(static_cast<Index>(k)) = 1.0 - static_cast<double>(k) / static_cast<double>(n);
    return w;
  }

  FactorContext ctx_;
  std::vector<Operator> basis_;
};

/// E_k x: normalized partial trace over factors k..N-1, tensored with the identity.
inline Operator factor_cond_exp(const Operator& x, int k, const FactorContext& ctx) {
  if (k < 0 || k > ctx.depth()) throw PreconditionError("factor_cond_exp: level out of range");
  if (x.dim() != ctx.dim()) throw PreconditionError("factor_cond_exp: operator dimension differs from D");
  const Index head = ctx.prefix_dim(k);
  const Index tail = ctx.dim() / head;
  Matrix reduced = Matrix::Zero(head, head);
  for (Index i = 0; i < head; ++i) {
    for (Index j = 0; j < head; ++j) {
      Complex s = 0.0;
      for (Index c = 0; c < tail; ++c) s += x.matrix()(i * tail + c, j * tail + c);
      reduced(i, j) = s / static_cast<double>(tail);
    }
  }
  return Operator(detail::kron(reduced, Matrix::Identity(tail, tail)));
}

/// dx_1 = E_1 x, dx_k = E_k x - E_{k-1} x for k = 1..N.
inline std::vector<Operator> factor_martingale_differences(const Operator& x, const FactorContext& ctx) {
  std::vector<Operator> out;
  Operator prev;
  for (int k = 1; k <= ctx.depth(); ++k) {
    Operator cur = factor_cond_exp(x, k, ctx);
    out.push_back(k > 1 ? cur - prev : cur);
    prev = std::move(cur);
  }
  return out;
}

/// ||(sum |dx_k|^2)^{1/2}||_p, or with |dx_k*|^2 when row is set, 1 <= p <= 2.
inline double factor_hardy_norm(const Operator& x, double p, const FactorContext& ctx, bool row = false) {
  if (!(p >= 1.0 && p <= 2.0)) throw PreconditionError("factor_hardy_norm: p must lie in [1, 2]");
  Matrix acc = Matrix::Zero(ctx.dim(), ctx.dim());
  for (const auto& d : factor_martingale_differences(x, ctx)) {
    acc += row ? Matrix(d.matrix() * d.matrix().adjoint()) : Matrix(d.matrix().adjoint() * d.matrix());
  }
  return norm(sqrt_psd(Operator(acc)), NormSpec::lp(p));
}

/// Pauli-type check for m all 2: each tensor factor of W_n is one of I, Z, X, ZX.
inline bool is_pauli_string(std::uint64_t n, const FactorContext& ctx) {
  for (int k = 0; k < ctx.depth(); ++k) {
    if (ctx.base().radix(k) != 2) return false;
  }
  const Digits eta = ctx.doubled().to_digits(n);
  const Matrix Z = (Matrix(2, 2) << 1, 0, 0, -1).finished();
  const Matrix X = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  Matrix w = Matrix::Identity(1, 1);
  for (int k = 0; k < ctx.depth(); ++k) {
    Matrix f = Matrix::Identity(2, 2);
    if (eta[2 * k]) f = f * Z;
    if (eta[2 * k + 1]) f = f * X;
    w = detail::kron(w, f);
  }
  return detail::spectral_norm(w - walsh_matrix(n, ctx).matrix()) < 1e-12;
}

}  // namespace vlab
