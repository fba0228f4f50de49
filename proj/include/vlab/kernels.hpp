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

// Dirichlet, Fejer, block and sup kernels of a Vilenkin-like system.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vlab/vilenkin.hpp"

namespace vlab {

enum class KernelKind { Dirichlet, Fejer, Block, Sup };

struct KernelSpec {
  KernelKind kind = KernelKind::Dirichlet;
  std::uint64_t n = 0;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  static KernelSpec dirichlet(std::uint64_t n) { return {KernelKind::Dirichlet, n, 0, 0}; }
  static KernelSpec fejer(std::uint64_t n) { return {KernelKind::Fejer, n, 0, 0}; }
  static KernelSpec block(std::uint64_t a, std::uint64_t b) { return {KernelKind::Block, 0, a, b}; }
  static KernelSpec sup(std::uint64_t n) { return {KernelKind::Sup, n, 0, 0}; }

  std::string label() const {
    switch (kind) {
      case KernelKind::Dirichlet: return "D_" + std::to_string(n);
      case KernelKind::Fejer: return "K_" + std::to_string(n);
      case KernelKind::Block: return "K_" + std::to_string(a) + "," + std::to_string(b);
      case KernelKind::Sup: return "Ktilde_" + std::to_string(n);
    }
    return "?";
  }
};

/// Kernel values indexed (eta, t).
struct KernelTable {
  KernelSpec spec;
  Matrix values;

  std::string label() const { return spec.label(); }
  Complex operator()(std::uint64_t eta, std::uint64_t t) const {
    return values(static_cast<Index>(eta), static_cast<Index>(t));
  }
};

namespace detail {

inline void check_kernel_spec(const KernelSpec& s, const RadixSequence& r) {
  const std::uint64_t M = r.size();
  auto reject = [&](const std::string& why) {
    throw PreconditionError("kernel " + s.label() + ": " + why);
  };
  switch (s.kind) {
    case KernelKind::Dirichlet:
      if (s.n > M) reject("n exceeds M_N = " + std::to_string(M));
      break;
    case KernelKind::Fejer:
      if (s.n == 0) reject("n must be >= 1");
      if (s.n > M) reject("n exceeds M_N = " + std::to_string(M));
      break;
    case KernelKind::Block:
      if (s.b == 0) reject("b must be >= 1");
      if (s.a + s.b - 1 > M) reject("a + b - 1 exceeds M_N = " + std::to_string(M));
      break;
    case KernelKind::Sup:
      if (s.n >= static_cast<std::uint64_t>(r.depth())) reject("n must be below the depth");
      break;
  }
}

}  // namespace detail

/// Builds the kernel directly from its defining sums of Dirichlet kernels.
inline KernelTable kernel(const KernelSpec& spec, const PsiTable& psi) {
  detail::check_kernel_spec(spec, psi.radix());
  const Index M = static_cast<Index>(psi.size());
  const Matrix& P = psi.matrix();
  Matrix D = Matrix::Zero(M, M);
  auto add_term = [&](std::uint64_t k) {
    D.noalias() += P.row(static_cast<Index>(k)).transpose() * P.row(static_cast<Index>(k)).conjugate();
  };
  KernelTable out{spec, Matrix::Zero(M, M)};
  switch (spec.kind) {
    case KernelKind::Dirichlet:
      for (std::uint64_t k = 0; k < spec.n; ++k) add_term(k);
      out.values = D;
      break;
    case KernelKind::Fejer: {
      for (std::uint64_t i = 1; i <= spec.n; ++i) {
        add_term(i - 1);
        out.values += D;
      }
      out.values /= static_cast<double>(spec.n);
      break;
    }
    case KernelKind::Block: {
      for (std::uint64_t i = 1; i <= spec.a + spec.b - 1; ++i) {
        add_term(i - 1);
        if (i >= spec.a) out.values += D;
      }
      break;
    }
    case KernelKind::Sup: {
      const auto& R = psi.radix();
      const std::uint64_t lo = R.cumulative(static_cast<int>(spec.n));
      const std::uint64_t hi = R.cumulative(static_cast<int>(spec.n) + 1);
      Matrix C = Matrix::Zero(M, M);
      Eigen::MatrixXd best = Eigen::MatrixXd::Zero(M, M);
      for (std::uint64_t l = 1; l < hi; ++l) {
        add_term(l - 1);
        C += D;
        if (l >= lo) best = best.cwiseMax((C / static_cast<double>(l)).cwiseAbs());
      }
      out.values = best.cast<Complex>();
      break;
    }
  }
  return out;
}

/// Closed-form Fourier multiplier of a linear kernel at frequency j.
inline double kernel_coefficient(const KernelSpec& spec, std::uint64_t j) {
  switch (spec.kind) {
    case KernelKind::Dirichlet: return j < spec.n ? 1.0 : 0.0;
    case KernelKind::Fejer:
      if (spec.n == 0) throw PreconditionError("kernel_coefficient: Fejer index must be >= 1");
      return j < spec.n ? static_cast<double>(spec.n - j) / static_cast<double>(spec.n) : 0.0;
    case KernelKind::Block: {
      const std::uint64_t last = spec.a + spec.b - 1;
      const std::uint64_t first = std::max(spec.a, j + 1);
      return last >= first ? static_cast<double>(last - first + 1) : 0.0;
    }
    case KernelKind::Sup: break;
  }
  throw PreconditionError("kernel_coefficient: the sup kernel has no multiplier");
}

/// int int K(eta,t) conj(psi_j(eta)) psi_j(t).
inline Complex kernel_coefficient_integral(const KernelTable& table, const PsiTable& psi,
                                           std::uint64_t j) {
  psi.radix().check_index(j, "frequency");
  const auto row = psi.matrix().row(static_cast<Index>(j));
  const Complex v = (row.conjugate() * table.values * row.transpose())(0, 0);
  const double M = static_cast<double>(psi.size());
  return v / (M * M);
}

struct CoefficientCheck {
  double formula = 0.0;
  Complex integral;
  double residual = 0.0;
};

/// Multiplier value, cross-checked against the double integral.
inline CoefficientCheck kernel_coefficients(const KernelSpec& spec, std::uint64_t j,
                                            const PsiTable& psi, double eps = 1e-9) {
  psi.radix().check_index(j, "frequency");
  CoefficientCheck c;
  c.formula = kernel_coefficient(spec, j);
  c.integral = kernel_coefficient_integral(kernel(spec, psi), psi, j);
  c.residual = std::abs(c.integral - c.formula);
  if (c.residual > eps) {
    throw VerificationError("kernel_coefficients: " + spec.label() + " at j=" +
                            std::to_string(j) + " disagrees by " + detail::fmt(c.residual));
  }
  return c;
}

/// All Dirichlet and Fejer values for one pair (eta, t), by prefix sums.
class PairSeries {
 public:
  PairSeries(const PsiTable& psi, std::uint64_t eta, std::uint64_t t) : radix_(&psi.radix()) {
    const std::uint64_t M = psi.size();
    d_.assign(M + 1, 0.0);
    c_.assign(M + 1, 0.0);
    for (std::uint64_t k = 0; k < M; ++k) {
      d_[k + 1] = d_[k] + psi(k, eta) * std::conj(psi(k, t));
      c_[k + 1] = c_[k] + d_[k + 1];
    }
  }

  std::uint64_t size() const { return d_.size() - 1; }
  /// D_n, 0 <= n <= M_N.
  Complex dirichlet(std::uint64_t n) const { return d_.at(n); }
  /// K_n, 1 <= n <= M_N.
  Complex fejer(std::uint64_t n) const { return c_.at(n) / static_cast<double>(n); }
  /// K_{a,b} = sum_{k=a}^{a+b-1} D_k.
  Complex block(std::uint64_t a, std::uint64_t b) const {
    const std::uint64_t last = a + b - 1;
    return c_.at(last) - (a > 0 ? c_.at(a - 1) : Complex(0.0));
  }
  /// Ktilde_n = max over M_n <= l < M_{n+1} of |K_l|.
  double sup_fejer(int n) const {
    double best = 0.0;
    for (std::uint64_t l = radix_->cumulative(n); l < radix_->cumulative(n + 1); ++l) {
      best = std::max(best, std::abs(fejer(l)));
    }
    return best;
  }
  /// max over lo <= l < hi of |K_l|; 0 for an empty range.
  double sup_fejer_range(std::uint64_t lo, std::uint64_t hi) const {
    double best = 0.0;
    for (std::uint64_t l = std::max<std::uint64_t>(lo, 1); l < hi; ++l) {
      best = std::max(best, std::abs(fejer(l)));
    }
    return best;
  }

 private:
  const RadixSequence* radix_;
  std::vector<Complex> d_;
  std::vector<Complex> c_;
};

/// Series for every pair, stored row-major by (eta, t).
inline std::vector<PairSeries> all_pair_series(const PsiTable& psi) {
  std::vector<PairSeries> out;
  const std::uint64_t M = psi.size();
  out.reserve(M * M);
  for (std::uint64_t eta = 0; eta < M; ++eta) {
    for (std::uint64_t t = 0; t < M; ++t) out.emplace_back(psi, eta, t);
  }
  return out;
}

/// max |D_{M_n}(eta,t) - M_n [eta in I_n(t)]| over all pairs.
inline double dirichlet_indicator_residual(const PsiTable& psi, int n) {
  const auto& R = psi.radix();
  if (n < 0 || n > R.depth()) throw PreconditionError("dirichlet_indicator_residual: bad n");
  const auto D = kernel(KernelSpec::dirichlet(R.cumulative(n)), psi);
  const double Mn = static_cast<double>(R.cumulative(n));
  double worst = 0.0;
  for (std::uint64_t eta = 0; eta < R.size(); ++eta) {
    for (std::uint64_t t = 0; t < R.size(); ++t) {
      const double target = agreement(R, eta, t) >= n ? Mn : 0.0;
      worst = std::max(worst, std::abs(D(eta, t) - target));
    }
  }
  return worst;
}

/// max over pairs of |l K_l - D_l - sum_b sum_{j < l_b} K_{l^{(b+1)} + j M_b, M_b}|,
/// where M_n <= l < M_{n+1}.  The blocks tile D_0, ..., D_{l-1} while l K_l
/// sums D_1, ..., D_l, hence the boundary term D_l (D_0 = 0).  With
/// boundary_term = false the bare block sum is compared.
inline double lkl_identity_residual(const std::vector<PairSeries>& series, const RadixSequence& R,
                                    std::uint64_t l, bool boundary_term = true) {
  if (l == 0 || l >= R.size()) throw PreconditionError("lkl_identity_residual: l out of range");
  int n = 0;
  while (R.cumulative(n + 1) <= l) ++n;
  double worst = 0.0;
  for (const auto& s : series) {
    Complex rhs = 0.0;
    for (int b = 0; b <= n; ++b) {
      const std::uint64_t base = R.upper(l, b + 1);
      for (int j = 0; j < R.digit(l, b); ++j) rhs += s.block(base + j * R.cumulative(b), R.cumulative(b));
    }
    if (boundary_term) rhs += s.dirichlet(l);
    worst = std::max(worst, std::abs(static_cast<double>(l) * s.fejer(l) - rhs));
  }
  return worst;
}

}  // namespace vlab
