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

// Operator-valued functions on the truncated group: Fourier analysis,
// Cesaro means, conditional expectations and square functions.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vlab/kernels.hpp"
#include "vlab/matrix_core.hpp"

namespace vlab {

/// One fiber operator per group point; trace phi = average of tau.
class OperatorField {
 public:
  OperatorField() = default;

  OperatorField(RadixSequence radix, Index fiber_dim)
      : radix_(std::move(radix)), d_(fiber_dim), values_(radix_.size(), Operator::zero(fiber_dim)) {}

  OperatorField(RadixSequence radix, std::vector<Operator> values)
      : radix_(std::move(radix)), values_(std::move(values)) {
    if (values_.size() != radix_.size()) {
      throw PreconditionError("OperatorField: expected " + std::to_string(radix_.size()) +
                              " fibers, got " + std::to_string(values_.size()));
    }
    d_ = values_.empty() ? 0 : values_.front().dim();
    for (const auto& v : values_) {
      if (v.dim() != d_) throw PreconditionError("OperatorField: fibers differ in dimension");
    }
  }

  static OperatorField constant(const RadixSequence& radix, const Operator& x) {
    return OperatorField(radix, std::vector<Operator>(radix.size(), x));
  }
  static OperatorField identity(const RadixSequence& radix, Index d) {
    return constant(radix, Operator::identity(d));
  }
  /// t -> s(t) x
  static OperatorField scalar_times(const ScalarField& s, const Operator& x) {
    std::vector<Operator> v;
    v.reserve(s.radix.size());
    for (std::uint64_t t = 0; t < s.radix.size(); ++t) v.push_back(s(t) * x);
    return OperatorField(s.radix, std::move(v));
  }

  const RadixSequence& radix() const { return radix_; }
  Index fiber_dim() const { return d_; }
  std::uint64_t size() const { return values_.size(); }
  const Operator& operator[](std::uint64_t t) const { return values_[t]; }
  Operator& operator[](std::uint64_t t) { return values_[t]; }
  const std::vector<Operator>& values() const { return values_; }

  /// phi(f) = mean over points of tau(f(t)).
  Complex trace() const {
    Complex s = 0.0;
    for (const auto& v : values_) s += v.trace();
    return values_.empty() ? s : s / static_cast<double>(values_.size());
  }

  OperatorField adjoint() const { return map([](const Operator& x) { return x.adjoint(); }); }

  template <class F>
  OperatorField map(F&& fn) const {
    std::vector<Operator> v;
    v.reserve(values_.size());
    for (const auto& x : values_) v.push_back(fn(x));
    return OperatorField(radix_, std::move(v));
  }

  OperatorField& operator+=(const OperatorField& o) {
    check_shape(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  OperatorField& operator-=(const OperatorField& o) {
    check_shape(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  OperatorField& operator*=(Complex s) {
    for (auto& v : values_) v *= s;
    return *this;
  }

  friend OperatorField operator+(OperatorField a, const OperatorField& b) { return a += b; }
  friend OperatorField operator-(OperatorField a, const OperatorField& b) { return a -= b; }
  friend OperatorField operator*(Complex s, OperatorField a) { return a *= s; }
  friend OperatorField operator*(double s, OperatorField a) { return a *= Complex(s); }
  /// Pointwise product.
  friend OperatorField operator*(const OperatorField& a, const OperatorField& b) {
    a.check_shape(b);
    std::vector<Operator> v;
    v.reserve(a.values_.size());
    for (std::size_t i = 0; i < a.values_.size(); ++i) v.push_back(a.values_[i] * b.values_[i]);
    return OperatorField(a.radix_, std::move(v));
  }

  void check_shape(const OperatorField& o) const {
    if (!(o.radix_ == radix_) || o.d_ != d_) {
      throw PreconditionError("OperatorField: shape mismatch");
    }
  }

 private:
  RadixSequence radix_;
  Index d_ = 0;
  std::vector<Operator> values_;
};

inline SingularProfile mu_profile(const OperatorField& f) {
  std::vector<SingularProfile> parts;
  parts.reserve(f.size());
  for (const auto& v : f.values()) parts.push_back(mu_profile(v));
  return merge_profiles(parts);
}

inline double norm(const OperatorField& f, NormSpec spec) { return norm(mu_profile(f), spec); }

/// sup_t ||f(t)||
inline double opnorm(const OperatorField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s = std::max(s, opnorm(v));
  return s;
}

/// Pointwise (f*f)^{1/2}.
inline OperatorField abs(const OperatorField& f) {
  return f.map([](const Operator& x) { return abs(x); });
}

/// Smallest fiber eigenvalue; requires self-adjoint fibers.
inline double min_eigenvalue(const OperatorField& f) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : f.values()) m = std::min(m, min_eigenvalue(v));
  return f.size() ? m : 0.0;
}

inline void require_positive(const OperatorField& f, const char* who, double eps = 1e-9) {
  for (std::uint64_t t = 0; t < f.size(); ++t) {
    const double defect = f[t].hermiticity_defect();
    if (defect > tol::kSelfAdjoint) {
      throw PreconditionError(std::string(who) + ": fiber " + std::to_string(t) +
                              " is not self-adjoint (" + detail::fmt(defect) + ")");
    }
    const double m = min_eigenvalue(f[t]);
    if (m < -eps) {
      throw PreconditionError(std::string(who) + ": field is not positive, fiber " +
                              std::to_string(t) + " has eigenvalue " + detail::fmt(m));
    }
  }
}

/// Pointwise spectral projection.
inline OperatorField spectral_projection(const OperatorField& f, const Interval& b) {
  return f.map([&](const Operator& x) { return spectral_projection(x, b).op(); });
}

/// Pointwise meet of two projection fields.
inline OperatorField projection_meet(const OperatorField& e, const OperatorField& q) {
  e.check_shape(q);
  std::vector<Operator> v;
  v.reserve(e.size());
  for (std::uint64_t t = 0; t < e.size(); ++t) {
    v.push_back(projection_meet(Projection(e[t]), Projection(q[t])).op());
  }
  return OperatorField(e.radix(), std::move(v));
}

/// Throws unless every fiber is a projection.
inline void require_projection(const OperatorField& e) {
  for (const auto& v : e.values()) Projection{v};
}

namespace detail {

/// Rows are points, columns the column-major fiber entries.
inline Matrix stack(const OperatorField& f) {
  const Index d2 = f.fiber_dim() * f.fiber_dim();
  Matrix s(static_cast<Index>(f.size()), d2);
  for (std::uint64_t t = 0; t < f.size(); ++t) {
    s.row(static_cast<Index>(t)) = Eigen::Map<const ComplexVector>(f[t].matrix().data(), d2).transpose();
  }
  return s;
}

inline OperatorField unstack(const RadixSequence& radix, Index d, const Matrix& s) {
  std::vector<Operator> v;
  v.reserve(static_cast<std::size_t>(s.rows()));
  for (Index t = 0; t < s.rows(); ++t) {
    ComplexVector row = s.row(t).transpose();
    v.emplace_back(Eigen::Map<const Matrix>(row.data(), d, d));
  }
  return OperatorField(radix, std::move(v));
}

inline void require_same_radix(const OperatorField& f, const PsiTable& psi) {
  if (!(f.radix() == psi.radix())) throw PreconditionError("field and system have different radix");
}

}  // namespace detail

/// All Fourier coefficients, stacked: row j holds fhat(j).
inline Matrix fourier_coeff_matrix(const OperatorField& f, const PsiTable& psi) {
  detail::require_same_radix(f, psi);
  return psi.matrix().conjugate() * detail::stack(f) / static_cast<double>(psi.size());
}

inline Operator unstack_operator(const Matrix& coeffs, Index j, Index d) {
  ComplexVector row = coeffs.row(j).transpose();
  return Operator(Eigen::Map<const Matrix>(row.data(), d, d));
}

/// fhat(n) = int f(t) conj(psi_n(t)) dt.
inline Operator fourier_coeff(const OperatorField& f, std::uint64_t n, const PsiTable& psi) {
  detail::require_same_radix(f, psi);
  psi.radix().check_index(n, "frequency");
  const Index d = f.fiber_dim();
  Matrix acc = Matrix::Zero(d, d);
  for (std::uint64_t t = 0; t < f.size(); ++t) acc += std::conj(psi(n, t)) * f[t].matrix();
  return Operator(acc / static_cast<double>(f.size()));
}

inline std::vector<Operator> fourier_coeffs(const OperatorField& f, const PsiTable& psi) {
  const Matrix c = fourier_coeff_matrix(f, psi);
  std::vector<Operator> out;
  out.reserve(static_cast<std::size_t>(c.rows()));
  for (Index j = 0; j < c.rows(); ++j) out.push_back(unstack_operator(c, j, f.fiber_dim()));
  return out;
}

/// sum_j w(j) fhat(j) psi_j.
inline OperatorField apply_multiplier(const OperatorField& f, const RealVector& w, const PsiTable& psi) {
  if (w.size() != static_cast<Index>(psi.size())) throw PreconditionError("apply_multiplier: wrong length");
  const Matrix c = fourier_coeff_matrix(f, psi);
  const Matrix s = psi.matrix().transpose() * (w.cast<Complex>().asDiagonal() * c);
  return detail::unstack(f.radix(), f.fiber_dim(), s);
}

inline RealVector cesaro_weights(std::uint64_t n, std::uint64_t size) {
  RealVector w = RealVector::Zero(static_cast<Index>(size));
  for (std::uint64_t j = 0; j < n && j < size; ++j) {
    w(static_cast<Index>(j)) = 1.0 - static_cast<double>(j) / static_cast<double>(n);
  }
  return w;
}

/// S_n f = sum_{j<n} fhat(j) psi_j, 0 <= n <= M_N.
inline OperatorField partial_sum(const OperatorField& f, std::uint64_t n, const PsiTable& psi) {
  if (n > psi.size()) throw PreconditionError("partial_sum: n exceeds M_N");
  RealVector w = RealVector::Zero(static_cast<Index>(psi.size()));
  w.head(static_cast<Index>(n)).setOnes();
  return apply_multiplier(f, w, psi);
}

/// sigma_n f = sum_{j<n} (1 - j/n) fhat(j) psi_j, 1 <= n <= M_N.
inline OperatorField cesaro(const OperatorField& f, std::uint64_t n, const PsiTable& psi) {
  if (n == 0 || n > psi.size()) throw PreconditionError("cesaro: n must lie in [1, M_N]");
  return apply_multiplier(f, cesaro_weights(n, psi.size()), psi);
}

/// eta -> int K(eta, t) f(t) dt.
inline OperatorField apply_kernel(const Matrix& kernel_values, const OperatorField& f) {
  if (kernel_values.rows() != static_cast<Index>(f.size())) throw PreconditionError("apply_kernel: size mismatch");
  return detail::unstack(f.radix(), f.fiber_dim(),
                         kernel_values * detail::stack(f) / static_cast<double>(f.size()));
}

/// Cesaro mean through the Fejer kernel table.
inline OperatorField cesaro_kernel_form(const OperatorField& f, std::uint64_t n, const PsiTable& psi) {
  detail::require_same_radix(f, psi);
  return apply_kernel(kernel(KernelSpec::fejer(n), psi).values, f);
}

/// Cube average E_k f, 0 <= k <= N.
inline OperatorField cond_exp(const OperatorField& f, int k) {
  const auto& R = f.radix();
  if (k < 0 || k > R.depth()) throw PreconditionError("cond_exp: level out of range");
  const std::uint64_t Mk = R.cumulative(k);
  const Index d = f.fiber_dim();
  std::vector<Operator> avg(Mk, Operator::zero(d));
  std::vector<Matrix> acc(Mk, Matrix::Zero(d, d));
  for (std::uint64_t t = 0; t < f.size(); ++t) acc[t % Mk] += f[t].matrix();
  const double w = static_cast<double>(Mk) / static_cast<double>(f.size());
  for (std::uint64_t c = 0; c < Mk; ++c) avg[c] = Operator(acc[c] * w);
  std::vector<Operator> out;
  out.reserve(f.size());
  for (std::uint64_t t = 0; t < f.size(); ++t) out.push_back(avg[t % Mk]);
  return OperatorField(R, std::move(out));
}

/// Sup kernels Ktilde_n for n < N, built once per system.
class SupKernelBank {
 public:
  explicit SupKernelBank(const PsiTable& psi) : radix_(psi.radix()) {
    for (int n = 0; n < radix_.depth(); ++n) {
      tables_.push_back(kernel(KernelSpec::sup(static_cast<std::uint64_t>(n)), psi).values.real());
    }
  }
  const RadixSequence& radix() const { return radix_; }
  const Eigen::MatrixXd& table(int n) const {
    if (n < 0 || n >= radix_.depth()) throw PreconditionError("sup kernel index must be below the depth");
    return tables_[static_cast<std::size_t>(n)];
  }
  /// max over n, eta of int Ktilde_n(eta, t) dt.
  double max_integral() const {
    double best = 0.0;
    for (const auto& tb : tables_) best = std::max(best, tb.rowwise().sum().maxCoeff() / static_cast<double>(tb.cols()));
    return best;
  }

 private:
  RadixSequence radix_;
  std::vector<Eigen::MatrixXd> tables_;
};

namespace detail {

/// Linear extension of tilde_sigma to arbitrary fields.
inline OperatorField tilde_sigma_linear(const OperatorField& f, int n, const SupKernelBank& bank) {
  return apply_kernel(bank.table(n).cast<Complex>(), f);
}

}  // namespace detail

/// sigma~_n f(eta) = int Ktilde_n(eta, t) f(t) dt for positive f, n < N.
inline OperatorField tilde_sigma(const OperatorField& f, int n, const SupKernelBank& bank) {
  if (!(f.radix() == bank.radix())) throw PreconditionError("tilde_sigma: radix mismatch");
  require_positive(f, "tilde_sigma");
  return detail::tilde_sigma_linear(f, n, bank);
}

/// sigma+_n f(eta) = int |K_n(eta, t)| f(t) dt.
inline OperatorField sigma_plus(const OperatorField& f, std::uint64_t n, const PsiTable& psi) {
  detail::require_same_radix(f, psi);
  return apply_kernel(kernel(KernelSpec::fejer(n), psi).values.cwiseAbs().cast<Complex>(), f);
}

struct DominationReport {
  /// Smallest eigenvalue of sigma~_n f -/+ Re sigma_l f over l and points.
  double min_gap = 0.0;
  std::uint64_t worst_l = 0;
  std::uint64_t worst_point = 0;
  bool passed = true;
};

/// -sigma~_n f <= Re sigma_l f <= sigma~_n f for M_n <= l < M_{n+1}.
inline DominationReport verify_tilde_domination(const OperatorField& f, int n, const SupKernelBank& bank,
                                                const PsiTable& psi, double eps = 1e-9) {
  const auto st = tilde_sigma(f, n, bank);
  DominationReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  const auto& R = f.radix();
  for (std::uint64_t l = R.cumulative(n); l < R.cumulative(n + 1); ++l) {
    const Matrix K = kernel(KernelSpec::fejer(l), psi).values.real().cast<Complex>();
    const auto re = apply_kernel(K, f);
    for (std::uint64_t t = 0; t < f.size(); ++t) {
      for (double sign : {1.0, -1.0}) {
        const Operator diff = st[t] - sign * re[t];
        const double g = min_eigenvalue(Operator(0.5 * (diff.matrix() + diff.matrix().adjoint())));
        if (g < rep.min_gap) {
          rep.min_gap = g;
          rep.worst_l = l;
          rep.worst_point = t;
        }
      }
    }
  }
  rep.passed = rep.min_gap >= -eps;
  return rep;
}

/// df_1 = E_{l_1} f, df_i = E_{l_i} f - E_{l_{i-1}} f along increasing levels.
inline std::vector<OperatorField> martingale_differences(const OperatorField& f, const std::vector<int>& levels) {
  std::vector<OperatorField> out;
  OperatorField prev;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i && levels[i] <= levels[i - 1]) throw PreconditionError("martingale_differences: levels must increase");
    OperatorField cur = cond_exp(f, levels[i]);
    out.push_back(i ? cur - prev : cur);
    prev = std::move(cur);
  }
  return out;
}

inline std::vector<int> standard_levels(const RadixSequence& R) {
  std::vector<int> v;
  for (int k = 1; k <= R.depth(); ++k) v.push_back(k);
  return v;
}

/// (sum |x_k|^2)^{1/2} pointwise; row = true uses |x_k*|^2.
inline OperatorField square_function(const std::vector<OperatorField>& xs, bool row = false) {
  if (xs.empty()) throw PreconditionError("square_function: empty sequence");
  OperatorField acc(xs.front().radix(), xs.front().fiber_dim());
  for (const auto& x : xs) {
    x.check_shape(acc);
    for (std::uint64_t t = 0; t < x.size(); ++t) {
      acc[t] += row ? x[t] * x[t].adjoint() : x[t].adjoint() * x[t];
    }
  }
  return acc.map([](const Operator& s) { return sqrt_psd(s); });
}

inline void require_hardy_exponent(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw PreconditionError("Hardy norm: p must lie in [1, 2], got " + detail::fmt(p));
}

/// ||S_c(f)||_p with differences along the given levels.
inline double hardy_c_norm(const OperatorField& f, double p, const std::vector<int>& levels) {
  require_hardy_exponent(p);
  return norm(square_function(martingale_differences(f, levels)), NormSpec::lp(p));
}

inline double hardy_c_norm(const OperatorField& f, double p) {
  return hardy_c_norm(f, p, standard_levels(f.radix()));
}

/// Row variant: the column norm of the adjoint field.
inline double hardy_r_norm(const OperatorField& f, double p, const std::vector<int>& levels) {
  require_hardy_exponent(p);
  return norm(square_function(martingale_differences(f, levels), true), NormSpec::lp(p));
}

inline double hardy_r_norm(const OperatorField& f, double p) {
  return hardy_r_norm(f, p, standard_levels(f.radix()));
}

}  // namespace vlab
