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

// Vector-valued norms of operator sequences: square functions and
// certificates for the weak maximal quasi-norms.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vlab/operator_field.hpp"

namespace vlab {

namespace ops {

inline double sup_norm(const Operator& x) { return opnorm(x); }
inline double sup_norm(const OperatorField& x) { return opnorm(x); }
inline double phi(const Operator& x) { return x.trace().real(); }
inline double phi(const OperatorField& x) { return x.trace().real(); }
inline Operator identity_like(const Operator& x) { return Operator::identity(x.dim()); }
inline OperatorField identity_like(const OperatorField& x) {
  return OperatorField::identity(x.radix(), x.fiber_dim());
}
inline Operator zero_like(const Operator& x) { return Operator::zero(x.dim()); }
inline OperatorField zero_like(const OperatorField& x) { return OperatorField(x.radix(), x.fiber_dim()); }
inline Operator spectral(const Operator& x, const Interval& b) { return spectral_projection(x, b).op(); }
inline OperatorField spectral(const OperatorField& x, const Interval& b) { return spectral_projection(x, b); }
inline Operator meet(const Operator& e, const Operator& q) {
  return projection_meet(Projection(e), Projection(q)).op();
}
inline OperatorField meet(const OperatorField& e, const OperatorField& q) { return projection_meet(e, q); }
inline Operator mul(const Operator& a, const Operator& b) { return a * b; }
inline OperatorField mul(const OperatorField& a, const OperatorField& b) { return a * b; }
inline Operator sqrt_of(const Operator& x) { return sqrt_psd(x); }
inline OperatorField sqrt_of(const OperatorField& x) { return x.map([](const Operator& s) { return sqrt_psd(s); }); }
inline void require_projection(const Operator& e) { Projection{e}; }
inline void require_projection(const OperatorField& e) { vlab::require_projection(e); }
inline bool is_positive(const Operator& x, double eps) {
  return x.is_self_adjoint() && min_eigenvalue(x) >= -eps;
}
inline bool is_positive(const OperatorField& x, double eps) {
  for (const auto& v : x.values()) {
    if (!is_positive(v, eps)) return false;
  }
  return true;
}
/// All eigenvalues with their trace weights.
inline std::vector<double> eigenvalues(const Operator& x) {
  auto es = eigh(x);
  return {es.values.data(), es.values.data() + es.values.size()};
}
inline std::vector<double> eigenvalues(const OperatorField& x) {
  std::vector<double> out;
  for (const auto& v : x.values()) {
    auto e = eigenvalues(v);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

template <class Elem>
Elem sum_squares(const std::vector<Elem>& xs, bool row) {
  Elem acc = zero_like(xs.front());
  for (const auto& x : xs) acc += row ? mul(x, x.adjoint()) : mul(x.adjoint(), x);
  return acc;
}

}  // namespace ops

/// ||(sum |x_k|^2)^{1/2}||_p
template <class Elem>
double seq_l2c_norm(const std::vector<Elem>& xs, double p) {
  if (xs.empty()) return 0.0;
  return norm(ops::sqrt_of(ops::sum_squares(xs, false)), p >= 1e300 ? NormSpec::inf() : NormSpec::lp(p));
}

/// ||(sum |x_k*|^2)^{1/2}||_p
template <class Elem>
double seq_l2r_norm(const std::vector<Elem>& xs, double p) {
  if (xs.empty()) return 0.0;
  return norm(ops::sqrt_of(ops::sum_squares(xs, true)), p >= 1e300 ? NormSpec::inf() : NormSpec::lp(p));
}

enum class LambdaFlavor { TwoSided, Column };

enum class CertificateFlavor { LambdaFull, LambdaColumn, Majorant, SquareFunction };

inline std::string flavor_name(CertificateFlavor f) {
  switch (f) {
    case CertificateFlavor::LambdaFull: return "lambda-full";
    case CertificateFlavor::LambdaColumn: return "lambda-column";
    case CertificateFlavor::Majorant: return "majorant";
    case CertificateFlavor::SquareFunction: return "square-function";
  }
  return "?";
}

struct VectorNormCertificate {
  CertificateFlavor flavor = CertificateFlavor::LambdaFull;
  std::size_t length = 0;
  double p = 1.0;
  /// Level t for the projection flavors.
  double level = 0.0;
  /// phi(e), or ||a||_p for majorants.
  double witness_measure = 0.0;
  double value = 0.0;
  bool passed = true;
  std::optional<std::size_t> violation;
  /// Largest excess over the defining inequality (<= 0 when it holds).
  double residual = 0.0;
  std::string message;
};

/// Checks ||e x_n e|| <= t (two-sided) or ||x_n e|| <= t (column) for all n;
/// certified value t phi(1 - e)^{1/p}.
template <class Elem>
VectorNormCertificate lambda_certificate(const std::vector<Elem>& xs, const Elem& e, double t, double p,
                                         LambdaFlavor flavor, double eps = 1e-9) {
  if (!(p >= 1.0)) throw PreconditionError("lambda_certificate: p must be >= 1");
  ops::require_projection(e);
  VectorNormCertificate c;
  c.flavor = flavor == LambdaFlavor::TwoSided ? CertificateFlavor::LambdaFull : CertificateFlavor::LambdaColumn;
  c.length = xs.size();
  c.p = p;
  c.level = t;
  c.witness_measure = ops::phi(e);
  c.residual = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const Elem y = flavor == LambdaFlavor::TwoSided ? ops::mul(ops::mul(e, xs[n]), e) : ops::mul(xs[n], e);
    const double excess = ops::sup_norm(y) - t;
    c.residual = std::max(c.residual, excess);
    if (excess > eps && !c.violation) {
      c.violation = n;
      c.message = "index " + std::to_string(n) + " exceeds the level by " + detail::fmt(excess);
    }
  }
  c.passed = !c.violation;
  c.value = c.passed ? t * std::pow(std::max(0.0, 1.0 - c.witness_measure), 1.0 / p) : 0.0;
  return c;
}

inline VectorNormCertificate lambda_certificate(const std::vector<Operator>& xs, const Projection& e, double t,
                                                double p, LambdaFlavor flavor, double eps = 1e-9) {
  return lambda_certificate(xs, e.op(), t, p, flavor, eps);
}

/// Checks -a <= x_n <= a for self-adjoint x_n; certified value ||a||_p.
template <class Elem>
VectorNormCertificate majorant_certificate(const std::vector<Elem>& xs, const Elem& a, double p, double eps = 1e-9) {
  VectorNormCertificate c;
  c.flavor = CertificateFlavor::Majorant;
  c.length = xs.size();
  c.p = p;
  c.residual = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < xs.size(); ++n) {
    for (double s : {1.0, -1.0}) {
      Elem diff = a;
      diff -= s * xs[n];
      auto ev = ops::eigenvalues(diff);
      const double excess = -*std::min_element(ev.begin(), ev.end());
      c.residual = std::max(c.residual, excess);
      if (excess > eps && !c.violation) {
        c.violation = n;
        c.message = "index " + std::to_string(n) + " escapes the majorant by " + detail::fmt(excess);
      }
    }
  }
  c.passed = !c.violation;
  c.witness_measure = norm(a, NormSpec::lp(p));
  c.value = c.passed ? c.witness_measure : 0.0;
  return c;
}

/// The square-function bound, which needs no witness.
template <class Elem>
VectorNormCertificate square_function_certificate(const std::vector<Elem>& xs, double p) {
  VectorNormCertificate c;
  c.flavor = CertificateFlavor::SquareFunction;
  c.length = xs.size();
  c.p = p;
  c.value = seq_l2c_norm(xs, p);
  return c;
}

/// Upper certificate and trivial lower bound for the weak maximal quasi-norm.
template <class Elem>
struct LambdaEstimate {
  double upper = 0.0;
  double lower = 0.0;
  double gap = 0.0;
  /// Level and witness of the interval attaining the upper bound.
  double binding_level = 0.0;
  std::optional<Elem> witness;
  std::size_t levels = 0;
  bool lower_is_valid = true;
};

/// Searches witnesses over 64 log-spaced levels in [1e-6 t_max, t_max] merged
/// with the exact jump points of the square-function witness.  Candidates at
/// level t: chi_[0,t^2](sum |x_n|^2), the meet of chi_[0,t^2](|x_n|^2), and
/// for positive sequences in the two-sided flavor the meet of chi_[0,t](x_n).
/// A witness valid at t stays valid above t, so
///   upper = max(u_0, max_j u_{j+1} phi(1 - e_{u_j})^{1/p})
/// over the merged levels u_j bounds the supremum over all t > 0.
template <class Elem>
LambdaEstimate<Elem> lambda_search(const std::vector<Elem>& xs, double p, LambdaFlavor flavor) {
  LambdaEstimate<Elem> est;
  if (!(p >= 1.0)) throw PreconditionError("lambda_search: p must be >= 1");
  if (xs.empty()) return est;
  double tmax = 0.0;
  for (const auto& x : xs) tmax = std::max(tmax, ops::sup_norm(x));
  bool positive = true;
  for (const auto& x : xs) positive = positive && ops::is_positive(x, 1e-9);
  est.lower_is_valid = flavor == LambdaFlavor::Column || positive;
  if (est.lower_is_valid) {
    for (const auto& x : xs) est.lower = std::max(est.lower, norm(x, NormSpec::weak(p)));
  }
  if (tmax == 0.0) {
    est.witness = ops::identity_like(xs.front());
    return est;
  }

  const Elem S2 = ops::sum_squares(xs, false);
  std::vector<double> s2 = ops::eigenvalues(S2);
  std::sort(s2.begin(), s2.end());
  const double weight = 1.0 / static_cast<double>(s2.size());
  // phi(1 - chi_[0,t^2](S2)) from the sorted spectrum.
  auto tail_sum = [&](double t) {
    const double cut = t * t + tol::kEndpoint;
    const auto it = std::upper_bound(s2.begin(), s2.end(), cut);
    return static_cast<double>(s2.end() - it) * weight;
  };

  constexpr int kGrid = 64;
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) grid[static_cast<std::size_t>(i)] = tmax * std::pow(1e-6, 1.0 - i / double(kGrid - 1));
  grid.back() = tmax;

  std::vector<Elem> abs2;
  for (const auto& x : xs) abs2.push_back(ops::mul(x.adjoint(), x));
  std::vector<double> meet_tail(kGrid, 1.0);
  std::vector<Elem> meet_witness;
  for (int i = 0; i < kGrid; ++i) {
    const double t = grid[static_cast<std::size_t>(i)];
    Elem e = ops::spectral(abs2.front(), Interval::closed(-std::numeric_limits<double>::infinity(), t * t));
    for (std::size_t n = 1; n < abs2.size(); ++n) {
      e = ops::meet(e, ops::spectral(abs2[n], Interval::closed(-std::numeric_limits<double>::infinity(), t * t)));
    }
    if (flavor == LambdaFlavor::TwoSided && positive) {
      Elem f = ops::spectral(xs.front(), Interval::closed(-std::numeric_limits<double>::infinity(), t));
      for (std::size_t n = 1; n < xs.size(); ++n) {
        f = ops::meet(f, ops::spectral(xs[n], Interval::closed(-std::numeric_limits<double>::infinity(), t)));
      }
      if (ops::phi(f) > ops::phi(e)) e = f;
    }
    meet_tail[static_cast<std::size_t>(i)] = std::max(0.0, 1.0 - ops::phi(e));
    meet_witness.push_back(std::move(e));
  }

  std::vector<double> levels = grid;
  for (double v : s2) {
    if (v > 0.0) levels.push_back(std::sqrt(v));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(), [](double a, double b) { return b - a <= 1e-12 * std::max(1.0, b); }),
               levels.end());
  est.levels = levels.size();

  auto value_at = [&](double u, int* grid_index) {
    double v = tail_sum(u);
    *grid_index = -1;
    const auto it = std::upper_bound(grid.begin(), grid.end(), u * (1.0 + 1e-12));
    if (it != grid.begin()) {
      const int g = static_cast<int>(it - grid.begin()) - 1;
      if (meet_tail[static_cast<std::size_t>(g)] < v) {
        v = meet_tail[static_cast<std::size_t>(g)];
        *grid_index = g;
      }
    }
    return v;
  };

  est.upper = levels.front();
  est.binding_level = 0.0;
  int binding_grid = -2;
  for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
    int g = -1;
    const double v = value_at(levels[j], &g);
    const double cand = levels[j + 1] * std::pow(v, 1.0 / p);
    if (cand > est.upper) {
      est.upper = cand;
      est.binding_level = levels[j];
      binding_grid = g;
    }
  }
  int g_last = -1;
  if (value_at(levels.back(), &g_last) > 1e-15) {
    throw VerificationError("lambda_search: no full-trace witness at the top level");
  }
  if (binding_grid >= 0) {
    est.witness = meet_witness[static_cast<std::size_t>(binding_grid)];
  } else if (binding_grid == -1) {
    est.witness = ops::spectral(S2, Interval::closed(-std::numeric_limits<double>::infinity(),
                                                     est.binding_level * est.binding_level));
  }
  est.gap = est.upper - est.lower;
  return est;
}

}  // namespace vlab
