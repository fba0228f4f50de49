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

// The trace-preserving embedding gamma of R_N into the operator fields over the
// doubled group, with residual reports for its algebraic and metric
// properties and for the intertwining of means and expectations.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vlab/nc_factor.hpp"
#include "vlab/operator_field.hpp"
#include "vlab/vilenkin.hpp"

namespace vlab {

struct TransferenceReport {
  double homomorphism = 0.0;
  double adjoint = 0.0;
  double trace = 0.0;
  /// |‖gamma(x)‖_p - ‖x‖_p| for p = 1, 2, 4, inf.
  std::vector<double> lp_exponents{1.0, 2.0, 4.0, INFINITY};
  std::vector<double> lp;
  /// Worst quantile gap of the merged singular value profiles.
  double mu_profile = 0.0;
  double tolerance = 1e-9;
  bool passed = false;
  std::string message;
};

struct IntertwineReport {
  std::uint64_t n = 0;
  int k = 0;
  /// ‖gamma(sigma_n x) - sigma_n(gamma x)‖_inf
  double cesaro = 0.0;
  /// ‖gamma(E_k x) - E_{2k}(gamma x)‖_inf
  double cond_exp = 0.0;
  /// ‖E_{2k}(gamma x) - S_{M_{2k}}(gamma x)‖_inf
  double partial_sum = 0.0;
  /// |‖gamma(x)‖_{H_p^c} - ‖x‖_{H_p^c}| for p = 1, 2, doubled levels.
  double hardy_p1 = 0.0;
  double hardy_p2 = 0.0;
  double tolerance = 1e-9;
  bool passed = false;
  std::string message;
};

/// Worst gap between two profiles on the quantile grid of the finer one.
inline double profile_gap(const SingularProfile& coarse, const SingularProfile& fine) {
  double worst = 0.0;
  const double n = static_cast<double>(fine.values.size());
  for (std::size_t i = 0; i < fine.values.size(); ++i) {
    worst = std::max(worst, std::abs(coarse.at(static_cast<double>(i) / n) - fine.values[i]));
  }
  return worst;
}

class Transference {
 public:
  explicit Transference(const RadixSequence& base)
      : basis_(FactorContext(base)), psi_(vilenkin_characters(basis_.context().doubled())) {}

  const FactorBasis& basis() const { return basis_; }
  const FactorContext& context() const { return basis_.context(); }
  const PsiTable& psi() const { return psi_; }
  /// Group levels 2, 4, ..., 2N.
  std::vector<int> doubled_levels() const {
    std::vector<int> v;
    for (int k = 1; k <= context().depth(); ++k) v.push_back(2 * k);
    return v;
  }

  /// gamma(x)(t) = sum_j xhat(j) psi_j(t) W_j.
  OperatorField gamma(const Operator& x) const {
    const ComplexVector c = basis_.fourier_all(x);
    const Index D = context().dim();
    const Index M = static_cast<Index>(basis_.size());
    Matrix W(M, D * D);
    for (Index j = 0; j < M; ++j) {
      W.row(j) = Eigen::Map<const ComplexVector>(basis_.basis()[static_cast<std::size_t>(j)].matrix().data(), D * D)
                     .transpose() *
                 c(j);
    }
    return detail::unstack(psi_.radix(), D, psi_.matrix().transpose() * W);
  }

  TransferenceReport verify(const Operator& x, const Operator& y, double tolerance = 1e-9) const {
    TransferenceReport r;
    r.tolerance = tolerance;
    const OperatorField gx = gamma(x);
    const OperatorField gy = gamma(y);
    r.homomorphism = field_gap(gamma(x * y), gx * gy);
    r.adjoint = field_gap(gamma(x.adjoint()), gx.adjoint());
    r.trace = std::abs(gx.trace() - x.trace());
    const SingularProfile px = mu_profile(x);
    const SingularProfile pg = mu_profile(gx);
    for (double p : r.lp_exponents) {
      const NormSpec spec = std::isinf(p) ? NormSpec::inf() : NormSpec::lp(p);
      r.lp.push_back(std::abs(norm(pg, spec) - norm(px, spec)));
    }
    r.mu_profile = profile_gap(px, pg);
    std::string msg;
    auto check = [&](const char* what, double v) {
      if (!(v <= tolerance)) msg += std::string(what) + " residual " + detail::fmt(v) + "; ";
    };
    check("homomorphism", r.homomorphism);
    check("adjoint", r.adjoint);
    check("trace", r.trace);
    for (std::size_t i = 0; i < r.lp.size(); ++i) check(("L_" + detail::fmt(r.lp_exponents[i])).c_str(), r.lp[i]);
    check("mu-profile", r.mu_profile);
    r.passed = msg.empty();
    r.message = msg;
    return r;
  }

  IntertwineReport intertwine(const Operator& x, std::uint64_t n, int k, double tolerance = 1e-9) const {
    if (n < 1 || n > basis_.size()) throw PreconditionError("intertwine: n must lie in [1, M_{2N}]");
    if (k < 0 || k > context().depth()) throw PreconditionError("intertwine: k out of range");
    IntertwineReport r;
    r.n = n;
    r.k = k;
    r.tolerance = tolerance;
    const OperatorField gx = gamma(x);
    r.cesaro = field_gap(gamma(basis_.cesaro(x, n)), cesaro(gx, n, psi_));
    const OperatorField e2k = cond_exp(gx, 2 * k);
    r.cond_exp = field_gap(gamma(factor_cond_exp(x, k, context())), e2k);
    r.partial_sum = field_gap(e2k, partial_sum(gx, context().doubled().cumulative(2 * k), psi_));
    r.hardy_p1 = std::abs(hardy_c_norm(gx, 1.0, doubled_levels()) - factor_hardy_norm(x, 1.0, context()));
    r.hardy_p2 = std::abs(hardy_c_norm(gx, 2.0, doubled_levels()) - factor_hardy_norm(x, 2.0, context()));
    std::string msg;
    auto check = [&](const char* what, double v) {
      if (!(v <= tolerance)) msg += std::string(what) + " residual " + detail::fmt(v) + "; ";
    };
    check("cesaro", r.cesaro);
    check("conditional expectation", r.cond_exp);
    check("partial sum", r.partial_sum);
    check("Hardy p=1", r.hardy_p1);
    check("Hardy p=2", r.hardy_p2);
    r.passed = msg.empty();
    r.message = msg;
    return r;
  }

  /// Worst residuals over all 1 <= n <= M_{2N} and 0 <= k <= N.
  IntertwineReport intertwine_sweep(const Operator& x, double tolerance = 1e-9) const {
    IntertwineReport worst;
    worst.tolerance = tolerance;
    const OperatorField gx = gamma(x);
    for (std::uint64_t n = 1; n <= basis_.size(); ++n) {
      const double v = field_gap(gamma(basis_.cesaro(x, n)), cesaro(gx, n, psi_));
      if (v >= worst.cesaro) worst.n = n;
      worst.cesaro = std::max(worst.cesaro, v);
    }
    for (int k = 0; k <= context().depth(); ++k) {
      const OperatorField e2k = cond_exp(gx, 2 * k);
      worst.cond_exp = std::max(worst.cond_exp, field_gap(gamma(factor_cond_exp(x, k, context())), e2k));
      worst.partial_sum =
          std::max(worst.partial_sum, field_gap(e2k, partial_sum(gx, context().doubled().cumulative(2 * k), psi_)));
    }
    worst.hardy_p1 = std::abs(hardy_c_norm(gx, 1.0, doubled_levels()) - factor_hardy_norm(x, 1.0, context()));
    worst.hardy_p2 = std::abs(hardy_c_norm(gx, 2.0, doubled_levels()) - factor_hardy_norm(x, 2.0, context()));
    worst.passed = std::max({worst.cesaro, worst.cond_exp, worst.partial_sum, worst.hardy_p1, worst.hardy_p2}) <=
                   tolerance;
    if (!worst.passed) worst.message = "intertwining residual above tolerance";
    return worst;
  }

  /// phi(chi_(lambda,inf)(|gamma x|)) - tau(chi_(lambda,inf)(|x|)).
  double level_set_gap(const Operator& x, double lambda) const {
    const OperatorField a = abs(gamma(x));
    const double lhs = spectral_projection(a, Interval::above(lambda)).trace().real();
    const double rhs = spectral_projection(abs(x), Interval::above(lambda)).trace();
    return std::abs(lhs - rhs);
  }

 private:
  static double field_gap(const OperatorField& a, const OperatorField& b) {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < a.size(); ++t) worst = std::max(worst, opnorm(a[t] - b[t]));
    return worst;
  }

  FactorBasis basis_;
  PsiTable psi_;
};

}  // namespace vlab
