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

// Exhaustive sweeps fitting the constants in the Fejer kernel estimates.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vlab/bound_report.hpp"
#include "vlab/kernels.hpp"

namespace vlab {

enum class KernelLemma { KE_ab_1, KE_ab_2, KE_GI, KE_t, K2E_a, KI_E };

inline std::string lemma_name(KernelLemma l) {
  switch (l) {
    case KernelLemma::KE_ab_1: return "KE-ab-1";
    case KernelLemma::KE_ab_2: return "KE-ab-2";
    case KernelLemma::KE_GI: return "KE-GI";
    case KernelLemma::KE_t: return "KE-t";
    case KernelLemma::K2E_a: return "K2E-a";
    case KernelLemma::KI_E: return "KI-E";
  }
  return "?";
}

inline const std::vector<KernelLemma>& all_kernel_lemmas() {
  static const std::vector<KernelLemma> v{KernelLemma::KE_ab_1, KernelLemma::KE_ab_2,
                                          KernelLemma::KE_GI,   KernelLemma::KE_t,
                                          KernelLemma::K2E_a,   KernelLemma::KI_E};
  return v;
}

inline KernelLemma parse_lemma(const std::string& s) {
  for (auto l : all_kernel_lemmas()) {
    if (lemma_name(l) == s) return l;
  }
  throw PreconditionError("unknown kernel lemma '" + s + "'");
}

/// Optional restrictions of a sweep; unset entries range over all
/// admissible values.
struct KernelBoundParams {
  std::optional<int> n;
  std::optional<int> a;
  std::optional<int> b;
  std::optional<int> k;
};

/// Pair series and sup kernels for one system, shared by all sweeps.
class KernelLab {
 public:
  KernelLab(const VilenkinLikeSystem& sys, const PsiTable& psi)
      : psi_(psi), radix_(psi.radix()), series_(all_pair_series(psi)) {
    if (!sys.delta_max) throw PreconditionError("KernelLab: system has not been validated");
    delta_ = *sys.delta_max;
    system_ = sys.name;
    const int N = radix_.depth();
    const std::size_t pairs = series_.size();
    ktilde_.assign(static_cast<std::size_t>(N), std::vector<double>(pairs, 0.0));
    for (int n = 0; n < N; ++n) {
      for (std::size_t i = 0; i < pairs; ++i) ktilde_[static_cast<std::size_t>(n)][i] = series_[i].sup_fejer(n);
    }
  }

  KernelLab(const VilenkinLikeSystem&, PsiTable&&) = delete;

  const RadixSequence& radix() const { return radix_; }
  double delta() const { return delta_; }
  /// Series of the pair (eta, t).
  const PairSeries& series(std::uint64_t eta, std::uint64_t t) const {
    return series_[eta * radix_.size() + t];
  }
  const std::vector<PairSeries>& all_series() const { return series_; }
  /// Ktilde_n(eta, t).
  double ktilde(int n, std::uint64_t eta, std::uint64_t t) const {
    return ktilde_[static_cast<std::size_t>(n)][eta * radix_.size() + t];
  }

  BoundReport verify(KernelLemma lemma, const KernelBoundParams& params = {}) const {
    BoundReport rep;
    rep.claim = lemma_name(lemma);
    rep.depth = radix_.depth();
    rep.system = system_;
    rep.delta = delta_;
    ConstantFitter fit;
    std::string best;
    auto record = [&](double lhs, double rhs, auto&& describe) {
      if (fit.add(lhs, rhs)) best = describe();
    };
    switch (lemma) {
      case KernelLemma::KE_ab_1: sweep_ab1(params, record); break;
      case KernelLemma::KE_ab_2: sweep_ab2(params, record); break;
      case KernelLemma::KE_GI:
        sweep_gi(params, record);
        rep.note = "sup over M_k <= n < M_N";
        break;
      case KernelLemma::KE_t: sweep_t(params, false, record); break;
      case KernelLemma::K2E_a: sweep_t(params, true, record); break;
      case KernelLemma::KI_E: sweep_ki(params, record); break;
    }
    const auto r = fit.result();
    rep.fitted_c = r.c_hat;
    rep.samples = r.samples;
    rep.degenerate = r.degenerate;
    rep.lhs = fit.argmax_lhs();
    rep.rhs_unit = fit.argmax_rhs();
    rep.params = best;
    rep.passed = std::isfinite(rep.fitted_c);
    return rep;
  }

 private:
  int depth() const { return radix_.depth(); }
  double M(int k) const { return static_cast<double>(radix_.cumulative(k)); }

  std::vector<int> n_range(const KernelBoundParams& p) const {
    if (p.n) {
      if (*p.n < 0 || *p.n >= depth()) {
        throw PreconditionError("n = " + std::to_string(*p.n) + " must lie in [0, N)");
      }
      return {*p.n};
    }
    std::vector<int> v;
    for (int n = 0; n < depth(); ++n) v.push_back(n);
    return v;
  }

  /// Distinct values of l^{(b+1)} for M_n <= l < M_{n+1}.
  std::vector<std::uint64_t> heads(int n, int b) const {
    std::vector<std::uint64_t> v;
    for (std::uint64_t l = radix_.cumulative(n); l < radix_.cumulative(n + 1); ++l) {
      const std::uint64_t h = radix_.upper(l, b + 1);
      if (v.empty() || v.back() != h) v.push_back(h);
    }
    return v;
  }

  std::string describe(std::initializer_list<std::pair<const char*, long long>> kv) const {
    std::string s;
    for (const auto& [k, v] : kv) {
      if (!s.empty()) s += ';';
      s += std::string(k) + "=" + std::to_string(v);
    }
    return s;
  }

  template <class Rec>
  void sweep_ab1(const KernelBoundParams& p, Rec&& record) const {
    const std::uint64_t size = radix_.size();
    for (int n : n_range(p)) {
      if (p.b && (*p.b < 0 || *p.b > n)) throw PreconditionError("b = " + std::to_string(*p.b) + " must satisfy b <= n");
      if (p.a && (*p.a < 0 || *p.a > n)) throw PreconditionError("a = " + std::to_string(*p.a) + " must satisfy a <= n");
      if (p.a && p.b && *p.b > *p.a) throw PreconditionError("b = " + std::to_string(*p.b) + " must satisfy b <= a");
      for (int b = 0; b <= n; ++b) {
        if (p.b && b != *p.b) continue;
        for (int a = b; a <= n; ++a) {
          if (p.a && a != *p.a) continue;
          const double rhs = std::pow(delta_, a - n) * M(b) * M(n);
          for (std::uint64_t h : heads(n, b)) {
            for (int j = 0; j + 2 <= radix_.radix(b); ++j) {
              const std::uint64_t start = h + static_cast<std::uint64_t>(j) * radix_.cumulative(b);
              for (std::uint64_t s = 0; s < size; ++s) {
                for (std::uint64_t t = 0; t < size; ++t) {
                  if (agreement(radix_, t, s) != a) continue;
                  const double lhs = std::abs(series(t, s).block(start, radix_.cumulative(b)));
                  record(lhs, rhs, [&] {
                    return describe({{"n", n}, {"a", a}, {"b", b}, {"head", static_cast<long long>(h)},
                                     {"j", j}, {"s", static_cast<long long>(s)}, {"t", static_cast<long long>(t)}});
                  });
                }
              }
            }
          }
        }
      }
    }
  }

  template <class Rec>
  void sweep_ab2(const KernelBoundParams& p, Rec&& record) const {
    const std::uint64_t size = radix_.size();
    for (int n : n_range(p)) {
      if (p.b && (*p.b < 0 || *p.b > n)) throw PreconditionError("b = " + std::to_string(*p.b) + " must satisfy b <= n");
      if (p.a && p.b && *p.a >= *p.b) throw PreconditionError("a = " + std::to_string(*p.a) + " must satisfy a < b");
      if (p.a && *p.a < 0) throw PreconditionError("a must be nonnegative");
      for (int b = 1; b <= n; ++b) {
        if (p.b && b != *p.b) continue;
        for (int a = 0; a < b; ++a) {
          if (p.a && a != *p.a) continue;
          const double rhs = std::pow(delta_, a - n) * M(a) * M(b) * M(n);
          for (std::uint64_t h : heads(n, b)) {
            for (int j = 0; j + 2 <= radix_.radix(b); ++j) {
              const std::uint64_t start = h + static_cast<std::uint64_t>(j) * radix_.cumulative(b);
              for (std::uint64_t s = 0; s < size; ++s) {
                double lhs = 0.0;
                for (std::uint64_t t = 0; t < size; ++t) {
                  if (agreement(radix_, t, s) != a) continue;
                  lhs += std::norm(series(t, s).block(start, radix_.cumulative(b)));
                }
                lhs /= static_cast<double>(size);
                record(lhs, rhs, [&] {
                  return describe({{"n", n}, {"a", a}, {"b", b}, {"head", static_cast<long long>(h)},
                                   {"j", j}, {"s", static_cast<long long>(s)}});
                });
              }
            }
          }
        }
      }
    }
  }

  template <class Rec>
  void sweep_gi(const KernelBoundParams& p, Rec&& record) const {
    const std::uint64_t size = radix_.size();
    std::vector<int> ks;
    if (p.k) {
      if (*p.k < 0 || *p.k > depth()) throw PreconditionError("k = " + std::to_string(*p.k) + " must lie in [0, N]");
      ks.push_back(*p.k);
    } else {
      for (int k = 0; k <= depth(); ++k) ks.push_back(k);
    }
    for (int k : ks) {
      for (std::uint64_t s = 0; s < size; ++s) {
        double lhs = 0.0;
        for (std::uint64_t t = 0; t < size; ++t) {
          if (agreement(radix_, t, s) >= k) continue;
          lhs += series(t, s).sup_fejer_range(radix_.cumulative(k), size);
        }
        lhs /= static_cast<double>(size);
        record(lhs, 1.0, [&] { return describe({{"k", k}, {"s", static_cast<long long>(s)}}); });
      }
    }
  }

  template <class Rec>
  void sweep_t(const KernelBoundParams& p, bool squared, Rec&& record) const {
    const std::uint64_t size = radix_.size();
    for (int n : n_range(p)) {
      if (p.a && (*p.a < 0 || *p.a > n)) throw PreconditionError("a = " + std::to_string(*p.a) + " must satisfy a <= n");
      for (int a = 0; a <= n; ++a) {
        if (p.a && a != *p.a) continue;
        double rhs = std::pow(delta_, a - n) + (n - a) * std::pow(delta_, 0.5 * (a - n));
        if (squared) rhs = std::pow(std::sqrt(M(a)) * rhs, 2.0);
        for (std::uint64_t s = 0; s < size; ++s) {
          double lhs = 0.0;
          for (std::uint64_t t = 0; t < size; ++t) {
            if (agreement(radix_, t, s) != a) continue;
            const double v = ktilde(n, t, s);
            lhs += squared ? v * v : v;
          }
          lhs /= static_cast<double>(size);
          record(lhs, rhs, [&] { return describe({{"n", n}, {"a", a}, {"s", static_cast<long long>(s)}}); });
        }
      }
    }
  }

  template <class Rec>
  void sweep_ki(const KernelBoundParams& p, Rec&& record) const {
    const std::uint64_t size = radix_.size();
    for (int n : n_range(p)) {
      for (std::uint64_t eta = 0; eta < size; ++eta) {
        double lhs = 0.0;
        for (std::uint64_t t = 0; t < size; ++t) lhs += ktilde(n, t, eta);
        lhs /= static_cast<double>(size);
        record(lhs, 1.0, [&] { return describe({{"n", n}, {"eta", static_cast<long long>(eta)}}); });
      }
    }
  }

  const PsiTable& psi_;
  RadixSequence radix_;
  std::vector<PairSeries> series_;
  std::vector<std::vector<double>> ktilde_;
  double delta_ = 0.0;
  std::string system_;
};

/// One-shot form of KernelLab::verify.
inline BoundReport verify_kernel_bound(KernelLemma lemma, const KernelBoundParams& params,
                                       const VilenkinLikeSystem& sys) {
  const PsiTable psi(sys);
  const KernelLab lab(sys, psi);
  return lab.verify(lemma, params);
}

/// max over eta of int Ktilde_n(t, eta) dt over all n < N.
inline double sup_kernel_integral(const KernelLab& lab) {
  double best = 0.0;
  const auto& R = lab.radix();
  for (int n = 0; n < R.depth(); ++n) {
    for (std::uint64_t eta = 0; eta < R.size(); ++eta) {
      double s = 0.0;
      for (std::uint64_t t = 0; t < R.size(); ++t) s += lab.ktilde(n, t, eta);
      best = std::max(best, s / static_cast<double>(R.size()));
    }
  }
  return best;
}

}  // namespace vlab
