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

// Vilenkin-like systems: generating functions r_k^n, the product system
// psi_n, and an exhaustive validator for the structural assumptions.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

#include "vlab/radix.hpp"

namespace vlab {

/// Complex function on the points of a truncated group, indexed by point.
struct ScalarField {
  RadixSequence radix;
  ComplexVector values;

  Complex operator()(std::uint64_t t) const { return values(static_cast<Index>(t)); }
};

/// Generating functions r_k^n(t) for a fixed radix.
struct VilenkinLikeSystem {
  using Provider = std::function<Complex(int k, std::uint64_t n, const Digits& t)>;

  std::string name;
  RadixSequence radix;
  Provider provider;
  /// Set once the system has been validated.
  std::optional<double> delta_max;

  Complex r(int k, std::uint64_t n, const Digits& t) const { return provider(k, n, t); }
};

/// r_k^n(t) = exp(2 pi i t_k n_k / m_k).
inline VilenkinLikeSystem vilenkin_characters(const RadixSequence& radix) {
  auto rad = radix;
  return {"vilenkin-characters", radix,
          [rad](int k, std::uint64_t n, const Digits& t) {
            const double m = rad.radix(k);
            const double phase = 2.0 * std::numbers::pi * t[static_cast<std::size_t>(k)] *
                                 rad.digit(n, k) / m;
            return std::polar(1.0, phase);
          },
          std::nullopt};
}

/// m-adic characters: r_k^n(t) = exp(2 pi i n_k sum_{j<=k} t_j / (m_j ... m_k)).
inline VilenkinLikeSystem m_adic_characters(const RadixSequence& radix) {
  auto rad = radix;
  return {"m-adic", radix,
          [rad](int k, std::uint64_t n, const Digits& t) {
            double x = 0.0;
            double denom = 1.0;
            for (int j = k; j >= 0; --j) {
              denom *= rad.radix(j);
              x += t[static_cast<std::size_t>(j)] / denom;
            }
            const double phase = 2.0 * std::numbers::pi * rad.digit(n, k) * (x - std::floor(x));
            return std::polar(1.0, phase);
          },
          std::nullopt};
}

/// Vilenkin characters with r_0^1 scaled by 1.1; used for fault injection.
inline VilenkinLikeSystem corrupted_characters(const RadixSequence& radix) {
  auto base = vilenkin_characters(radix);
  auto inner = base.provider;
  base.name = "corrupted";
  base.provider = [inner](int k, std::uint64_t n, const Digits& t) {
    Complex v = inner(k, n, t);
    return (k == 0 && n == 1) ? 1.1 * v : v;
  };
  return base;
}

inline const std::vector<std::string>& system_names() {
  static const std::vector<std::string> names{"vilenkin-characters", "m-adic", "corrupted"};
  return names;
}

inline VilenkinLikeSystem make_system(const std::string& name, const RadixSequence& radix) {
  if (name == "vilenkin-characters" || name == "vilenkin") return vilenkin_characters(radix);
  if (name == "m-adic") return m_adic_characters(radix);
  if (name == "corrupted") return corrupted_characters(radix);
  throw PreconditionError("unknown system '" + name + "'");
}

/// Outcome of validate_system.
struct AssumptionReport {
  bool passed = true;
  /// "i", "ii", "iii" or "iv" when failed.
  std::string failed_check;
  int k = -1;
  std::uint64_t n = 0;
  std::uint64_t l = 0;
  std::uint64_t point = 0;
  double residual = 0.0;
  double delta_max = 0.0;
  std::string message;
};

/// Exhaustive check of the structural assumptions over all k < N, all
/// indices n, l < M_N that are multiples of M_k (the only ones entering
/// psi_n), and all points.  Check order: (i), (iii), (ii), (iv).
inline AssumptionReport validate_system(const VilenkinLikeSystem& sys, double eps = 1e-10) {
  const auto& R = sys.radix;
  const int N = R.depth();
  if (N < 1) throw PreconditionError("validate_system: depth must be >= 1");
  const std::uint64_t M = R.size();
  std::vector<Digits> pts(M);
  for (std::uint64_t t = 0; t < M; ++t) pts[t] = R.to_digits(t);

  AssumptionReport rep;
  auto fail = [&](const char* check, int k, std::uint64_t n, std::uint64_t l, std::uint64_t t,
                  double res) {
    rep.passed = false;
    rep.failed_check = check;
    rep.k = k;
    rep.n = n;
    rep.l = l;
    rep.point = t;
    rep.residual = res;
    std::ostringstream os;
    os << "Assumption (" << check << ") violated at k=" << k << ", n=" << n << ", l=" << l
       << ", t=" << t << ": residual " << res;
    rep.message = os.str();
    return rep;
  };

  // (i) normalization and dependence on t_0..t_k only.
  for (int k = 0; k < N; ++k) {
    const std::uint64_t Mk = R.cumulative(k);
    const std::uint64_t Mk1 = R.cumulative(k + 1);
    for (std::uint64_t t = 0; t < M; ++t) {
      const double r0 = std::abs(sys.r(k, 0, pts[t]) - 1.0);
      if (r0 > eps) return fail("i", k, 0, 0, t, r0);
    }
    for (std::uint64_t n = 0; n < M; n += Mk) {
      for (std::uint64_t t = 0; t < M; ++t) {
        const std::uint64_t base = t % Mk1;
        if (base == t) continue;
        const double d = std::abs(sys.r(k, n, pts[t]) - sys.r(k, n, pts[base]));
        if (d > eps) return fail("i", k, n, 0, t, d);
      }
    }
  }

  // (iii) sum_j |r_k^{j M_k + n}|^2 = m_k for M_{k+1} | n.
  for (int k = 0; k < N; ++k) {
    const std::uint64_t Mk = R.cumulative(k);
    const std::uint64_t Mk1 = R.cumulative(k + 1);
    for (std::uint64_t n = 0; n < M; n += Mk1) {
      for (std::uint64_t t = 0; t < M; ++t) {
        double s = 0.0;
        for (int j = 0; j < R.radix(k); ++j) s += std::norm(sys.r(k, j * Mk + n, pts[t]));
        const double res = std::abs(s - R.radix(k));
        if (res > eps) return fail("iii", k, n, 0, t, res);
      }
    }
  }

  // (ii) E_k(r_k^n conj r_k^l) = [n_k = l_k] when n^{(k+1)} = l^{(k+1)}.
  for (int k = 0; k < N; ++k) {
    const std::uint64_t Mk = R.cumulative(k);
    const std::uint64_t Mk1 = R.cumulative(k + 1);
    for (std::uint64_t h = 0; h < M; h += Mk1) {
      for (int nk = 0; nk < R.radix(k); ++nk) {
        for (int lk = 0; lk < R.radix(k); ++lk) {
          const std::uint64_t n = h + nk * Mk;
          const std::uint64_t l = h + lk * Mk;
          const double target = nk == lk ? 1.0 : 0.0;
          for (std::uint64_t c = 0; c < Mk; ++c) {
            Complex avg = 0.0;
            std::uint64_t count = 0;
            for (std::uint64_t t = c; t < M; t += Mk, ++count) {
              avg += sys.r(k, n, pts[t]) * std::conj(sys.r(k, l, pts[t]));
            }
            avg /= static_cast<double>(count);
            const double res = std::abs(avg - target);
            if (res > eps) return fail("ii", k, n, l, c, res);
          }
        }
      }
    }
  }

  // (iv) largest delta with ||r_k^n||_inf^2 <= m_k / delta.
  double delta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) {
    const std::uint64_t Mk = R.cumulative(k);
    double sup2 = 0.0;
    for (std::uint64_t n = 0; n < M; n += Mk) {
      for (std::uint64_t t = 0; t < M; ++t) sup2 = std::max(sup2, std::norm(sys.r(k, n, pts[t])));
    }
    delta = std::min(delta, R.radix(k) / sup2);
  }
  rep.delta_max = delta;
  if (!(delta > 1.0 + eps)) return fail("iv", -1, 0, 0, 0, 1.0 - delta);
  return rep;
}

/// Returns a copy carrying delta_max, or throws on a violated assumption.
inline VilenkinLikeSystem validated(VilenkinLikeSystem sys) {
  auto rep = validate_system(sys);
  if (!rep.passed) throw VerificationError(rep.message);
  sys.delta_max = rep.delta_max;
  return sys;
}

/// Table of psi_n(t) = prod_k r_k^{n^{(k)}}(t); rows n, columns t.
class PsiTable {
 public:
  explicit PsiTable(const VilenkinLikeSystem& sys) : radix_(sys.radix) {
    const std::uint64_t M = radix_.size();
    const int N = radix_.depth();
    table_ = Matrix::Ones(static_cast<Index>(M), static_cast<Index>(M));
    for (std::uint64_t t = 0; t < M; ++t) {
      const Digits d = radix_.to_digits(t);
      for (std::uint64_t n = 0; n < M; ++n) {
        Complex v = 1.0;
        for (int k = 0; k < N; ++k) {
          v *= sys.r(k, radix_.upper(n, k), d);
        }
        table_(static_cast<Index>(n), static_cast<Index>(t)) = v;
      }
    }
    name_ = sys.name;
  }

  const RadixSequence& radix() const { return radix_; }
  std::uint64_t size() const { return radix_.size(); }
  const std::string& system_name() const { return name_; }
  const Matrix& matrix() const { return table_; }
  Complex operator()(std::uint64_t n, std::uint64_t t) const {
    return table_(static_cast<Index>(n), static_cast<Index>(t));
  }
  ScalarField psi(std::uint64_t n) const {
    radix_.check_index(n);
    return {radix_, table_.row(static_cast<Index>(n)).transpose()};
  }

 private:
  RadixSequence radix_;
  std::string name_;
  Matrix table_;
};

inline ScalarField psi(std::uint64_t n, const VilenkinLikeSystem& sys) {
  sys.radix.check_index(n);
  ScalarField f{sys.radix, ComplexVector::Ones(static_cast<Index>(sys.radix.size()))};
  for (std::uint64_t t = 0; t < sys.radix.size(); ++t) {
    const Digits d = sys.radix.to_digits(t);
    Complex v = 1.0;
    for (int k = 0; k < sys.radix.depth(); ++k) v *= sys.r(k, sys.radix.upper(n, k), d);
    f.values(static_cast<Index>(t)) = v;
  }
  return f;
}

}  // namespace vlab
