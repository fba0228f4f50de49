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

// Tracial matrix algebra primitives: normalized-trace operators, functional
// calculus, spectral projections, singular value profiles and norms.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an input violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computed object fails a self-check that should hold by
/// construction.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tol {
inline constexpr double kSelfAdjoint = 1e-9;
inline constexpr double kEndpoint = 1e-9;
inline constexpr double kProjection = 1e-9;
inline constexpr double kMeet = 1e-7;
}  // namespace tol

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace detail

/// A square complex matrix with the normalized trace tau(1) = 1.
class Operator {
 public:
  Operator() = default;

  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw PreconditionError("Operator: matrix is not square");
    }
    if (!m_.allFinite()) {
      throw PreconditionError("Operator: non-finite entry");
    }
  }

  static Operator zero(Index d) { return Operator(Matrix::Zero(d, d)); }
  static Operator identity(Index d) { return Operator(Matrix::Identity(d, d)); }
  static Operator diagonal(const std::vector<Complex>& diag) {
    Matrix m = Matrix::Zero(static_cast<Index>(diag.size()),
                            static_cast<Index>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) {
      m(static_cast<Index>(i), static_cast<Index>(i)) = diag[i];
    }
    return Operator(std::move(m));
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  /// Normalized trace.
  Complex trace() const {
    return dim() == 0 ? Complex(0.0) : m_.trace() / static_cast<double>(dim());
  }

  Operator adjoint() const { return Operator(m_.adjoint(), Unchecked{}); }

  /// Largest deviation from self-adjointness in operator norm.
  double hermiticity_defect() const {
    return detail::spectral_norm(m_ - m_.adjoint());
  }

  bool is_self_adjoint(double eps = tol::kSelfAdjoint) const {
    return hermiticity_defect() <= eps;
  }

  Operator& operator+=(const Operator& o) {
    check_dims(o);
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    check_dims(o);
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator-(const Operator& a) { return Operator(-a.m_, Unchecked{}); }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.check_dims(b);
    return Operator(a.m_ * b.m_, Unchecked{});
  }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= Complex(s); }

 private:
  struct Unchecked {};
  Operator(Matrix m, Unchecked) : m_(std::move(m)) {}

  void check_dims(const Operator& o) const {
    if (o.dim() != dim()) {
      throw PreconditionError("Operator: dimension mismatch (" +
                              std::to_string(dim()) + " vs " +
                              std::to_string(o.dim()) + ")");
    }
  }

  Matrix m_;
};

/// Operator norm (largest singular value).
inline double opnorm(const Operator& x) { return detail::spectral_norm(x.matrix()); }

/// Eigen-decomposition of a self-adjoint operator, ascending eigenvalues.
struct Eigensystem {
  RealVector values;
  Matrix vectors;
};

inline Eigensystem eigh(const Operator& x) {
  const double defect = x.hermiticity_defect();
  if (defect > tol::kSelfAdjoint) {
    throw PreconditionError("operator is not self-adjoint: ||x - x*|| = " +
                            detail::fmt(defect));
  }
  Matrix h = 0.5 * (x.matrix() + x.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw VerificationError("eigendecomposition did not converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double max_eigenvalue(const Operator& x) {
  auto es = eigh(x);
  return es.values.size() ? es.values(es.values.size() - 1) : 0.0;
}

inline double min_eigenvalue(const Operator& x) {
  auto es = eigh(x);
  return es.values.size() ? es.values(0) : 0.0;
}

/// phi(x) = sum phi(lambda_i) P_i.
template <class F>
Operator functional_calculus(const Operator& x, F&& phi) {
  auto es = eigh(x);
  RealVector w(es.values.size());
  for (Index i = 0; i < w.size(); ++i) w(i) = phi(es.values(i));
  return Operator(es.vectors * w.cast<Complex>().asDiagonal() * es.vectors.adjoint());
}

/// Real interval with open or closed ends; infinite ends are always open.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;

  static Interval open(double a, double b) { return {a, b, false, false}; }
  static Interval closed(double a, double b) { return {a, b, true, true}; }
  static Interval closed_open(double a, double b) { return {a, b, true, false}; }
  static Interval open_closed(double a, double b) { return {a, b, false, true}; }
  static Interval point(double a) { return closed(a, a); }
  /// (a, inf)
  static Interval above(double a) {
    return {a, std::numeric_limits<double>::infinity(), false, false};
  }
  /// [a, inf)
  static Interval at_least(double a) {
    return {a, std::numeric_limits<double>::infinity(), true, false};
  }

  /// Membership with endpoint snapping: a value within eps of an endpoint
  /// belongs to the interval iff that endpoint is closed.
  bool contains(double v, double eps = tol::kEndpoint) const {
    const bool near_lo = std::isfinite(lo) && std::abs(v - lo) <= eps;
    const bool near_hi = std::isfinite(hi) && std::abs(v - hi) <= eps;
    if (near_lo || near_hi) return (near_lo && lo_closed) || (near_hi && hi_closed);
    return v > lo && v < hi;
  }
};

class Projection;
Projection spectral_projection(const Operator& x, const Interval& b);
Projection projection_meet(const Projection& e, const Projection& q);

/// A self-adjoint idempotent operator.
class Projection {
 public:
  Projection() = default;

  explicit Projection(Operator e) : e_(std::move(e)) {
    const double sa = e_.hermiticity_defect();
    if (sa > tol::kProjection) {
      throw PreconditionError("Projection: ||e - e*|| = " + detail::fmt(sa));
    }
    const double idem = opnorm(e_ * e_ - e_);
    if (idem > tol::kProjection) {
      throw PreconditionError("Projection: ||e^2 - e|| = " + detail::fmt(idem));
    }
  }

  static Projection zero(Index d) { return Projection(Operator::zero(d), Unchecked{}); }
  static Projection identity(Index d) {
    return Projection(Operator::identity(d), Unchecked{});
  }
  /// Orthogonal projection onto the column span of an isometry v.
  static Projection range_of(const Matrix& v, Index d) {
    if (v.cols() == 0) return zero(d);
    return Projection(Operator(v * v.adjoint()));
  }

  const Operator& op() const { return e_; }
  Index dim() const { return e_.dim(); }
  double trace() const { return e_.trace().real(); }
  Projection complement() const {
    return Projection(Operator::identity(dim()) - e_, Unchecked{});
  }

 private:
  struct Unchecked {};
  Projection(Operator e, Unchecked) : e_(std::move(e)) {}
  Operator e_;
};

inline Projection spectral_projection(const Operator& x, const Interval& b) {
  auto es = eigh(x);
  std::vector<Index> keep;
  for (Index i = 0; i < es.values.size(); ++i) {
    if (b.contains(es.values(i))) keep.push_back(i);
  }
  Matrix v(x.dim(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    v.col(static_cast<Index>(c)) = es.vectors.col(keep[c]);
  }
  return Projection::range_of(v, x.dim());
}

/// Projection onto range(e) and range(q): eigenvalue-2 space of e + q.
inline Projection projection_meet(const Projection& e, const Projection& q) {
  if (e.dim() != q.dim()) throw PreconditionError("projection_meet: dimension mismatch");
  auto es = eigh(e.op() + q.op());
  std::vector<Index> keep;
  for (Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) >= 2.0 - tol::kMeet) keep.push_back(i);
  }
  Matrix v(e.dim(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    v.col(static_cast<Index>(c)) = es.vectors.col(keep[c]);
  }
  return Projection::range_of(v, e.dim());
}

/// (x*x)^{1/2}
inline Operator abs(const Operator& x) {
  return functional_calculus(x.adjoint() * x,
                             [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

/// Square root of a positive semidefinite operator (negative noise clipped).
inline Operator sqrt_psd(const Operator& x) {
  return functional_calculus(x, [](double v) { return std::sqrt(std::max(v, 0.0)); });
}

/// Moore-Penrose inverse of a self-adjoint operator; eigenvalues with
/// |v| <= thresh * max(1, ||x||) are treated as zero.
inline Operator pinv_self_adjoint(const Operator& x, double thresh) {
  auto es = eigh(x);
  double scale = 1.0;
  for (Index i = 0; i < es.values.size(); ++i) scale = std::max(scale, std::abs(es.values(i)));
  RealVector w(es.values.size());
  for (Index i = 0; i < w.size(); ++i) {
    w(i) = std::abs(es.values(i)) > thresh * scale ? 1.0 / es.values(i) : 0.0;
  }
  return Operator(es.vectors * w.cast<Complex>().asDiagonal() * es.vectors.adjoint());
}

/// Nonincreasing singular values, each carrying weight 1/size.
struct SingularProfile {
  std::vector<double> values;

  /// mu(t): right-continuous step function on [0, 1).
  double at(double t) const {
    if (values.empty() || t >= 1.0) return 0.0;
    if (t < 0.0) throw PreconditionError("SingularProfile: negative t");
    auto i = static_cast<std::size_t>(std::floor(t * static_cast<double>(values.size())));
    return i < values.size() ? values[i] : 0.0;
  }
};

inline SingularProfile mu_profile(const Operator& x) {
  SingularProfile p;
  if (x.dim() == 0) return p;
  Eigen::JacobiSVD<Matrix> svd(x.matrix());
  const auto& s = svd.singularValues();
  p.values.assign(s.data(), s.data() + s.size());
  std::sort(p.values.begin(), p.values.end(), std::greater<>());
  return p;
}

/// Merge profiles of equal total weight per entry.
inline SingularProfile merge_profiles(const std::vector<SingularProfile>& parts) {
  SingularProfile out;
  for (const auto& p : parts) out.values.insert(out.values.end(), p.values.begin(), p.values.end());
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

/// Strong L_p or weak L_{p,inf}, p in [1, inf].
struct NormSpec {
  enum class Kind { Strong, Weak };
  Kind kind = Kind::Strong;
  double p = 2.0;

  static NormSpec lp(double p) { return check({Kind::Strong, p}); }
  static NormSpec weak(double p) { return check({Kind::Weak, p}); }
  static NormSpec inf() { return {Kind::Strong, std::numeric_limits<double>::infinity()}; }

 private:
  static NormSpec check(NormSpec s) {
    if (!(s.p >= 1.0)) {
      throw PreconditionError("norm: p must be >= 1, got " + detail::fmt(s.p));
    }
    return s;
  }
};

/// Norm of the step function described by a profile.
inline double norm(const SingularProfile& mu, NormSpec spec) {
  if (!(spec.p >= 1.0)) throw PreconditionError("norm: p must be >= 1");
  if (mu.values.empty()) return 0.0;
  const double n = static_cast<double>(mu.values.size());
  if (std::isinf(spec.p)) return mu.values.front();
  if (spec.kind == NormSpec::Kind::Strong) {
    double s = 0.0;
    for (double v : mu.values) s += std::pow(v, spec.p);
    return std::pow(s / n, 1.0 / spec.p);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < mu.values.size(); ++i) {
    best = std::max(best, mu.values[i] * std::pow(static_cast<double>(i + 1) / n, 1.0 / spec.p));
  }
  return best;
}

inline double norm(const Operator& x, NormSpec spec) { return norm(mu_profile(x), spec); }

/// Smallest eigenvalue of b - a; the order a <= b holds iff this is >= -eps.
inline double order_gap(const Operator& a, const Operator& b) { return min_eigenvalue(b - a); }

}  // namespace vlab
