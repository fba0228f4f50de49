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

// Exact text containers for operators and fields, and JSON forms of reports.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vlab/cz.hpp"
#include "vlab/sunouchi.hpp"
#include "vlab/transference.hpp"
#include "vlab/vilenkin.hpp"

namespace vlab {

using Json = nlohmann::ordered_json;

namespace detail {

/// C99 hexadecimal float text, which round-trips every double.
inline std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw PreconditionError("serialize: malformed number '" + s + "'");
  return v;
}

inline void write_matrix_line(std::ostream& os, const Matrix& m) {
  bool first = true;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      os << (first ? "" : " ") << hexfloat(m(i, j).real()) << ' ' << hexfloat(m(i, j).imag());
      first = false;
    }
  }
  os << '\n';
}

inline Matrix read_matrix_line(std::istream& is, Index d) {
  Matrix m(d, d);
  std::string re, im;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (!(is >> re >> im)) throw PreconditionError("serialize: truncated entry list");
      m(i, j) = Complex(parse_hexfloat(re), parse_hexfloat(im));
    }
  }
  return m;
}

inline std::string expect_key(std::istream& is, const char* key) {
  std::string k, v;
  if (!(is >> k >> v) || k != key) throw PreconditionError(std::string("serialize: expected '") + key + "'");
  return v;
}

}  // namespace detail

/// "VLAB-FIELD 1", radix, depth and fiber_dim lines, then one line per point
/// with row-major (re, im) pairs in hexadecimal float notation.
inline void write_field(std::ostream& os, const OperatorField& f) {
  os << "VLAB-FIELD 1\nradix " << f.radix().to_string() << "\ndepth " << f.radix().depth() << "\nfiber_dim "
     << f.fiber_dim() << '\n';
  for (std::uint64_t t = 0; t < f.size(); ++t) detail::write_matrix_line(os, f[t].matrix());
}

inline OperatorField read_field(std::istream& is) {
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "VLAB-FIELD" || version != "1") {
    throw PreconditionError("read_field: missing VLAB-FIELD 1 header");
  }
  const RadixSequence R = RadixSequence::parse(detail::expect_key(is, "radix"));
  if (std::stoi(detail::expect_key(is, "depth")) != R.depth()) throw PreconditionError("read_field: depth mismatch");
  const Index d = std::stol(detail::expect_key(is, "fiber_dim"));
  if (d < 1) throw PreconditionError("read_field: fiber_dim must be >= 1");
  std::vector<Operator> v;
  v.reserve(R.size());
  for (std::uint64_t t = 0; t < R.size(); ++t) v.emplace_back(detail::read_matrix_line(is, d));
  return OperatorField(R, std::move(v));
}

/// "VLAB-OPERATOR 1", dim line, then one line of row-major (re, im) pairs.
inline void write_operator(std::ostream& os, const Operator& x) {
  os << "VLAB-OPERATOR 1\ndim " << x.dim() << '\n';
  detail::write_matrix_line(os, x.matrix());
}

inline Operator read_operator(std::istream& is) {
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "VLAB-OPERATOR" || version != "1") {
    throw PreconditionError("read_operator: missing VLAB-OPERATOR 1 header");
  }
  const Index d = std::stol(detail::expect_key(is, "dim"));
  return Operator(detail::read_matrix_line(is, d));
}

inline std::string field_text(const OperatorField& f) {
  std::ostringstream os;
  write_field(os, f);
  return os.str();
}

inline OperatorField field_from_text(const std::string& s) {
  std::istringstream is(s);
  return read_field(is);
}

/// {lambda, depth, fitted_c_bd, fitted_c_boff, fitted_c_total, tail,
/// sup_bound}; with witness set, also the projection e as field text.
inline Json to_json(const WeakTypeCertificate& c, bool witness = false) {
  Json j;
  j["lambda"] = c.lambda;
  j["depth"] = c.depth;
  j["fitted_c_bd"] = c.fitted_c_bd;
  j["fitted_c_boff"] = c.fitted_c_boff;
  j["fitted_c_total"] = c.fitted_c_total;
  j["tail"] = c.tail;
  j["sup_bound"] = c.sup_bound;
  if (witness) j["e"] = field_text(c.e);
  return j;
}

inline Json to_json(const TransferenceReport& r) {
  Json j;
  j["homomorphism"] = r.homomorphism;
  j["adjoint"] = r.adjoint;
  j["trace"] = r.trace;
  Json lp = Json::object();
  for (std::size_t i = 0; i < r.lp.size(); ++i) {
    lp[std::isinf(r.lp_exponents[i]) ? "inf" : format_real(r.lp_exponents[i])] = r.lp[i];
  }
  j["lp"] = lp;
  j["mu_profile"] = r.mu_profile;
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed;
  j["message"] = r.message;
  return j;
}

inline Json to_json(const IntertwineReport& r) {
  Json j;
  j["n"] = r.n;
  j["k"] = r.k;
  j["cesaro"] = r.cesaro;
  j["cond_exp"] = r.cond_exp;
  j["partial_sum"] = r.partial_sum;
  j["hardy_p1"] = r.hardy_p1;
  j["hardy_p2"] = r.hardy_p2;
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed;
  j["message"] = r.message;
  return j;
}

inline Json to_json(const AssumptionReport& r) {
  Json j;
  j["passed"] = r.passed;
  j["failed_check"] = r.failed_check;
  j["k"] = r.k;
  j["n"] = r.n;
  j["l"] = r.l;
  j["point"] = r.point;
  j["residual"] = r.residual;
  j["delta_max"] = r.delta_max;
  j["message"] = r.message;
  return j;
}

inline Json to_json(const FactorSunouchiReport& r) {
  Json j;
  j["direct_ratio"] = r.direct_ratio;
  j["transferred_ratio"] = r.transferred_ratio;
  j["direct_numerator"] = r.direct_numerator;
  j["direct_denominator"] = r.direct_denominator;
  j["transfer_residual"] = r.transfer_residual;
  j["ratio_gap"] = r.ratio_gap;
  j["degenerate"] = r.degenerate;
  j["passed"] = r.passed;
  j["message"] = r.message;
  return j;
}

}  // namespace vlab
