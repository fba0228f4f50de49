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

// Fitted constants, verified inequality instances and CSV emission.

#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace vlab {

/// Decimal text with 17 significant digits, '.' separator.
inline std::string format_real(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

struct FitResult {
  double c_hat = 0.0;
  std::size_t argmax = 0;
  std::size_t samples = 0;
  std::size_t degenerate_pairs = 0;
  /// Every pair had a nonpositive right side.
  bool degenerate = false;
};

/// Streaming max-ratio fit; ties keep the earliest index.
class ConstantFitter {
 public:
  /// Returns true when this pair became the new maximizer.
  bool add(double lhs, double rhs) {
    const std::size_t idx = count_++;
    if (!(rhs > 0.0) || !std::isfinite(rhs)) {
      ++result_.degenerate_pairs;
      return false;
    }
    const double ratio = lhs / rhs;
    if (!seen_ || ratio > result_.c_hat) {
      seen_ = true;
      result_.c_hat = ratio;
      result_.argmax = idx;
      last_lhs_ = lhs;
      last_rhs_ = rhs;
      return true;
    }
    return false;
  }

  FitResult result() const {
    FitResult r = result_;
    r.samples = count_;
    r.degenerate = !seen_;
    if (!seen_) r.c_hat = 0.0;
    return r;
  }
  double argmax_lhs() const { return last_lhs_; }
  double argmax_rhs() const { return last_rhs_; }

 private:
  FitResult result_;
  std::size_t count_ = 0;
  bool seen_ = false;
  double last_lhs_ = 0.0;
  double last_rhs_ = 0.0;
};

/// c_hat = max lhs/rhs over pairs with rhs > 0.
inline FitResult fit_constant(const std::vector<std::pair<double, double>>& pairs) {
  ConstantFitter f;
  for (const auto& [l, r] : pairs) f.add(l, r);
  return f.result();
}

/// One verified inequality instance: lhs <= c * rhs.
struct BoundReport {
  std::string claim;
  /// Parameters of the maximizing instance, "key=value;..." form.
  std::string params;
  double lhs = 0.0;
  double rhs_unit = 0.0;
  double fitted_c = 0.0;
  int depth = 0;
  std::string system;
  double delta = 0.0;
  std::size_t samples = 0;
  bool degenerate = false;
  bool passed = true;
  std::string note;

  std::string status() const {
    if (!passed) return "FAIL";
    return degenerate ? "PASS-DEGENERATE" : "PASS";
  }

  static std::string csv_header() {
    return "lemma,params,lhs,rhs_unit_constant,fitted_c,depth,system,delta,samples,status,note";
  }

  std::string csv_row() const {
    std::ostringstream os;
    os << claim << ',' << quote(params) << ',' << format_real(lhs) << ',' << format_real(rhs_unit)
       << ',' << format_real(fitted_c) << ',' << depth << ',' << system << ','
       << format_real(delta) << ',' << samples << ',' << status() << ',' << quote(note);
    return os.str();
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
};

inline void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& rows) {
  os << BoundReport::csv_header() << '\n';
  for (const auto& r : rows) os << r.csv_row() << '\n';
}

}  // namespace vlab
