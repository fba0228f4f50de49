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

// Mixed-radix index arithmetic and points of the truncated group.

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vlab/matrix_core.hpp"

namespace vlab {

using Digits = std::vector<int>;

/// Radix m = (m_0, ..., m_{N-1}) with cumulative products M_0 = 1,
/// M_{k+1} = m_k M_k.
class RadixSequence {
 public:
  RadixSequence() : cumulative_{1} {}

  explicit RadixSequence(std::vector<int> radix) : radix_(std::move(radix)) {
    cumulative_.reserve(radix_.size() + 1);
    cumulative_.push_back(1);
    for (std::size_t k = 0; k < radix_.size(); ++k) {
      if (radix_[k] < 2) {
        throw PreconditionError("RadixSequence: m_" + std::to_string(k) + " = " +
                                std::to_string(radix_[k]) + " < 2");
      }
      const std::uint64_t prev = cumulative_.back();
      if (prev > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(radix_[k])) {
        throw PreconditionError("RadixSequence: group order overflows 64 bits");
      }
      cumulative_.push_back(prev * static_cast<std::uint64_t>(radix_[k]));
    }
  }

  static RadixSequence uniform(int m, int depth) {
    if (depth < 0) throw PreconditionError("RadixSequence: negative depth");
    return RadixSequence(std::vector<int>(static_cast<std::size_t>(depth), m));
  }

  /// Parse "2,3,2".
  static RadixSequence parse(std::string_view text) {
    std::vector<int> out;
    std::string item;
    std::istringstream is{std::string(text)};
    while (std::getline(is, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        int v = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        out.push_back(v);
      } catch (const std::exception&) {
        throw PreconditionError("RadixSequence: bad entry '" + item + "'");
      }
    }
    return RadixSequence(std::move(out));
  }

  int depth() const { return static_cast<int>(radix_.size()); }
  int radix(int k) const { return radix_.at(static_cast<std::size_t>(k)); }
  const std::vector<int>& radices() const { return radix_; }
  std::uint64_t cumulative(int k) const { return cumulative_.at(static_cast<std::size_t>(k)); }
  /// M_N, the number of group points.
  std::uint64_t size() const { return cumulative_.back(); }
  int max_radix() const {
    int m = 0;
    for (int r : radix_) m = std::max(m, r);
    return m;
  }

  /// (m_0, m_0, m_1, m_1, ...)
  RadixSequence doubled() const {
    std::vector<int> d;
    for (int r : radix_) {
      d.push_back(r);
      d.push_back(r);
    }
    return RadixSequence(std::move(d));
  }

  RadixSequence truncated(int depth) const {
    if (depth < 0 || depth > this->depth()) throw PreconditionError("RadixSequence: bad truncation");
    return RadixSequence(std::vector<int>(radix_.begin(), radix_.begin() + depth));
  }

  /// Same radix continued to a larger depth by repeating the last entry.
  RadixSequence extended(int depth) const {
    if (radix_.empty()) throw PreconditionError("RadixSequence: cannot extend an empty radix");
    std::vector<int> r = radix_;
    while (static_cast<int>(r.size()) < depth) r.push_back(radix_.back());
    r.resize(static_cast<std::size_t>(depth));
    return RadixSequence(std::move(r));
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t k = 0; k < radix_.size(); ++k) {
      if (k) s += ',';
      s += std::to_string(radix_[k]);
    }
    return s;
  }

  void check_index(std::uint64_t n, const char* what = "index") const {
    if (n >= size()) {
      throw PreconditionError(std::string(what) + " " + std::to_string(n) +
                              " is not below M_N = " + std::to_string(size()));
    }
  }

  Digits to_digits(std::uint64_t n) const {
    check_index(n);
    Digits d(radix_.size());
    for (std::size_t k = 0; k < radix_.size(); ++k) {
      d[k] = static_cast<int>(n % static_cast<std::uint64_t>(radix_[k]));
      n /= static_cast<std::uint64_t>(radix_[k]);
    }
    return d;
  }

  std::uint64_t from_digits(std::span<const int> d) const {
    if (d.size() != radix_.size()) throw PreconditionError("from_digits: wrong length");
    std::uint64_t n = 0;
    for (std::size_t k = 0; k < radix_.size(); ++k) {
      if (d[k] < 0 || d[k] >= radix_[k]) {
        throw PreconditionError("from_digits: digit " + std::to_string(k) + " out of range");
      }
      n += static_cast<std::uint64_t>(d[k]) * cumulative_[k];
    }
    return n;
  }

  /// n_k
  int digit(std::uint64_t n, int k) const {
    return static_cast<int>((n / cumulative(k)) % static_cast<std::uint64_t>(radix(k)));
  }

  /// n^{(k)}: digits below k zeroed.
  std::uint64_t upper(std::uint64_t n, int k) const { return n - n % cumulative(k); }

  /// Digitwise addition mod m_k.
  std::uint64_t triangle_add(std::uint64_t a, std::uint64_t b) const {
    check_index(a);
    check_index(b);
    std::uint64_t out = 0;
    for (int k = 0; k < depth(); ++k) {
      out += static_cast<std::uint64_t>((digit(a, k) + digit(b, k)) % radix(k)) * cumulative(k);
    }
    return out;
  }

  /// Digitwise (m_k - n_k) mod m_k.
  std::uint64_t negate(std::uint64_t n) const {
    check_index(n);
    std::uint64_t out = 0;
    for (int k = 0; k < depth(); ++k) {
      out += static_cast<std::uint64_t>((radix(k) - digit(n, k)) % radix(k)) * cumulative(k);
    }
    return out;
  }

  friend bool operator==(const RadixSequence& a, const RadixSequence& b) {
    return a.radix_ == b.radix_;
  }

 private:
  std::vector<int> radix_;
  std::vector<std::uint64_t> cumulative_;
};

/// A point t = (t_0, ..., t_{N-1}) of the truncated group.
struct GroupPoint {
  Digits coords;

  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;
};

/// Points are enumerated by the same codec as indices: idx = sum t_k M_k.
inline GroupPoint point_at(const RadixSequence& r, std::uint64_t idx) {
  return {r.to_digits(idx)};
}
inline std::uint64_t point_index(const RadixSequence& r, const GroupPoint& t) {
  return r.from_digits(t.coords);
}

/// Coordinatewise addition mod m_k.
inline GroupPoint group_add(const RadixSequence& r, const GroupPoint& a, const GroupPoint& b) {
  return point_at(r, r.triangle_add(point_index(r, a), point_index(r, b)));
}

/// Cube of D(F_k) containing point idx, labelled by idx mod M_k.
inline std::uint64_t cube_of(const RadixSequence& r, std::uint64_t idx, int k) {
  return idx % r.cumulative(k);
}

/// Largest a with t in I_a(s); N when t == s.
inline int agreement(const RadixSequence& r, std::uint64_t s, std::uint64_t t) {
  int a = 0;
  while (a < r.depth() && r.digit(s, a) == r.digit(t, a)) ++a;
  return a;
}

/// Points of the cube c at level k, ascending.
inline std::vector<std::uint64_t> cube_points(const RadixSequence& r, std::uint64_t c, int k) {
  const std::uint64_t step = r.cumulative(k);
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = c; t < r.size(); t += step) out.push_back(t);
  return out;
}

}  // namespace vlab
