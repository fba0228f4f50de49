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

// Deterministic per-trial random inputs.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "vlab/atoms.hpp"
#include "vlab/operator_field.hpp"

namespace vlab {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed of trial i for a claim: splitmix64 over (master, FNV-1a(claim), i).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view claim, std::uint64_t trial) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : claim) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return detail::splitmix64(detail::splitmix64(detail::splitmix64(master) ^ h) ^ trial);
}

/// Complex Gaussian matrix with standard normal real and imaginary parts.
inline Matrix gaussian_matrix(Rng& rng, Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      const double re = g(rng);
      m(i, j) = Complex(re, g(rng));
    }
  }
  return m;
}

inline Operator random_operator(Rng& rng, Index d) { return Operator(gaussian_matrix(rng, d)); }

/// g* g + 1e-6.
inline Operator random_positive_operator(Rng& rng, Index d) {
  const Matrix g = gaussian_matrix(rng, d);
  return Operator(g.adjoint() * g + 1e-6 * Matrix::Identity(d, d));
}

inline OperatorField random_field(Rng& rng, const RadixSequence& R, Index d) {
  std::vector<Operator> v;
  v.reserve(R.size());
  for (std::uint64_t t = 0; t < R.size(); ++t) v.push_back(random_operator(rng, d));
  return OperatorField(R, std::move(v));
}

inline OperatorField random_positive_field(Rng& rng, const RadixSequence& R, Index d) {
  std::vector<Operator> v;
  v.reserve(R.size());
  for (std::uint64_t t = 0; t < R.size(); ++t) v.push_back(random_positive_operator(rng, d));
  return OperatorField(R, std::move(v));
}

/// Projection onto the span of `rank` Gaussian vectors.
inline Projection random_projection(Rng& rng, Index d, Index rank) {
  if (rank < 0 || rank > d) throw PreconditionError("random_projection: rank out of range");
  if (rank == 0) return Projection::zero(d);
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, d));
  const Matrix q = qr.householderQ() * Matrix::Identity(d, rank);
  return Projection(Operator(q * q.adjoint()));
}

/// Simple atom at a random level 1 <= k < N, cube and fiber projection.
inline SimpleAtom random_atom(Rng& rng, const RadixSequence& R, Index d) {
  if (R.depth() < 2) throw PreconditionError("random_atom: depth must be >= 2");
  std::uniform_int_distribution<int> level(1, R.depth() - 1);
  const int k = level(rng);
  std::uniform_int_distribution<std::uint64_t> cube(0, R.cumulative(k) - 1);
  const std::uint64_t c = cube(rng);
  std::uniform_int_distribution<Index> rank(1, d);
  const Projection e = random_projection(rng, d, rank(rng));
  return make_simple_atom(R, k, c, e, rng());
}

}  // namespace vlab
