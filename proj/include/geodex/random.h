// Copyright 2026 The Geodex Authors
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

#ifndef GEODEX_RANDOM_H_
#define GEODEX_RANDOM_H_

#include <cstdint>
#include <random>

namespace geodex {

// Every stochastic operation takes a caller-owned engine of this type.
using Rng = std::mt19937_64;

inline double Uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double StandardNormal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Derives an independent stream seed from a base seed and a stream tag
// (splitmix64 finalizer over the combined words).
inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t tag,
                                std::uint64_t index = 0) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (tag + 1) +
                    0xBF58476D1CE4E5B9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace geodex

#endif  // GEODEX_RANDOM_H_
