// Copyright 2026 The GAAE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace gaae {

using Rng = std::mt19937_64;

// Uniform on the open interval (0, 1): the 53 high bits are offset by half
// an ulp so neither endpoint is reachable.
inline double UniformOpen01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double UniformSymmetric(Rng& rng, double limit) {
  return (2.0 * UniformOpen01(rng) - 1.0) * limit;
}

// Box–Muller, one value per call. The standard distributions and
// std::shuffle are implementation-defined, so they are avoided to keep
// outputs identical across standard libraries.
inline double StandardNormal(Rng& rng) {
  const double r = std::sqrt(-2.0 * std::log(UniformOpen01(rng)));
  return r * std::cos(2.0 * std::numbers::pi * UniformOpen01(rng));
}

// Uniform on [0, n) by rejection, n > 0.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Fisher–Yates.
template <typename It>
void Shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1),
                   first + static_cast<std::ptrdiff_t>(UniformIndex(rng, i)));
  }
}

// Derives an independent stream seed from a parent seed and a stream index.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace gaae
