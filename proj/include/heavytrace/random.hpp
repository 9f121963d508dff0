/*
 * Copyright (c) The heavytrace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HEAVYTRACE_RANDOM_HPP
#define HEAVYTRACE_RANDOM_HPP

// Seeded randomness with output that is identical across standard
// libraries: std::mt19937_64 is fully specified, but the std::*_distribution
// adaptors and std::shuffle are not, so the conversions live here.

#include <cstdint>
#include <random>

namespace heavytrace {

using Engine = std::mt19937_64;

/// One SplitMix64 step (Steele, Lea and Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream `stream` under master seed `seed`. Depends only on the
/// pair, so streams can be generated in any order or in parallel.
constexpr std::uint64_t substream_seed(std::uint64_t seed,
                                       std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(~stream));
}

inline Engine make_substream(std::uint64_t seed, std::uint64_t stream) {
  return Engine{substream_seed(seed, stream)};
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double uniform01_open_low(Engine& eng) { return 1.0 - uniform01(eng); }

/// Unbiased integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t x = eng();
    if (x >= limit) return x % bound;
  }
}

}  // namespace heavytrace

#endif  // HEAVYTRACE_RANDOM_HPP
