// Copyright 2026 The hpcdetect Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <numbers>
#include <cmath>

namespace hpcdetect {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed for a named purpose.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(mix64(seed) ^ (tag * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
}

/// Counter-based generator: output k is mix64(key + (k+1) * golden), where key
/// is mix64(seed). Every draw is a pure function of (seed, counter), so the
/// streams are reproducible by any implementation of the same recipe.
///
/// Normals use the cosine branch of Box-Muller, consuming exactly two uniform
/// draws per normal: u1 = 1 - uniform01() (in (0,1]), u2 = uniform01(),
/// z = sqrt(-2 ln u1) * cos(2 pi u2).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [-bound, bound).
  double uniform_symmetric(double bound) noexcept {
    return bound * (2.0 * uniform01() - 1.0);
  }

  /// Unbiased integer in [0, n) by rejection. n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double normal(double mean = 0.0, double stddev = 1.0) noexcept {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle driven by CounterRng::uniform_below.
template <typename Container>
void shuffle_in_place(Container& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace hpcdetect
