// Copyright 2026 The skelfill Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace skelfill {

// Seeded generator with distribution helpers written directly on top of the
// 64-bit Mersenne Twister output. The standard distributions are
// implementation-defined, so they are avoided wherever a stage's output must
// be reproducible byte-for-byte across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n), unbiased by rejection. n must be > 0.
  std::size_t index(std::size_t n);

  // Standard normal by Box-Muller (one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

// Draws `count` distinct indices from [0, weights.size()) by sequential
// weighted draws: each pick is proportional to the remaining weights, which
// are renormalized after the picked index is removed. When every remaining
// weight is zero the pick is uniform over the remaining indices.
// Indices come back in draw order.
std::vector<std::size_t> weighted_sample_without_replacement(
    std::span<const double> weights, std::size_t count, Rng& rng);

// Per-sample stream derived from a stage seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::size_t sample_index) {
  return seed ^ static_cast<std::uint64_t>(sample_index);
}

}  // namespace skelfill
