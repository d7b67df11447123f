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

#include "skelfill/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace skelfill {

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  // Largest multiple of range that fits; values above it are rejected.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % range);
}

double Rng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> weighted_sample_without_replacement(
    std::span<const double> weights, std::size_t count, Rng& rng) {
  std::vector<std::size_t> remaining(weights.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  std::vector<std::size_t> picked;
  picked.reserve(count);
  while (picked.size() < count && !remaining.empty()) {
    double total = 0.0;
    for (std::size_t idx : remaining) total += weights[idx];

    std::size_t pos = remaining.size() - 1;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t j = 0; j < remaining.size(); ++j) {
        acc += weights[remaining[j]];
        if (u < acc) {
          pos = j;
          break;
        }
      }
      // Rounding can leave u == acc at the end; fall back to the last
      // positive-weight entry.
      while (weights[remaining[pos]] <= 0.0 && pos > 0) --pos;
    } else {
      pos = rng.index(remaining.size());
    }
    picked.push_back(remaining[pos]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return picked;
}

}  // namespace skelfill
