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

#include "skelfill/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "skelfill/random.hpp"

namespace skelfill {

namespace {
struct Wave {
  double amplitude;
  double frequency;  // cycles per sequence
  double phase;
};
}  // namespace

Dataset make_synthetic_corpus(const SyntheticOptions& o) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t V = o.joints;
  Rng pose_rng(o.seed);

  std::vector<std::array<double, 3>> rest(V);
  for (auto& p : rest) {
    p = {pose_rng.uniform(-0.35, 0.35), pose_rng.uniform(-0.8, 0.8), pose_rng.uniform(-0.1, 0.1)};
  }

  std::vector<Wave> waves(o.classes * V * kChannels);
  for (auto& w : waves) {
    w = {pose_rng.uniform(0.05, 0.25), pose_rng.uniform(0.5, 2.5), pose_rng.uniform(0.0, kTwoPi)};
  }

  const Shape shape{o.frames, V, o.bodies};
  std::vector<SkeletonSequence> samples;
  samples.reserve(o.classes * o.per_class);
  for (std::size_t cls = 0; cls < o.classes; ++cls) {
    for (std::size_t s = 0; s < o.per_class; ++s) {
      char id[64];
      std::snprintf(id, sizeof(id), "c%03zu_s%04zu", cls, s);
      SkeletonSequence seq(shape, id, static_cast<int>(cls));
      Rng rng(derive_seed(o.seed + 1 + cls, s) * 0x9E3779B97F4A7C15ULL);
      for (std::size_t m = 0; m < o.bodies; ++m) {
        const double shift = o.phase_jitter * rng.normal();
        const double scale = 1.0 + o.amplitude_jitter * rng.normal();
        const std::array<double, 3> origin = {rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2),
                                              rng.uniform(2.5, 3.5)};
        const double body_offset = 0.8 * static_cast<double>(m);
        for (std::size_t t = 0; t < o.frames; ++t) {
          const double u = static_cast<double>(t) / static_cast<double>(o.frames);
          for (std::size_t v = 0; v < V; ++v) {
            for (std::size_t c = 0; c < kChannels; ++c) {
              const Wave& w = waves[(cls * V + v) * kChannels + c];
              const double value = origin[c] + rest[v][c] + (c == 0 ? body_offset : 0.0) +
                                   scale * w.amplitude * std::sin(kTwoPi * w.frequency * u + w.phase + shift) +
                                   o.noise * rng.normal();
              seq.at(c, t, v, m) = static_cast<float>(value);
            }
          }
        }
      }
      samples.push_back(std::move(seq));
    }
  }
  return Dataset(std::move(samples), Split::kTrain);
}

}  // namespace skelfill
