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

#include "skelfill/skeleton.hpp"

namespace skelfill {

// Generator for a labelled corpus of smooth joint trajectories. Every
// (class, joint, channel) gets its own sinusoid (amplitude, frequency,
// phase) around a shared rest pose; samples of a class differ by a small
// phase shift, an amplitude scale, a global translation and Gaussian jitter.
struct SyntheticOptions {
  std::size_t classes = 10;
  std::size_t per_class = 100;
  std::size_t frames = 50;
  std::size_t joints = kNtuJoints;
  std::size_t bodies = 1;
  std::uint64_t seed = 2024;
  double noise = 0.005;        // meters
  double phase_jitter = 0.15;  // radians
  double amplitude_jitter = 0.05;
};

// Absolute coordinates, no missing values. Ids are "c<class>_s<index>",
// labels are the class index.
Dataset make_synthetic_corpus(const SyntheticOptions& options);

}  // namespace skelfill
