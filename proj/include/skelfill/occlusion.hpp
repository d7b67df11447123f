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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "skelfill/skeleton.hpp"

namespace skelfill {

struct OccludedJoint {
  std::size_t t = 0;
  std::size_t v = 0;
  std::size_t m = 0;
  std::array<float, 3> original{};
};

struct SampleOcclusion {
  std::string sample_id;
  // Sorted by (t, v, m); unique.
  std::vector<OccludedJoint> joints;
};

// Ground truth for one occlusion pass, parallel to the dataset's samples.
struct OcclusionRecord {
  std::vector<SampleOcclusion> samples;

  std::size_t total() const;
  bool empty() const { return total() == 0; }
};

struct OcclusionResult {
  Dataset dataset;
  OcclusionRecord record;
};

// Number of joint instances hidden for a given rate over `instances`
// candidates: floor(rate * instances), guarded against the representation
// error of decimal rates (0.29 * 100 must give 29).
std::size_t occlusion_count(double rate, std::size_t instances);

// Hides floor(rate * T * V * M_present) joint instances per sample, chosen
// uniformly without replacement among the joint instances of present bodies.
// Sample i uses the stream derive_seed(seed, i).
// Throws AlreadyOccluded if the input holds NaN, RateOutOfRange.
OcclusionResult occlude_random(const Dataset& ds, double rate, std::uint64_t seed);

// For every sample and every listed joint, hides the joint in
// floor(frame_fraction * T) frames drawn uniformly without replacement. The
// same frames are hidden in every present body slot.
// Throws JointIndexOutOfRange, RateOutOfRange, AlreadyOccluded.
OcclusionResult occlude_joints(const Dataset& ds, const std::vector<std::size_t>& joints,
                               double frame_fraction, std::uint64_t seed);

// Writes the recorded originals back into `ds` (matched by sample id).
void restore_occlusion(Dataset& ds, const OcclusionRecord& record);

// CSV with header sample_id,t,v,m,x,y,z. Coordinates use shortest
// round-trip formatting so reading back is exact.
void write_occlusion_csv(std::ostream& out, const OcclusionRecord& record);
OcclusionRecord read_occlusion_csv(std::istream& in);

}  // namespace skelfill
