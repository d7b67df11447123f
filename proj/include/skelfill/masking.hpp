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
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "skelfill/skeleton.hpp"

namespace skelfill {

// Undirected, connected joint graph.
class SkeletonGraph {
 public:
  // Throws DegenerateGraph if an edge is out of range, a self loop, or the
  // graph is disconnected.
  SkeletonGraph(std::size_t joints, std::vector<std::pair<std::size_t, std::size_t>> edges);

  // The 25-joint Kinect v2 layout.
  static SkeletonGraph ntu25();

  std::size_t joints() const { return joints_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::vector<int>& degree() const { return degree_; }

 private:
  std::size_t joints_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<int> degree_;
};

// Edge-list text: one "i j" pair (0-based) per line, '#' starts a comment.
// The joint count is the largest index + 1 unless `joints` is given.
SkeletonGraph read_edge_list(std::istream& in, std::size_t joints = 0);
SkeletonGraph read_edge_list_file(const std::string& path, std::size_t joints = 0);

// Central spatial masking: p_i = d_i / sum_j d_j. Throws DegenerateGraph
// when every degree is zero.
std::vector<double> csm_probabilities(const SkeletonGraph& graph);

// Batch slice of the missing joint matrix: rows[b][v] is true when joint v of
// batch sample b is missing somewhere in the sequence.
struct BatchMissingMatrix {
  std::vector<std::vector<bool>> rows;

  std::size_t batch() const { return rows.size(); }
  std::size_t joints() const { return rows.empty() ? 0 : rows.front().size(); }
};

// F_i = sum_b B[b][i].
std::vector<int> missing_frequency(const BatchMissingMatrix& batch);

inline constexpr double kFrequencyDegreeEpsilon = 0.001;

// FD_i = floor((F_i - min F) / (max F - min F + eps) * 3 + 1); always 1..3.
std::vector<int> frequency_degrees(const std::vector<int>& frequency);

enum class MaskStrategy { kCsm, kAsmFrequency };
const char* to_string(MaskStrategy s);

struct MaskPlan {
  std::vector<double> probabilities;
  // Sorted ascending, distinct.
  std::vector<std::size_t> masked_joints;
  MaskStrategy strategy_used = MaskStrategy::kCsm;
};

inline constexpr std::size_t kDefaultMaskedJoints = 9;
inline constexpr std::size_t kDefaultMaskedFrames = 10;

// Adaptive spatial masking. With no missing joint in the batch the plan uses
// the CSM probabilities; otherwise p_i = FD_i / sum_j FD_j. `masked` joints
// are then drawn without replacement. Throws MaskCountOutOfRange unless
// 1 <= masked <= V, DimensionMismatch if the batch width is not V.
MaskPlan asm_plan(const BatchMissingMatrix& batch, const SkeletonGraph& graph,
                  std::size_t masked, std::uint64_t seed);

// Per-frame motion energy: e_0 = 0 and e_t is the sum over joint instances
// present in frames t-1 and t of the squared displacement.
std::vector<double> motion_energy(const SkeletonSequence& seq);

// Motion-weighted temporal masking: draws `frames` distinct frame indices
// with weights proportional to motion_energy (uniform when the sequence is
// static). Sorted ascending. Throws FrameCountOutOfRange.
std::vector<std::size_t> matm_plan(const SkeletonSequence& seq, std::size_t frames,
                                   std::uint64_t seed);

}  // namespace skelfill
