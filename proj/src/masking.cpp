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

#include "skelfill/masking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "skelfill/error.hpp"
#include "skelfill/random.hpp"

namespace skelfill {

SkeletonGraph::SkeletonGraph(std::size_t joints,
                             std::vector<std::pair<std::size_t, std::size_t>> edges)
    : joints_(joints), edges_(std::move(edges)), degree_(joints, 0) {
  if (joints_ == 0) throw DegenerateGraph("graph has no joints");
  std::vector<std::size_t> parent(joints_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges_) {
    if (a >= joints_ || b >= joints_) {
      throw DegenerateGraph("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") outside [0, " + std::to_string(joints_) + ")");
    }
    if (a == b) throw DegenerateGraph("self loop at joint " + std::to_string(a));
    ++degree_[a];
    ++degree_[b];
    parent[find(a)] = find(b);
  }
  for (std::size_t v = 1; v < joints_; ++v) {
    if (find(v) != find(0)) {
      throw DegenerateGraph("joint " + std::to_string(v) + " is not connected to joint 0");
    }
  }
}

SkeletonGraph SkeletonGraph::ntu25() {
  // 1-based pairs of the Kinect v2 body.
  static constexpr std::pair<int, int> kPairs[] = {
      {1, 2},   {2, 21},  {3, 21},  {4, 3},   {5, 21},  {6, 5},   {7, 6},   {8, 7},
      {9, 21},  {10, 9},  {11, 10}, {12, 11}, {13, 1},  {14, 13}, {15, 14}, {16, 15},
      {17, 1},  {18, 17}, {19, 18}, {20, 19}, {22, 23}, {23, 8},  {24, 25}, {25, 12}};
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& [a, b] : kPairs) {
    edges.emplace_back(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1));
  }
  return SkeletonGraph(kNtuJoints, std::move(edges));
}

SkeletonGraph read_edge_list(std::istream& in, std::size_t joints) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    long long a = 0, b = 0;
    if (!(ss >> a)) continue;
    std::string rest;
    if (!(ss >> b) || (ss >> rest) || a < 0 || b < 0) {
      throw FormatError("edge list line " + std::to_string(line_no) + ": expected 'i j'");
    }
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    max_index = std::max({max_index, edges.back().first, edges.back().second});
  }
  if (joints == 0) joints = edges.empty() ? 1 : max_index + 1;
  return SkeletonGraph(joints, std::move(edges));
}

SkeletonGraph read_edge_list_file(const std::string& path, std::size_t joints) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_edge_list(in, joints);
}

std::vector<double> csm_probabilities(const SkeletonGraph& graph) {
  const auto& d = graph.degree();
  const double total = std::accumulate(d.begin(), d.end(), 0.0);
  if (total <= 0.0) throw DegenerateGraph("all joint degrees are zero");
  std::vector<double> p(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) p[i] = d[i] / total;
  return p;
}

std::vector<int> missing_frequency(const BatchMissingMatrix& batch) {
  std::vector<int> f(batch.joints(), 0);
  for (const auto& row : batch.rows) {
    if (row.size() != f.size()) throw DimensionMismatch("ragged missing joint matrix");
    for (std::size_t i = 0; i < row.size(); ++i) f[i] += row[i] ? 1 : 0;
  }
  return f;
}

std::vector<int> frequency_degrees(const std::vector<int>& frequency) {
  std::vector<int> fd(frequency.size(), 1);
  if (frequency.empty()) return fd;
  const auto [lo, hi] = std::minmax_element(frequency.begin(), frequency.end());
  const double range = static_cast<double>(*hi - *lo) + kFrequencyDegreeEpsilon;
  for (std::size_t i = 0; i < frequency.size(); ++i) {
    const double scaled = static_cast<double>(frequency[i] - *lo) / range * 3.0 + 1.0;
    fd[i] = static_cast<int>(std::floor(scaled));
  }
  return fd;
}

const char* to_string(MaskStrategy s) {
  return s == MaskStrategy::kCsm ? "CSM" : "ASM-frequency";
}

MaskPlan asm_plan(const BatchMissingMatrix& batch, const SkeletonGraph& graph,
                  std::size_t masked, std::uint64_t seed) {
  const std::size_t V = graph.joints();
  if (masked < 1 || masked > V) {
    throw MaskCountOutOfRange("masked joint count must be in [1, " + std::to_string(V) +
                              "], got " + std::to_string(masked));
  }
  if (batch.batch() > 0 && batch.joints() != V) {
    throw DimensionMismatch("batch has " + std::to_string(batch.joints()) +
                            " joints, graph has " + std::to_string(V));
  }

  MaskPlan plan;
  const std::vector<int> freq = batch.batch() > 0 ? missing_frequency(batch) : std::vector<int>(V, 0);
  if (std::accumulate(freq.begin(), freq.end(), 0LL) == 0) {
    plan.strategy_used = MaskStrategy::kCsm;
    plan.probabilities = csm_probabilities(graph);
  } else {
    plan.strategy_used = MaskStrategy::kAsmFrequency;
    const std::vector<int> fd = frequency_degrees(freq);
    const double total = std::accumulate(fd.begin(), fd.end(), 0.0);
    plan.probabilities.resize(V);
    for (std::size_t i = 0; i < V; ++i) plan.probabilities[i] = fd[i] / total;
  }

  Rng rng(seed);
  plan.masked_joints = weighted_sample_without_replacement(plan.probabilities, masked, rng);
  std::sort(plan.masked_joints.begin(), plan.masked_joints.end());
  return plan;
}

std::vector<double> motion_energy(const SkeletonSequence& seq) {
  std::vector<double> e(seq.frames(), 0.0);
  for (std::size_t t = 1; t < seq.frames(); ++t) {
    for (std::size_t m = 0; m < seq.bodies(); ++m) {
      for (std::size_t v = 0; v < seq.joints(); ++v) {
        if (!seq.joint_present(t, v, m) || !seq.joint_present(t - 1, v, m)) continue;
        for (std::size_t c = 0; c < kChannels; ++c) {
          const double d = static_cast<double>(seq.at(c, t, v, m)) - seq.at(c, t - 1, v, m);
          e[t] += d * d;
        }
      }
    }
  }
  return e;
}

std::vector<std::size_t> matm_plan(const SkeletonSequence& seq, std::size_t frames,
                                   std::uint64_t seed) {
  if (frames < 1 || frames > seq.frames()) {
    throw FrameCountOutOfRange("masked frame count must be in [1, " +
                               std::to_string(seq.frames()) + "], got " + std::to_string(frames));
  }
  const std::vector<double> energy = motion_energy(seq);
  Rng rng(seed);
  auto picked = weighted_sample_without_replacement(energy, frames, rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace skelfill
