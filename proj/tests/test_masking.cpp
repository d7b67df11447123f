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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "skelfill/error.hpp"
#include "skelfill/masking.hpp"
#include "test_support.hpp"

namespace skelfill {
namespace {

BatchMissingMatrix batch_with(std::size_t b, std::size_t v, const std::vector<std::size_t>& hit) {
  BatchMissingMatrix batch;
  batch.rows.assign(b, std::vector<bool>(v, false));
  for (auto& row : batch.rows)
    for (std::size_t j : hit) row[j] = true;
  return batch;
}

TEST(GraphTest, PathGraphCsm) {
  const SkeletonGraph g(3, {{0, 1}, {1, 2}});
  const auto p = csm_probabilities(g);
  EXPECT_DOUBLE_EQ(p[0], 0.25);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_DOUBLE_EQ(p[2], 0.25);
}

TEST(GraphTest, RegularGraphIsUniform) {
  const SkeletonGraph ring(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  for (double p : csm_probabilities(ring)) EXPECT_DOUBLE_EQ(p, 0.2);
}

TEST(GraphTest, Ntu25) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  EXPECT_EQ(g.joints(), 25u);
  EXPECT_EQ(g.edges().size(), 24u);
  EXPECT_EQ(std::accumulate(g.degree().begin(), g.degree().end(), 0), 48);
  const auto p = csm_probabilities(g);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  // Spine mid (joint 20) has four neighbours, hand tips have one.
  EXPECT_DOUBLE_EQ(p[20], 4.0 / 48.0);
  EXPECT_DOUBLE_EQ(p[21], 1.0 / 48.0);
}

TEST(GraphTest, DegenerateGraphs) {
  EXPECT_THROW(SkeletonGraph(3, {{0, 1}}), DegenerateGraph);          // disconnected
  EXPECT_THROW(SkeletonGraph(3, {{0, 1}, {1, 3}}), DegenerateGraph);  // out of range
  EXPECT_THROW(SkeletonGraph(2, {{0, 0}, {0, 1}}), DegenerateGraph);  // self loop
  EXPECT_THROW(SkeletonGraph(2, {}), DegenerateGraph);
}

TEST(GraphTest, EdgeListParsing) {
  std::istringstream in("# toy\n0 1\n1 2  # trailing\n\n2 3\n");
  const SkeletonGraph g = read_edge_list(in);
  EXPECT_EQ(g.joints(), 4u);
  EXPECT_EQ(g.edges().size(), 3u);
  std::istringstream bad("0 x\n");
  EXPECT_THROW(read_edge_list(bad), FormatError);
}

TEST(FrequencyTest, Examples) {
  BatchMissingMatrix batch = batch_with(4, 5, {});
  EXPECT_EQ(missing_frequency(batch), (std::vector<int>{0, 0, 0, 0, 0}));
  batch = batch_with(4, 5, {2});
  EXPECT_EQ(missing_frequency(batch), (std::vector<int>{0, 0, 4, 0, 0}));
  batch.rows[1][0] = true;
  EXPECT_EQ(missing_frequency(batch), (std::vector<int>{1, 0, 4, 0, 0}));
}

TEST(FrequencyDegreeTest, Examples) {
  EXPECT_EQ(frequency_degrees({0, 5, 10}), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(frequency_degrees({7, 7, 7}), (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(frequency_degrees({0, 10}), (std::vector<int>{1, 3}));
  EXPECT_EQ(frequency_degrees({0, 0, 0}), (std::vector<int>{1, 1, 1}));
}

TEST(FrequencyDegreeTest, RangeAndMonotonicity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> f(1 + rng() % 30);
    for (int& x : f) x = static_cast<int>(rng() % 200);
    const auto fd = frequency_degrees(f);
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_GE(fd[i], 1);
      EXPECT_LE(fd[i], 3);
      if (f[i] == *lo) EXPECT_EQ(fd[i], 1);
      if (f[i] == *hi && *hi != *lo) EXPECT_EQ(fd[i], 3);
      for (std::size_t j = 0; j < f.size(); ++j)
        if (f[i] <= f[j]) EXPECT_LE(fd[i], fd[j]);
    }
  }
}

TEST(AsmTest, FallsBackToCsmWithoutMissingJoints) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  const MaskPlan plan = asm_plan(batch_with(8, 25, {}), g, 9, 1);
  EXPECT_EQ(plan.strategy_used, MaskStrategy::kCsm);
  EXPECT_EQ(plan.probabilities, csm_probabilities(g));
  EXPECT_EQ(plan.masked_joints.size(), 9u);
  EXPECT_TRUE(std::is_sorted(plan.masked_joints.begin(), plan.masked_joints.end()));
  EXPECT_EQ(asm_plan(BatchMissingMatrix{}, g, 9, 1).strategy_used, MaskStrategy::kCsm);
}

TEST(AsmTest, FrequentlyMissingJointsGetTheMostMass) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  const MaskPlan plan = asm_plan(batch_with(8, 25, {3, 4, 5}), g, 9, 1);
  EXPECT_EQ(plan.strategy_used, MaskStrategy::kAsmFrequency);
  for (std::size_t v = 0; v < 25; ++v) {
    const double expected = (v >= 3 && v <= 5 ? 3.0 : 1.0) / 31.0;
    EXPECT_NEAR(plan.probabilities[v], expected, 1e-15) << v;
  }
}

TEST(AsmTest, MaskAllAndErrors) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  const MaskPlan all = asm_plan(batch_with(2, 25, {1}), g, 25, 4);
  std::vector<std::size_t> every(25);
  std::iota(every.begin(), every.end(), 0);
  EXPECT_EQ(all.masked_joints, every);
  EXPECT_THROW(asm_plan(batch_with(2, 25, {1}), g, 0, 4), MaskCountOutOfRange);
  EXPECT_THROW(asm_plan(batch_with(2, 25, {1}), g, 26, 4), MaskCountOutOfRange);
  EXPECT_THROW(asm_plan(batch_with(2, 24, {1}), g, 9, 4), DimensionMismatch);
}

TEST(AsmTest, Deterministic) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  const auto batch = batch_with(5, 25, {7, 8});
  EXPECT_EQ(asm_plan(batch, g, 9, 77).masked_joints, asm_plan(batch, g, 9, 77).masked_joints);
}

SkeletonSequence moving_in(std::size_t first, std::size_t last, std::size_t frames) {
  SkeletonSequence seq({frames, 4, 1}, "s");
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t step = std::clamp(t, first, last) - first;
    for (std::size_t v = 0; v < 4; ++v)
      seq.set_joint(t, v, 0, {0.1f * static_cast<float>(step), 0.5f, 0.5f});
  }
  return seq;
}

TEST(MotionEnergyTest, ZeroForFirstFrame) {
  const SkeletonSequence seq = moving_in(2, 5, 8);
  const auto e = motion_energy(seq);
  ASSERT_EQ(e.size(), 8u);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_EQ(e[1], 0.0);
  EXPECT_EQ(e[2], 0.0);
  EXPECT_NEAR(e[3], 4 * 0.01, 1e-6);
  EXPECT_EQ(e[7], 0.0);
}

TEST(MatmTest, StaticSequenceIsUniform) {
  const SkeletonSequence seq = moving_in(0, 0, 20);
  std::vector<int> hits(20, 0);
  for (std::uint64_t s = 0; s < 4000; ++s)
    for (std::size_t t : matm_plan(seq, 2, s)) ++hits[t];
  // 400 expected per frame.
  for (int h : hits) EXPECT_NEAR(h, 400, 90);
}

TEST(MatmTest, PrefersMovingFrames) {
  const SkeletonSequence seq = moving_in(9, 19, 50);  // energy only in frames 10..19
  std::size_t inside = 0, total = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto plan = matm_plan(seq, 10, s);
    EXPECT_TRUE(std::is_sorted(plan.begin(), plan.end()));
    for (std::size_t t : plan) {
      inside += t >= 10 && t <= 19;
      ++total;
    }
  }
  EXPECT_GT(static_cast<double>(inside) / static_cast<double>(total), 0.9);
}

TEST(MatmTest, AllFramesAndErrors) {
  const SkeletonSequence seq = moving_in(3, 6, 12);
  std::vector<std::size_t> every(12);
  std::iota(every.begin(), every.end(), 0);
  EXPECT_EQ(matm_plan(seq, 12, 5), every);
  EXPECT_THROW(matm_plan(seq, 0, 5), FrameCountOutOfRange);
  EXPECT_THROW(matm_plan(seq, 13, 5), FrameCountOutOfRange);
}

}  // namespace
}  // namespace skelfill
