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

#include <cmath>
#include <random>

#include "skelfill/error.hpp"
#include "skelfill/evaluation.hpp"
#include "test_support.hpp"

namespace skelfill {
namespace {

TEST(RandomBaselineTest, FillsWithinChannelRange) {
  const Dataset clean = testing::random_dataset(5, {10, 6, 1}, 0.0, 1);
  const OcclusionResult occ = occlude_random(clean, 0.3, 2);
  const Dataset filled = impute_random_baseline(occ.dataset, 9);
  for (std::size_t c = 0; c < 3; ++c) {
    float lo = INFINITY, hi = -INFINITY;
    for (const auto& s : occ.dataset.samples)
      for (std::size_t t = 0; t < 10; ++t)
        for (std::size_t v = 0; v < 6; ++v) {
          const float x = s.at(c, t, v, 0);
          if (std::isnan(x)) continue;
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
    for (const auto& s : filled.samples)
      for (std::size_t t = 0; t < 10; ++t)
        for (std::size_t v = 0; v < 6; ++v) {
          EXPECT_GE(s.at(c, t, v, 0), lo);
          EXPECT_LE(s.at(c, t, v, 0), hi);
        }
  }
  EXPECT_TRUE(impute_random_baseline(occ.dataset, 9).bitwise_equal(filled));
  EXPECT_TRUE(impute_random_baseline(clean, 9).bitwise_equal(clean));
}

Dataset one_joint(float x, float y, float z) {
  SkeletonSequence s({2, 2, 1}, "a", 4);
  s.set_joint(0, 0, 0, {1, 1, 1});
  s.set_joint(0, 1, 0, {1, 1, 1});
  s.set_joint(1, 0, 0, {1, 1, 1});
  s.set_joint(1, 1, 0, {x, y, z});
  return Dataset({s}, Split::kTrain);
}

OcclusionRecord record_for_origin() {
  OcclusionRecord rec;
  rec.samples.push_back({"a", {{1, 1, 0, {0, 0, 0}}}});
  return rec;
}

TEST(MpjpeTest, Examples) {
  EXPECT_EQ(mpjpe(one_joint(0, 0, 0), record_for_origin()).value, 0.0);
  const MpjpeResult r = mpjpe(one_joint(0.3f, 0.4f, 0), record_for_origin());
  EXPECT_NEAR(r.value, 0.5, 1e-7);
  EXPECT_EQ(r.count, 1u);
  EXPECT_EQ(r.unimputable, 0u);

  Dataset hole = one_joint(0, 0, 0);
  hole.samples[0].set_joint_missing(1, 1, 0);
  const MpjpeResult none = mpjpe(hole, record_for_origin());
  EXPECT_TRUE(std::isnan(none.value));
  EXPECT_EQ(none.count, 0u);
  EXPECT_EQ(none.unimputable, 1u);
}

TEST(MpjpeTest, RecordMismatch) {
  OcclusionRecord unknown;
  unknown.samples.push_back({"b", {{0, 0, 0, {}}}});
  EXPECT_THROW(mpjpe(one_joint(0, 0, 0), unknown), RecordMismatch);
  OcclusionRecord outside;
  outside.samples.push_back({"a", {{5, 0, 0, {}}}});
  EXPECT_THROW(mpjpe(one_joint(0, 0, 0), outside), RecordMismatch);
}

TEST(ClusteringQualityTest, PerfectPartition) {
  const auto q = clustering_quality({1, 1, 0, 0, 2, 2}, {5, 5, 7, 7, 9, 9});
  EXPECT_DOUBLE_EQ(q.purity, 1.0);
  EXPECT_NEAR(q.nmi, 1.0, 1e-12);
}

TEST(ClusteringQualityTest, SingleClusterOverTwoClasses) {
  const auto q = clustering_quality({0, 0, 0, 0}, {1, 1, 2, 2});
  EXPECT_DOUBLE_EQ(q.purity, 0.5);
  EXPECT_NEAR(q.nmi, 0.0, 1e-12);
  const auto trivial = clustering_quality({3, 3}, {1, 1});
  EXPECT_DOUBLE_EQ(trivial.nmi, 1.0);
}

TEST(ClusteringQualityTest, InvariantToRelabelling) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> pseudo(40), truth(40);
    for (std::size_t i = 0; i < 40; ++i) {
      pseudo[i] = static_cast<int>(rng() % 5);
      truth[i] = static_cast<int>(rng() % 4);
    }
    std::vector<int> shuffled = pseudo;
    for (int& x : shuffled) x = (x * 3 + 1) % 5;  // a bijection on 0..4
    const auto a = clustering_quality(pseudo, truth);
    const auto b = clustering_quality(shuffled, truth);
    EXPECT_DOUBLE_EQ(a.purity, b.purity);
    EXPECT_NEAR(a.nmi, b.nmi, 1e-12);
    EXPECT_GE(a.nmi, 0.0);
    EXPECT_LE(a.nmi, 1.0 + 1e-12);
  }
  EXPECT_THROW(clustering_quality({0, 1}, {0}), LengthMismatch);
}

TEST(EvaluateTest, ReportsBothErrorsAndCoverage) {
  const Dataset clean = testing::random_dataset(6, {10, 6, 1}, 0.0, 1);
  const OcclusionResult occ = occlude_random(clean, 0.2, 2);
  const Dataset random = impute_random_baseline(occ.dataset, 3);
  const PseudoLabels pseudo{{0, 1, 2, 0, 1, 2}, clean.ids()};
  const EvalReport rep = evaluate(clean, random, occ.record, &pseudo);
  EXPECT_EQ(rep.mpjpe_imputed, 0.0);
  EXPECT_GT(rep.mpjpe_random, 0.0);
  EXPECT_EQ(rep.joints_imputed, occ.record.total());
  EXPECT_EQ(rep.coverage, 1.0);
  ASSERT_TRUE(rep.clustering.has_value());
  EXPECT_DOUBLE_EQ(rep.clustering->purity, 1.0);
  EXPECT_EQ(rep.per_class.size(), 3u);

  const EvalReport holes = evaluate(occ.dataset, random, occ.record);
  EXPECT_EQ(holes.coverage, 0.0);
  EXPECT_TRUE(std::isnan(holes.mpjpe_imputed));
  EXPECT_NE(eval_report_to_json(holes).find("\"mpjpe_imputed\": null"), std::string::npos);
  EXPECT_EQ(eval_report_csv_header().substr(0, 14), "mpjpe_imputed,");
}

}  // namespace
}  // namespace skelfill
