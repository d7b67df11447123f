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
#include <sstream>

#include "skelfill/embedding.hpp"
#include "skelfill/error.hpp"
#include "test_support.hpp"

namespace skelfill {
namespace {

TEST(EmbeddingTest, Dimension) {
  EXPECT_EQ(baseline_dimension(SkeletonGraph::ntu25()), 9u * 25u + 24u);
  EXPECT_EQ(baseline_dimension(SkeletonGraph(2, {{0, 1}})), 19u);
}

TEST(EmbeddingTest, HandComputedTinyCase) {
  const SkeletonGraph g(2, {{0, 1}});
  SkeletonSequence seq({3, 2, 1}, "s");
  const float xs[3] = {0, 1, 3};
  for (std::size_t t = 0; t < 3; ++t) {
    seq.set_joint(t, 0, 0, {xs[t], 0, 0});
    seq.set_joint(t, 1, 0, {0, 0, 1});
  }
  const auto f = embed_sequence(seq, g);
  ASSERT_EQ(f.size(), 19u);
  EXPECT_FLOAT_EQ(f[0], 4.0f / 3.0f);                                  // mean x of joint 0
  EXPECT_FLOAT_EQ(f[5], 1.0f);                                         // mean z of joint 1
  EXPECT_FLOAT_EQ(f[6], static_cast<float>(std::sqrt(42.0 / 27.0)));  // std x of joint 0
  EXPECT_FLOAT_EQ(f[11], 0.0f);                                        // std z of joint 1
  EXPECT_FLOAT_EQ(f[12], 1.5f);                                        // speed x of joint 0
  EXPECT_FLOAT_EQ(f[13], 0.0f);
  EXPECT_FLOAT_EQ(f[18], static_cast<float>((1.0 + std::sqrt(2.0) + std::sqrt(10.0)) / 3.0));
}

TEST(EmbeddingTest, MissingFramesAreSkipped) {
  const SkeletonGraph g(2, {{0, 1}});
  SkeletonSequence seq({4, 2, 1}, "s");
  const float xs[4] = {0, 5, 2, 4};
  for (std::size_t t = 0; t < 4; ++t) {
    seq.set_joint(t, 0, 0, {xs[t], 0, 0});
    seq.set_joint(t, 1, 0, {0, 0, 0});
  }
  seq.set_joint_missing(1, 0, 0);
  const auto f = embed_sequence(seq, g);
  EXPECT_FLOAT_EQ(f[0], 2.0f);   // mean of 0, 2, 4
  EXPECT_FLOAT_EQ(f[12], 2.0f);  // only the 2 -> 4 step is consecutive
  EXPECT_FLOAT_EQ(f[18], 2.0f);  // edge lengths 0, 2, 4
}

TEST(EmbeddingTest, AllZeroInputGivesZeroVector) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  const SkeletonSequence seq({10, 25, 1}, "s");
  for (float x : embed_sequence(seq, g)) EXPECT_EQ(x, 0.0f);
}

TEST(EmbeddingTest, FullyOccludedJointHasZeroSlots) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  std::mt19937_64 rng(1);
  SkeletonSequence seq = testing::random_sequence({10, 25, 1}, rng, 0.0, "s");
  for (std::size_t t = 0; t < 10; ++t) seq.set_joint_missing(t, 7, 0);
  const auto f = embed_sequence(seq, g);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(f[3 * 7 + c], 0.0f);
    EXPECT_EQ(f[75 + 3 * 7 + c], 0.0f);
    EXPECT_EQ(f[150 + 3 * 7 + c], 0.0f);
  }
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto [a, b] = g.edges()[e];
    if (a == 7 || b == 7) EXPECT_EQ(f[225 + e], 0.0f);
  }
  for (float x : f) EXPECT_TRUE(std::isfinite(x));
}

TEST(EmbeddingTest, EquivarianceAndInvariance) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  const Dataset ds = testing::random_dataset(6, {8, 25, 2}, 0.2, 5);
  const EmbeddingMatrix e = embed_baseline(ds, g);
  ASSERT_EQ(e.rows, 6u);
  EXPECT_EQ(e.sample_ids, ds.ids());
  EXPECT_EQ(e.source, EmbeddingSource::kBuiltin);

  // Reversed sample order reverses the rows.
  Dataset rev = ds;
  std::reverse(rev.samples.begin(), rev.samples.end());
  const EmbeddingMatrix er = embed_baseline(rev, g);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < e.cols; ++j) EXPECT_EQ(e.row(i)[j], er.row(5 - i)[j]);

  // Body 1 content does not matter.
  Dataset padded = ds;
  for (auto& s : padded.samples)
    for (std::size_t t = 0; t < 8; ++t)
      for (std::size_t v = 0; v < 25; ++v) s.set_joint(t, v, 1, {0, 0, 0});
  EXPECT_TRUE(embed_baseline(padded, g).values == e.values);

  for (float x : e.values) EXPECT_TRUE(std::isfinite(x));
}

TEST(EmbeddingTest, IdenticalSamplesGiveIdenticalRows) {
  const SkeletonGraph g = SkeletonGraph::ntu25();
  Dataset ds = testing::random_dataset(1, {8, 25, 1}, 0.1, 5);
  SkeletonSequence twin = ds.samples[0];
  twin.set_sample_id("twin");
  ds.samples.push_back(twin);
  ds.refresh_masks();
  const EmbeddingMatrix e = embed_baseline(ds, g);
  EXPECT_TRUE(std::equal(e.row(0), e.row(0) + e.cols, e.row(1)));
}

TEST(EmbeddingTest, DimensionMismatch) {
  const Dataset ds = testing::random_dataset(1, {4, 5, 1}, 0.0, 5);
  EXPECT_THROW(embed_baseline(ds, SkeletonGraph::ntu25()), DimensionMismatch);
}

EmbeddingMatrix small_matrix() {
  EmbeddingMatrix e;
  e.rows = 3;
  e.cols = 2;
  e.values = {1, 2, 3, 4, std::numeric_limits<float>::quiet_NaN(), -0.0f};
  e.sample_ids = {"a", "b", "c"};
  return e;
}

TEST(SkembTest, RoundTrip) {
  const EmbeddingMatrix e = small_matrix();
  std::stringstream buf;
  save_embeddings(buf, e);
  EXPECT_EQ(buf.str().substr(0, 6), "SKEMB1");
  const EmbeddingMatrix back = load_embeddings(buf);
  EXPECT_TRUE(back.bitwise_equal(e));
  EXPECT_EQ(back.source, EmbeddingSource::kExternal);
}

TEST(SkembTest, RejectsBadFiles) {
  EmbeddingMatrix empty;
  empty.rows = 1;
  empty.sample_ids = {"a"};
  std::stringstream sink;
  EXPECT_THROW(save_embeddings(sink, empty), FormatError);

  EmbeddingMatrix dup = small_matrix();
  dup.sample_ids[2] = "a";
  std::stringstream buf;
  save_embeddings(buf, dup);
  EXPECT_THROW(load_embeddings(buf), FormatError);

  std::stringstream good;
  save_embeddings(good, small_matrix());
  std::istringstream truncated(good.str().substr(0, good.str().size() - 1));
  EXPECT_THROW(load_embeddings(truncated), FormatError);
}

TEST(AlignTest, ReordersAndReportsDifferences) {
  const EmbeddingMatrix e = small_matrix();
  const EmbeddingMatrix a = align_embeddings(e, {"c", "a", "b"});
  EXPECT_EQ(a.sample_ids, (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_EQ(a.row(1)[0], 1.0f);
  EXPECT_EQ(a.row(2)[1], 4.0f);
  try {
    align_embeddings(e, {"a", "b", "d"});
    FAIL() << "expected IdMismatch";
  } catch (const IdMismatch& err) {
    const std::string msg = err.what();
    EXPECT_NE(msg.find("c"), std::string::npos);
    EXPECT_NE(msg.find("d"), std::string::npos);
  }
  EXPECT_THROW(align_embeddings(e, {"a", "b"}), IdMismatch);
}

TEST(NormalizeTest, UnitRows) {
  EmbeddingMatrix e;
  e.rows = 2;
  e.cols = 2;
  e.values = {3, 4, 0, 0};
  e.sample_ids = {"a", "b"};
  const EmbeddingMatrix n = l2_normalize_rows(e);
  EXPECT_FLOAT_EQ(n.values[0], 0.6f);
  EXPECT_FLOAT_EQ(n.values[1], 0.8f);
  EXPECT_EQ(n.values[2], 0.0f);
}

}  // namespace
}  // namespace skelfill
