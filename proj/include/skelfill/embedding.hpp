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
#include <iosfwd>
#include <string>
#include <vector>

#include "skelfill/masking.hpp"
#include "skelfill/skeleton.hpp"

namespace skelfill {

enum class EmbeddingSource { kBuiltin, kExternal };

// Row-major [N, D] matrix of per-sequence features with the sample id of
// every row. Values are float so that SKEMB files round-trip bit for bit.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;
  std::vector<std::string> sample_ids;
  EmbeddingSource source = EmbeddingSource::kBuiltin;

  const float* row(std::size_t i) const { return values.data() + i * cols; }
  float* row(std::size_t i) { return values.data() + i * cols; }
  bool bitwise_equal(const EmbeddingMatrix& other) const;
};

// Descriptor width for a V-joint skeleton graph: 9V + |E|.
std::size_t baseline_dimension(const SkeletonGraph& graph);

// Training-free descriptor of body 0, computed over present joint instances
// only. Layout: per-joint temporal mean (3V), per-joint temporal standard
// deviation (3V), per-joint mean absolute per-channel speed between
// consecutive present frames (3V), then the mean length of each graph edge
// over frames where both ends are present (|E|). Statistics with empty
// support are 0. Throws DimensionMismatch if the graph joint count is not V.
EmbeddingMatrix embed_baseline(const Dataset& ds, const SkeletonGraph& graph);
std::vector<float> embed_sequence(const SkeletonSequence& seq, const SkeletonGraph& graph);

// SKEMB1 binary format. D = 0, bad magic, truncation or duplicate ids throw
// FormatError.
void save_embeddings(std::ostream& out, const EmbeddingMatrix& e);
void save_embeddings_file(const std::string& path, const EmbeddingMatrix& e);
EmbeddingMatrix load_embeddings(std::istream& in);
EmbeddingMatrix load_embeddings_file(const std::string& path);

// Reorders rows to follow `ids`. Throws IdMismatch listing the symmetric
// difference when the id sets differ.
EmbeddingMatrix align_embeddings(const EmbeddingMatrix& e, const std::vector<std::string>& ids);

// Scales every row to unit L2 norm (zero rows stay zero).
EmbeddingMatrix l2_normalize_rows(const EmbeddingMatrix& e);

}  // namespace skelfill
