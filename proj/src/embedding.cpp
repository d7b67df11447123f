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

#include "skelfill/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "skelfill/binary_io.hpp"
#include "skelfill/error.hpp"
#include "skelfill/parallel.hpp"

namespace skelfill {

bool EmbeddingMatrix::bitwise_equal(const EmbeddingMatrix& other) const {
  return rows == other.rows && cols == other.cols && sample_ids == other.sample_ids &&
         values.size() == other.values.size() &&
         std::memcmp(values.data(), other.values.data(), values.size() * sizeof(float)) == 0;
}

std::size_t baseline_dimension(const SkeletonGraph& graph) {
  return 9 * graph.joints() + graph.edges().size();
}

std::vector<float> embed_sequence(const SkeletonSequence& seq, const SkeletonGraph& graph) {
  const std::size_t V = seq.joints();
  const std::size_t T = seq.frames();
  if (graph.joints() != V) {
    throw DimensionMismatch("graph has " + std::to_string(graph.joints()) +
                            " joints, sequence has " + std::to_string(V));
  }
  std::vector<float> out(baseline_dimension(graph), 0.0f);
  constexpr std::size_t body = 0;

  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t t = 0; t < T; ++t) {
        if (!seq.joint_present(t, v, body)) continue;
        sum += seq.at(c, t, v, body);
        ++n;
      }
      if (n == 0) continue;
      const double mean = sum / static_cast<double>(n);
      double var = 0.0;
      double speed = 0.0;
      std::size_t steps = 0;
      for (std::size_t t = 0; t < T; ++t) {
        if (!seq.joint_present(t, v, body)) continue;
        const double d = seq.at(c, t, v, body) - mean;
        var += d * d;
        if (t > 0 && seq.joint_present(t - 1, v, body)) {
          speed += std::abs(static_cast<double>(seq.at(c, t, v, body)) - seq.at(c, t - 1, v, body));
          ++steps;
        }
      }
      out[3 * v + c] = static_cast<float>(mean);
      out[3 * V + 3 * v + c] = static_cast<float>(std::sqrt(var / static_cast<double>(n)));
      if (steps > 0) out[6 * V + 3 * v + c] = static_cast<float>(speed / static_cast<double>(steps));
    }
  }

  const auto& edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < T; ++t) {
      if (!seq.joint_present(t, a, body) || !seq.joint_present(t, b, body)) continue;
      double sq = 0.0;
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double d = static_cast<double>(seq.at(c, t, a, body)) - seq.at(c, t, b, body);
        sq += d * d;
      }
      sum += std::sqrt(sq);
      ++n;
    }
    if (n > 0) out[9 * V + e] = static_cast<float>(sum / static_cast<double>(n));
  }
  return out;
}

EmbeddingMatrix embed_baseline(const Dataset& ds, const SkeletonGraph& graph) {
  EmbeddingMatrix e;
  e.rows = ds.size();
  e.cols = baseline_dimension(graph);
  e.values.assign(e.rows * e.cols, 0.0f);
  e.sample_ids = ds.ids();
  e.source = EmbeddingSource::kBuiltin;
  parallel_for(ds.size(), [&](std::size_t i) {
    const auto row = embed_sequence(ds.samples[i], graph);
    std::copy(row.begin(), row.end(), e.row(i));
  });
  return e;
}

namespace {
constexpr std::string_view kSkembMagic = "SKEMB1";
}

void save_embeddings(std::ostream& out, const EmbeddingMatrix& e) {
  if (e.cols == 0) throw FormatError("embedding dimension must be >= 1");
  io::write_magic(out, kSkembMagic);
  io::write_u32(out, static_cast<std::uint32_t>(e.rows));
  io::write_u32(out, static_cast<std::uint32_t>(e.cols));
  for (std::size_t i = 0; i < e.rows; ++i) {
    io::write_string(out, e.sample_ids[i]);
    for (std::size_t j = 0; j < e.cols; ++j) io::write_f32(out, e.row(i)[j]);
  }
  if (!out) throw FormatError("write failed");
}

void save_embeddings_file(const std::string& path, const EmbeddingMatrix& e) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  save_embeddings(out, e);
}

EmbeddingMatrix load_embeddings(std::istream& in) {
  io::expect_magic(in, kSkembMagic);
  EmbeddingMatrix e;
  e.source = EmbeddingSource::kExternal;
  e.rows = io::read_u32(in);
  e.cols = io::read_u32(in);
  if (e.cols == 0) throw FormatError("embedding dimension D = 0");
  e.values.resize(e.rows * e.cols);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < e.rows; ++i) {
    e.sample_ids.push_back(io::read_string(in));
    if (!seen.insert(e.sample_ids.back()).second) {
      throw FormatError("duplicate sample id '" + e.sample_ids.back() + "'");
    }
    for (std::size_t j = 0; j < e.cols; ++j) e.row(i)[j] = io::read_f32(in);
  }
  io::expect_eof(in);
  return e;
}

EmbeddingMatrix load_embeddings_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return load_embeddings(in);
}

EmbeddingMatrix align_embeddings(const EmbeddingMatrix& e, const std::vector<std::string>& ids) {
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < e.rows; ++i) where[e.sample_ids[i]] = i;

  std::vector<std::string> unknown;
  std::vector<std::string> absent;
  const std::set<std::string> wanted(ids.begin(), ids.end());
  for (const auto& id : e.sample_ids) {
    if (!wanted.count(id)) unknown.push_back(id);
  }
  for (const auto& id : ids) {
    if (!where.count(id)) absent.push_back(id);
  }
  if (!unknown.empty() || !absent.empty() || wanted.size() != ids.size()) {
    std::string msg = "embedding ids do not match the dataset";
    if (!unknown.empty()) {
      msg += "; not in dataset:";
      for (const auto& id : unknown) msg += " " + id;
    }
    if (!absent.empty()) {
      msg += "; missing from embeddings:";
      for (const auto& id : absent) msg += " " + id;
    }
    throw IdMismatch(msg);
  }

  EmbeddingMatrix out;
  out.rows = ids.size();
  out.cols = e.cols;
  out.source = e.source;
  out.sample_ids = ids;
  out.values.resize(out.rows * out.cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const float* src = e.row(where[ids[i]]);
    std::copy(src, src + e.cols, out.row(i));
  }
  return out;
}

EmbeddingMatrix l2_normalize_rows(const EmbeddingMatrix& e) {
  EmbeddingMatrix out = e;
  for (std::size_t i = 0; i < out.rows; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < out.cols; ++j) norm += double(out.row(i)[j]) * out.row(i)[j];
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (std::size_t j = 0; j < out.cols; ++j) {
      out.row(i)[j] = static_cast<float>(out.row(i)[j] / norm);
    }
  }
  return out;
}

}  // namespace skelfill
