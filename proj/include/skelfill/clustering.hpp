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
#include <vector>

#include "skelfill/embedding.hpp"

namespace skelfill {

struct ClusterModel {
  std::size_t clusters = 0;  // K
  std::size_t dims = 0;      // D
  // Row-major [K, D].
  std::vector<float> centroids;
  // Within-cluster sum of squared distances of the fitted rows.
  double inertia = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations_run = 0;
  bool converged = false;
  // Inertia after each assignment step, in iteration order. Not persisted.
  std::vector<double> inertia_history;

  const float* centroid(std::size_t k) const { return centroids.data() + k * dims; }
};

struct PseudoLabels {
  std::vector<int> labels;
  std::vector<std::string> sample_ids;

  std::size_t size() const { return labels.size(); }
};

struct KMeansOptions {
  std::size_t clusters = 60;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  // Stop once no centroid moves by this much (Euclidean) in one update.
  double tol = 1e-4;
};

struct KMeansResult {
  ClusterModel model;
  PseudoLabels labels;
};

// k-means++ seeding followed by Lloyd iterations. Assignment ties go to the
// lowest cluster index. A cluster left empty by an update is re-seeded at the
// point farthest from its own centroid. Iteration also stops when an
// assignment step reproduces the previous labels. The stored centroids are
// the float-rounded final means and the returned labels are the nearest
// stored centroid of every row, so kmeans_predict on the same matrix agrees.
// Throws KTooLarge unless 1 <= K <= N, ConfigError for max_iter = 0 or a
// negative tol.
KMeansResult kmeans_fit(const EmbeddingMatrix& e, const KMeansOptions& options);

// Nearest centroid per row (lowest index on ties). Throws DimensionMismatch.
PseudoLabels kmeans_predict(const ClusterModel& model, const EmbeddingMatrix& e);

// Sum of squared distances of each row to the centroid of its label.
double inertia_of(const ClusterModel& model, const EmbeddingMatrix& e, const PseudoLabels& labels);

// SKKM1 binary format.
void save_cluster_model(std::ostream& out, const ClusterModel& model);
void save_cluster_model_file(const std::string& path, const ClusterModel& model);
ClusterModel load_cluster_model(std::istream& in);
ClusterModel load_cluster_model_file(const std::string& path);

// CSV with header sample_id,label.
void write_labels_csv(std::ostream& out, const PseudoLabels& labels);
PseudoLabels read_labels_csv(std::istream& in);

}  // namespace skelfill
