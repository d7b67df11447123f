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
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skelfill/clustering.hpp"
#include "skelfill/skeleton.hpp"

namespace skelfill {

// A sample flattened in tensor order (C, T, V, M) with NaN at missing
// scalars. `present[i]` is 1 exactly when values[i] is finite.
struct FlatSample {
  std::vector<double> values;
  std::vector<unsigned char> present;
  std::size_t sample_ref = 0;

  static FlatSample from_sequence(const SkeletonSequence& seq, std::size_t sample_ref);
  std::size_t size() const { return values.size(); }
};

// Missing-value-aware Euclidean distance:
//   P = positions present in both, d = sum_{i in P} (a_i - b_i)^2,
//   w = L / |P|, dist = sqrt(w * d).
// Returns nullopt when |P| = 0.
std::optional<double> try_masked_distance(std::span<const double> a, std::span<const double> b);
// Throws NoOverlap when |P| = 0 and DimensionMismatch on unequal lengths.
double masked_distance(const FlatSample& a, const FlatSample& b);

struct Donor {
  std::size_t sample_ref = 0;
  double distance = 0.0;
};
// Nearest first; ties by lower sample_ref.
using DonorSet = std::vector<Donor>;

// Up to k members of `cluster` (never the target itself, matched by
// sample_ref) that have `position` present and a defined distance to the
// target, nearest first. An empty result means the position cannot be
// imputed from this cluster.
DonorSet find_donors(std::span<const FlatSample> cluster, const FlatSample& target,
                     std::size_t position, std::size_t k);

// Inverse-distance weighted mean, sum(v_j / d_j) / sum(1 / d_j). If any donor
// sits at distance 0 the result is the plain mean of the zero-distance
// donors. Throws EmptyDonorSet, LengthMismatch.
double impute_value(const DonorSet& donors, std::span<const double> donor_values);

inline constexpr std::size_t kDefaultNeighbors = 5;

// Emitted once per missing joint instance of a target. Donor indices refer
// to the training dataset.
struct DonorEvent {
  Split target_split = Split::kTrain;
  std::size_t target_index = 0;
  int cluster = 0;
  std::size_t t = 0, v = 0, m = 0;
  DonorSet donors;
  std::vector<std::string> donor_ids;
  // Imputed value per channel before rounding to float; NaN for channels
  // that were present or could not be imputed.
  std::array<double, 3> values{};
};
using DonorObserver = std::function<void(const DonorEvent&)>;

struct ImputeOptions {
  std::size_t neighbors = kDefaultNeighbors;
  // Called under an internal lock, so it may be invoked from any worker.
  DonorObserver observer;
};

struct SampleImputation {
  std::string sample_id;
  Split split = Split::kTrain;
  int cluster = 0;
  std::size_t coordinates_missing = 0;
  std::size_t coordinates_imputed = 0;
  std::size_t coordinates_unimputable = 0;
  // Joint instances imputed and the donors they used, for pool statistics.
  std::size_t joints_imputed = 0;
  std::size_t donors_used = 0;
};

struct ClusterImputation {
  int cluster = 0;
  std::size_t pool_size = 0;  // training members
  std::size_t train_targets = 0;
  std::size_t test_targets = 0;
  std::size_t coordinates_imputed = 0;
  std::size_t coordinates_unimputable = 0;
  double mean_donors = 0.0;  // per imputed joint instance
};

struct ImputationReport {
  std::size_t neighbors = 0;
  std::vector<SampleImputation> samples;  // train samples, then test samples
  std::vector<ClusterImputation> clusters;
  std::size_t coordinates_missing = 0;
  std::size_t coordinates_imputed = 0;
  std::size_t coordinates_unimputable = 0;
};

struct ImputationResult {
  Dataset train;
  std::optional<Dataset> test;
  ImputationReport report;
};

// Within-cluster KNN imputation. Training samples take donors from their
// own cluster; test samples take donors only from the training cluster with
// the same pseudo-label. Donor values and distances always come from the
// input data, so the result does not depend on processing order. Present
// values are never changed; coordinates with no eligible donor stay NaN.
// Throws LabelMismatch when labels are not aligned with their dataset.
ImputationResult impute_dataset(const Dataset& train, const Dataset* test,
                                const PseudoLabels& train_labels, const PseudoLabels* test_labels,
                                const ImputeOptions& options = {});

std::string report_to_json(const ImputationReport& report);

}  // namespace skelfill
