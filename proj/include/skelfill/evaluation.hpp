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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skelfill/clustering.hpp"
#include "skelfill/occlusion.hpp"
#include "skelfill/skeleton.hpp"

namespace skelfill {

// Replaces each missing scalar with a uniform draw from [min, max] of the
// present values of the same channel across the whole dataset. Channels with
// no present value are left missing.
Dataset impute_random_baseline(const Dataset& ds, std::uint64_t seed);

struct MpjpeResult {
  // Mean 3D error in meters over imputed joint instances; NaN when count = 0.
  double value = 0.0;
  std::size_t count = 0;
  // Occluded instances still missing in the imputed data.
  std::size_t unimputable = 0;
};

// Throws RecordMismatch if the record names an unknown sample or an
// out-of-range joint instance.
MpjpeResult mpjpe(const Dataset& imputed, const OcclusionRecord& record);

struct ClusteringQuality {
  double purity = 0.0;
  double nmi = 0.0;
};

// Purity = (1/N) sum_k max_c n_kc. NMI = I(U;V) / ((H(U) + H(V)) / 2), taken
// as 1 when both partitions are trivial. Throws LengthMismatch.
ClusteringQuality clustering_quality(const std::vector<int>& pseudo, const std::vector<int>& truth);

struct ClassError {
  double mpjpe = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  double mpjpe_imputed = 0.0;
  double mpjpe_random = 0.0;
  std::size_t joints_imputed = 0;
  std::size_t joints_unimputable = 0;
  double coverage = 1.0;
  // Keyed by true action label; only filled when samples carry labels.
  std::map<int, ClassError> per_class;
  std::optional<ClusteringQuality> clustering;
};

// Scores the pipeline output and the random baseline against the recorded
// originals; clustering quality is added when `pseudo` is given and every
// sample has a true label.
EvalReport evaluate(const Dataset& imputed, const Dataset& random_imputed,
                    const OcclusionRecord& record, const PseudoLabels* pseudo = nullptr);

std::string eval_report_to_json(const EvalReport& report);
std::string eval_report_csv_header();
std::string eval_report_csv_row(const EvalReport& report);

}  // namespace skelfill
