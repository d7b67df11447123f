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

#include "skelfill/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "json.hpp"
#include "skelfill/error.hpp"
#include "skelfill/parallel.hpp"

namespace skelfill {

FlatSample FlatSample::from_sequence(const SkeletonSequence& seq, std::size_t sample_ref) {
  FlatSample f;
  f.sample_ref = sample_ref;
  f.values.assign(seq.data().begin(), seq.data().end());
  f.present.resize(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    f.present[i] = std::isfinite(f.values[i]) ? 1 : 0;
  }
  return f;
}

std::optional<double> try_masked_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) continue;
    const double d = a[i] - b[i];
    sum += d * d;
    ++shared;
  }
  if (shared == 0) return std::nullopt;
  const double weight = static_cast<double>(a.size()) / static_cast<double>(shared);
  return std::sqrt(weight * sum);
}

double masked_distance(const FlatSample& a, const FlatSample& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("flat samples have lengths " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  }
  auto d = try_masked_distance(a.values, b.values);
  if (!d) throw NoOverlap("samples share no present coordinate");
  return *d;
}

namespace {

bool donor_before(const Donor& a, const Donor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.sample_ref < b.sample_ref;
}

}  // namespace

DonorSet find_donors(std::span<const FlatSample> cluster, const FlatSample& target,
                     std::size_t position, std::size_t k) {
  DonorSet candidates;
  for (const auto& member : cluster) {
    if (member.sample_ref == target.sample_ref) continue;
    if (position >= member.size() || !member.present[position]) continue;
    if (member.size() != target.size()) continue;
    if (auto d = try_masked_distance(target.values, member.values)) {
      candidates.push_back({member.sample_ref, *d});
    }
  }
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), donor_before);
  candidates.resize(take);
  return candidates;
}

double impute_value(const DonorSet& donors, std::span<const double> donor_values) {
  if (donors.empty()) throw EmptyDonorSet("no donors to impute from");
  if (donor_values.size() != donors.size()) {
    throw LengthMismatch("donor values not aligned with donors");
  }
  double exact_sum = 0.0;
  std::size_t exact = 0;
  for (std::size_t j = 0; j < donors.size(); ++j) {
    if (donors[j].distance == 0.0) {
      exact_sum += donor_values[j];
      ++exact;
    }
  }
  if (exact > 0) return exact_sum / static_cast<double>(exact);

  double weighted = 0.0;
  double weights = 0.0;
  for (std::size_t j = 0; j < donors.size(); ++j) {
    const double r = 1.0 / donors[j].distance;
    weighted += r * donor_values[j];
    weights += r;
  }
  return weighted / weights;
}

namespace {

void check_labels(const Dataset& ds, const PseudoLabels& labels, const char* which) {
  if (labels.size() != ds.size()) {
    throw LabelMismatch(std::string(which) + " labels: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(ds.size()) + " samples");
  }
  if (!labels.sample_ids.empty()) {
    if (labels.sample_ids.size() != ds.size()) {
      throw LabelMismatch(std::string(which) + " labels: id list length differs");
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (labels.sample_ids[i] != ds.samples[i].sample_id()) {
        throw LabelMismatch(std::string(which) + " labels: row " + std::to_string(i) +
                            " is '" + labels.sample_ids[i] + "' but the dataset has '" +
                            ds.samples[i].sample_id() + "'");
      }
    }
  }
  for (int l : labels.labels) {
    if (l < 0) throw LabelMismatch(std::string(which) + " labels: negative label");
  }
}

bool instance_present(const FlatSample& s, std::size_t base, std::size_t stride) {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!s.present[base + c * stride]) return false;
  }
  return true;
}

}  // namespace

ImputationResult impute_dataset(const Dataset& train, const Dataset* test,
                                const PseudoLabels& train_labels, const PseudoLabels* test_labels,
                                const ImputeOptions& options) {
  if (options.neighbors < 1) throw ConfigError("neighbor count k must be >= 1");
  if ((test == nullptr) != (test_labels == nullptr)) {
    throw LabelMismatch("test dataset and test labels must be given together");
  }
  check_labels(train, train_labels, "train");
  if (test) {
    check_labels(*test, *test_labels, "test");
    if (!train.empty() && !test->empty() && !(train.shape() == test->shape())) {
      throw DimensionMismatch("train and test tensors have different shapes");
    }
  }

  int max_label = -1;
  for (int l : train_labels.labels) max_label = std::max(max_label, l);
  if (test_labels) {
    for (int l : test_labels->labels) max_label = std::max(max_label, l);
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < train.size(); ++i) {
    members[static_cast<std::size_t>(train_labels.labels[i])].push_back(i);
  }

  std::vector<FlatSample> donors_flat(train.size());
  parallel_for(train.size(), [&](std::size_t i) {
    donors_flat[i] = FlatSample::from_sequence(train.samples[i], i);
  });

  ImputationResult result{train, std::nullopt, {}};
  if (test) result.test = *test;
  const std::size_t n_train = train.size();
  const std::size_t n_total = n_train + (test ? test->size() : 0);
  std::vector<SampleImputation> reports(n_total);
  std::mutex observer_lock;

  parallel_for(n_total, [&](std::size_t w) {
    const bool is_train = w < n_train;
    const std::size_t index = is_train ? w : w - n_train;
    const SkeletonSequence& source = is_train ? train.samples[index] : test->samples[index];
    SkeletonSequence& out = is_train ? result.train.samples[index] : result.test->samples[index];
    const int cluster = is_train ? train_labels.labels[index] : test_labels->labels[index];

    SampleImputation& rep = reports[w];
    rep.sample_id = source.sample_id();
    rep.split = is_train ? Split::kTrain : Split::kTest;
    rep.cluster = cluster;
    if (!source.has_missing()) return;

    const FlatSample target_storage = is_train ? FlatSample{} : FlatSample::from_sequence(source, index);
    const FlatSample& target = is_train ? donors_flat[index] : target_storage;

    // One distance per (target, candidate) pair, shared by every missing
    // position of the target.
    DonorSet ranked;
    for (std::size_t ref : members[static_cast<std::size_t>(cluster)]) {
      if (is_train && ref == index) continue;
      if (auto d = try_masked_distance(target.values, donors_flat[ref].values)) {
        ranked.push_back({ref, *d});
      }
    }
    std::sort(ranked.begin(), ranked.end(), donor_before);

    const std::size_t stride = source.channel_stride();
    for (std::size_t t = 0; t < source.frames(); ++t) {
      for (std::size_t v = 0; v < source.joints(); ++v) {
        for (std::size_t m = 0; m < source.bodies(); ++m) {
          const std::size_t base = source.index(0, t, v, m);
          std::size_t missing = 0;
          for (std::size_t c = 0; c < kChannels; ++c) missing += target.present[base + c * stride] ? 0 : 1;
          if (missing == 0) continue;
          rep.coordinates_missing += missing;

          DonorSet donors;
          for (const Donor& d : ranked) {
            if (donors.size() == options.neighbors) break;
            if (instance_present(donors_flat[d.sample_ref], base, stride)) donors.push_back(d);
          }

          DonorEvent event;
          event.values = {std::nan(""), std::nan(""), std::nan("")};
          if (donors.empty()) {
            rep.coordinates_unimputable += missing;
          } else {
            std::vector<double> vals(donors.size());
            for (std::size_t c = 0; c < kChannels; ++c) {
              const std::size_t pos = base + c * stride;
              if (target.present[pos]) continue;
              for (std::size_t j = 0; j < donors.size(); ++j) {
                vals[j] = donors_flat[donors[j].sample_ref].values[pos];
              }
              const double value = impute_value(donors, vals);
              event.values[c] = value;
              out.at(c, t, v, m) = static_cast<float>(value);
            }
            rep.coordinates_imputed += missing;
            ++rep.joints_imputed;
            rep.donors_used += donors.size();
          }

          if (options.observer) {
            event.target_split = rep.split;
            event.target_index = index;
            event.cluster = cluster;
            event.t = t;
            event.v = v;
            event.m = m;
            for (const Donor& d : donors) event.donor_ids.push_back(train.samples[d.sample_ref].sample_id());
            event.donors = std::move(donors);
            std::lock_guard lock(observer_lock);
            options.observer(event);
          }
        }
      }
    }
  });

  result.train.refresh_masks();
  if (result.test) result.test->refresh_masks();

  ImputationReport& report = result.report;
  report.neighbors = options.neighbors;
  std::vector<ClusterImputation> clusters(members.size());
  std::vector<std::size_t> joints_imputed(members.size(), 0);
  std::vector<std::size_t> donors_used(members.size(), 0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    clusters[c].cluster = static_cast<int>(c);
    clusters[c].pool_size = members[c].size();
  }
  for (const auto& rep : reports) {
    report.coordinates_missing += rep.coordinates_missing;
    report.coordinates_imputed += rep.coordinates_imputed;
    report.coordinates_unimputable += rep.coordinates_unimputable;
    auto& cl = clusters[static_cast<std::size_t>(rep.cluster)];
    if (rep.coordinates_missing > 0) {
      (rep.split == Split::kTrain ? cl.train_targets : cl.test_targets) += 1;
    }
    cl.coordinates_imputed += rep.coordinates_imputed;
    cl.coordinates_unimputable += rep.coordinates_unimputable;
    joints_imputed[static_cast<std::size_t>(rep.cluster)] += rep.joints_imputed;
    donors_used[static_cast<std::size_t>(rep.cluster)] += rep.donors_used;
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (joints_imputed[c] > 0) {
      clusters[c].mean_donors =
          static_cast<double>(donors_used[c]) / static_cast<double>(joints_imputed[c]);
    }
    if (clusters[c].pool_size > 0 || clusters[c].train_targets + clusters[c].test_targets > 0) {
      report.clusters.push_back(clusters[c]);
    }
  }
  report.samples = std::move(reports);
  return result;
}

std::string report_to_json(const ImputationReport& report) {
  nlohmann::ordered_json j;
  j["neighbors"] = report.neighbors;
  j["totals"] = {{"coordinates_missing", report.coordinates_missing},
                 {"coordinates_imputed", report.coordinates_imputed},
                 {"coordinates_unimputable", report.coordinates_unimputable}};
  auto& clusters = j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : report.clusters) {
    clusters.push_back({{"cluster", c.cluster},
                        {"pool_size", c.pool_size},
                        {"train_targets", c.train_targets},
                        {"test_targets", c.test_targets},
                        {"coordinates_imputed", c.coordinates_imputed},
                        {"coordinates_unimputable", c.coordinates_unimputable},
                        {"mean_donors", c.mean_donors}});
  }
  auto& samples = j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"sample_id", s.sample_id},
                       {"split", to_string(s.split)},
                       {"cluster", s.cluster},
                       {"coordinates_missing", s.coordinates_missing},
                       {"coordinates_imputed", s.coordinates_imputed},
                       {"coordinates_unimputable", s.coordinates_unimputable}});
  }
  return j.dump(2) + "\n";
}

}  // namespace skelfill
