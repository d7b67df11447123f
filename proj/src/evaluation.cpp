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

#include "skelfill/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "skelfill/binary_io.hpp"
#include "skelfill/error.hpp"
#include "skelfill/random.hpp"

namespace skelfill {

Dataset impute_random_baseline(const Dataset& ds, std::uint64_t seed) {
  std::array<double, 3> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& s : ds.samples) {
    for (std::size_t m = 0; m < s.bodies(); ++m) {
      if (!s.body_present(m)) continue;
      for (std::size_t c = 0; c < kChannels; ++c) {
        for (std::size_t t = 0; t < s.frames(); ++t) {
          for (std::size_t v = 0; v < s.joints(); ++v) {
            const float x = s.at(c, t, v, m);
            if (!std::isfinite(x)) continue;
            lo[c] = std::min(lo[c], static_cast<double>(x));
            hi[c] = std::max(hi[c], static_cast<double>(x));
          }
        }
      }
    }
  }

  Dataset out = ds;
  Rng rng(seed);
  for (auto& s : out.samples) {
    auto& data = s.data();
    const std::size_t stride = s.channel_stride();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isnan(data[i])) continue;
      const std::size_t c = i / stride;
      if (lo[c] > hi[c]) continue;
      data[i] = static_cast<float>(std::min(rng.uniform(lo[c], hi[c]), hi[c]));
    }
  }
  out.refresh_masks();
  return out;
}

namespace {

struct ErrorTally {
  std::vector<double> errors;  // per imputed joint instance
  std::vector<std::optional<int>> labels;
  std::size_t unimputable = 0;
};

ErrorTally tally(const Dataset& imputed, const OcclusionRecord& record) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < imputed.size(); ++i) index[imputed.samples[i].sample_id()] = i;

  ErrorTally out;
  for (const auto& rec : record.samples) {
    if (rec.joints.empty()) continue;
    auto it = index.find(rec.sample_id);
    if (it == index.end()) throw RecordMismatch("record names unknown sample '" + rec.sample_id + "'");
    const SkeletonSequence& s = imputed.samples[it->second];
    for (const auto& j : rec.joints) {
      if (j.t >= s.frames() || j.v >= s.joints() || j.m >= s.bodies()) {
        throw RecordMismatch("record entry outside the tensor of '" + rec.sample_id + "'");
      }
      if (!s.joint_present(j.t, j.v, j.m)) {
        ++out.unimputable;
        continue;
      }
      double sq = 0.0;
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double d = static_cast<double>(s.at(c, j.t, j.v, j.m)) - j.original[c];
        sq += d * d;
      }
      out.errors.push_back(std::sqrt(sq));
      out.labels.push_back(s.label());
    }
  }
  return out;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double entropy(const std::map<int, std::size_t>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / n;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace

MpjpeResult mpjpe(const Dataset& imputed, const OcclusionRecord& record) {
  const ErrorTally t = tally(imputed, record);
  return {mean(t.errors), t.errors.size(), t.unimputable};
}

ClusteringQuality clustering_quality(const std::vector<int>& pseudo, const std::vector<int>& truth) {
  if (pseudo.size() != truth.size()) {
    throw LengthMismatch("pseudo labels (" + std::to_string(pseudo.size()) +
                         ") and true labels (" + std::to_string(truth.size()) + ") differ in length");
  }
  ClusteringQuality q;
  if (pseudo.empty()) return q;
  const double n = static_cast<double>(pseudo.size());

  std::map<int, std::size_t> pc, tc;
  std::map<std::pair<int, int>, std::size_t> joint;
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    ++pc[pseudo[i]];
    ++tc[truth[i]];
    ++joint[{pseudo[i], truth[i]}];
  }

  std::map<int, std::size_t> best;
  for (const auto& [key, c] : joint) best[key.first] = std::max(best[key.first], c);
  double hits = 0.0;
  for (const auto& [_, c] : best) hits += static_cast<double>(c);
  q.purity = hits / n;

  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pxy = static_cast<double>(c) / n;
    const double px = static_cast<double>(pc[key.first]) / n;
    const double py = static_cast<double>(tc[key.second]) / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  const double hu = entropy(pc, n);
  const double hv = entropy(tc, n);
  if (hu == 0.0 && hv == 0.0) {
    q.nmi = 1.0;
  } else {
    q.nmi = std::clamp(mi / ((hu + hv) / 2.0), 0.0, 1.0);
  }
  return q;
}

EvalReport evaluate(const Dataset& imputed, const Dataset& random_imputed,
                    const OcclusionRecord& record, const PseudoLabels* pseudo) {
  EvalReport report;
  const ErrorTally knn = tally(imputed, record);
  const ErrorTally rnd = tally(random_imputed, record);
  report.mpjpe_imputed = mean(knn.errors);
  report.mpjpe_random = mean(rnd.errors);
  report.joints_imputed = knn.errors.size();
  report.joints_unimputable = knn.unimputable;
  const std::size_t occluded = report.joints_imputed + report.joints_unimputable;
  report.coverage = occluded == 0 ? 1.0
                                  : static_cast<double>(report.joints_imputed) /
                                        static_cast<double>(occluded);

  std::map<int, std::vector<double>> by_class;
  for (std::size_t i = 0; i < knn.errors.size(); ++i) {
    if (knn.labels[i]) by_class[*knn.labels[i]].push_back(knn.errors[i]);
  }
  for (const auto& [label, errs] : by_class) report.per_class[label] = {mean(errs), errs.size()};

  if (pseudo) {
    std::vector<int> truth;
    bool labelled = pseudo->size() == imputed.size();
    for (const auto& s : imputed.samples) {
      if (!s.label()) {
        labelled = false;
        break;
      }
      truth.push_back(*s.label());
    }
    if (labelled) report.clustering = clustering_quality(pseudo->labels, truth);
  }
  return report;
}

namespace {
// JSON has no NaN; undefined errors are written as null.
nlohmann::ordered_json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}
}  // namespace

std::string eval_report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["mpjpe_imputed"] = number_or_null(r.mpjpe_imputed);
  j["mpjpe_random"] = number_or_null(r.mpjpe_random);
  j["joints_imputed"] = r.joints_imputed;
  j["joints_unimputable"] = r.joints_unimputable;
  j["coverage"] = r.coverage;
  auto& per_class = j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& [label, e] : r.per_class) {
    per_class.push_back({{"label", label}, {"mpjpe", number_or_null(e.mpjpe)}, {"count", e.count}});
  }
  if (r.clustering) {
    j["cluster_purity"] = r.clustering->purity;
    j["nmi"] = r.clustering->nmi;
  } else {
    j["cluster_purity"] = nullptr;
    j["nmi"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string eval_report_csv_header() {
  return "mpjpe_imputed,mpjpe_random,joints_imputed,joints_unimputable,coverage,cluster_purity,nmi\n";
}

std::string eval_report_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out << io::format_double(r.mpjpe_imputed) << ',' << io::format_double(r.mpjpe_random) << ','
      << r.joints_imputed << ',' << r.joints_unimputable << ',' << io::format_double(r.coverage)
      << ',';
  if (r.clustering) {
    out << io::format_double(r.clustering->purity) << ',' << io::format_double(r.clustering->nmi);
  } else {
    out << ',';
  }
  out << '\n';
  return out.str();
}

}  // namespace skelfill
