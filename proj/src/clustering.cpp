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

#include "skelfill/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "skelfill/binary_io.hpp"
#include "skelfill/error.hpp"
#include "skelfill/parallel.hpp"
#include "skelfill/random.hpp"

namespace skelfill {
namespace {

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

struct Assignment {
  std::vector<int> labels;
  std::vector<double> distances;
  double inertia = 0.0;
};

Assignment assign(const std::vector<double>& x, std::size_t n, std::size_t d,
                  const std::vector<double>& centroids, std::size_t k) {
  Assignment a;
  a.labels.assign(n, 0);
  a.distances.assign(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = squared_distance(&x[i * d], &centroids[c * d], d);
      if (dist < best) {
        best = dist;
        best_k = static_cast<int>(c);
      }
    }
    a.labels[i] = best_k;
    a.distances[i] = best;
  });
  for (double v : a.distances) a.inertia += v;
  return a;
}

std::vector<double> to_double(const EmbeddingMatrix& e) {
  return std::vector<double>(e.values.begin(), e.values.end());
}

std::vector<double> kmeans_plus_plus(const std::vector<double>& x, std::size_t n, std::size_t d,
                                     std::size_t k, Rng& rng) {
  std::vector<double> centroids(k * d);
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t c, std::size_t i) {
    chosen[i] = true;
    std::copy(&x[i * d], &x[i * d] + d, &centroids[c * d]);
    for (std::size_t j = 0; j < n; ++j) {
      nearest[j] = std::min(nearest[j], squared_distance(&x[j * d], &centroids[c * d], d));
    }
  };

  take(0, rng.index(n));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += chosen[j] ? 0.0 : nearest[j];
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (chosen[j] || nearest[j] <= 0.0) continue;
        acc += nearest[j];
        pick = j;
        if (u < acc) break;
      }
    } else {
      // Every remaining row duplicates a chosen centroid.
      std::vector<std::size_t> rest;
      for (std::size_t j = 0; j < n; ++j) {
        if (!chosen[j]) rest.push_back(j);
      }
      pick = rest[rng.index(rest.size())];
    }
    take(c, pick);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans_fit(const EmbeddingMatrix& e, const KMeansOptions& options) {
  const std::size_t n = e.rows;
  const std::size_t d = e.cols;
  const std::size_t k = options.clusters;
  if (k < 1 || k > n) {
    throw KTooLarge("cluster count " + std::to_string(k) + " must be in [1, N=" +
                    std::to_string(n) + "]");
  }
  if (options.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(options.tol >= 0.0)) throw ConfigError("tol must be >= 0");

  const std::vector<double> x = to_double(e);
  Rng rng(options.seed);
  std::vector<double> centroids = kmeans_plus_plus(x, n, d, k, rng);

  ClusterModel model;
  model.clusters = k;
  model.dims = d;
  model.seed = options.seed;

  std::vector<int> labels;
  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    Assignment a = assign(x, n, d, centroids, k);
    model.inertia_history.push_back(a.inertia);
    model.iterations_run = iter;
    if (a.labels == labels) {
      model.converged = true;
      break;
    }
    labels = std::move(a.labels);

    std::vector<double> updated(k * d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) updated[c * d + j] += x[i * d + j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) updated[c * d + j] /= static_cast<double>(counts[c]);
    }
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // Farthest row from its own centroid among clusters that can spare one.
      std::size_t far = n;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(labels[i]);
        if (counts[own] < 2) continue;
        const double dist = squared_distance(&x[i * d], &updated[own * d], d);
        if (dist > far_dist) {
          far_dist = dist;
          far = i;
        }
      }
      if (far == n) continue;
      --counts[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      counts[c] = 1;
      std::copy(&x[far * d], &x[far * d] + d, &updated[c * d]);
      repaired = true;
    }
    if (repaired) {
      // Donor clusters lost a row; bring every centroid back to its mean.
      std::fill(updated.begin(), updated.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        for (std::size_t j = 0; j < d; ++j) updated[c * d + j] += x[i * d + j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < d; ++j) updated[c * d + j] /= static_cast<double>(counts[c]);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) std::copy(&centroids[c * d], &centroids[c * d] + d, &updated[c * d]);
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(&updated[c * d], &centroids[c * d], d)));
    }
    centroids = std::move(updated);
    if (shift < options.tol) {
      model.converged = true;
      break;
    }
  }

  model.centroids.assign(centroids.begin(), centroids.end());
  KMeansResult result{std::move(model), {}};
  result.labels = kmeans_predict(result.model, e);
  result.model.inertia = inertia_of(result.model, e, result.labels);
  return result;
}

PseudoLabels kmeans_predict(const ClusterModel& model, const EmbeddingMatrix& e) {
  if (e.cols != model.dims) {
    throw DimensionMismatch("embedding dimension " + std::to_string(e.cols) +
                            " does not match model dimension " + std::to_string(model.dims));
  }
  const std::vector<double> x = to_double(e);
  const std::vector<double> c(model.centroids.begin(), model.centroids.end());
  PseudoLabels out;
  out.labels = assign(x, e.rows, e.cols, c, model.clusters).labels;
  out.sample_ids = e.sample_ids;
  return out;
}

double inertia_of(const ClusterModel& model, const EmbeddingMatrix& e, const PseudoLabels& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < e.rows; ++i) {
    const float* c = model.centroid(static_cast<std::size_t>(labels.labels[i]));
    for (std::size_t j = 0; j < e.cols; ++j) {
      const double diff = static_cast<double>(e.row(i)[j]) - c[j];
      total += diff * diff;
    }
  }
  return total;
}

namespace {
constexpr std::string_view kSkkmMagic = "SKKM1";
}

void save_cluster_model(std::ostream& out, const ClusterModel& model) {
  io::write_magic(out, kSkkmMagic);
  io::write_u32(out, static_cast<std::uint32_t>(model.clusters));
  io::write_u32(out, static_cast<std::uint32_t>(model.dims));
  io::write_f64(out, model.inertia);
  io::write_u64(out, model.seed);
  for (float v : model.centroids) io::write_f32(out, v);
  if (!out) throw FormatError("write failed");
}

void save_cluster_model_file(const std::string& path, const ClusterModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  save_cluster_model(out, model);
}

ClusterModel load_cluster_model(std::istream& in) {
  io::expect_magic(in, kSkkmMagic);
  ClusterModel m;
  m.clusters = io::read_u32(in);
  m.dims = io::read_u32(in);
  if (m.clusters == 0 || m.dims == 0) throw FormatError("SKKM K and D must be >= 1");
  m.inertia = io::read_f64(in);
  m.seed = io::read_u64(in);
  m.centroids.resize(m.clusters * m.dims);
  for (float& v : m.centroids) v = io::read_f32(in);
  io::expect_eof(in);
  return m;
}

ClusterModel load_cluster_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return load_cluster_model(in);
}

void write_labels_csv(std::ostream& out, const PseudoLabels& labels) {
  out << "sample_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels.sample_ids[i] << ',' << labels.labels[i] << '\n';
  }
}

PseudoLabels read_labels_csv(std::istream& in) {
  PseudoLabels out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw FormatError("labels csv line " + std::to_string(line_no) + ": missing comma");
    }
    out.sample_ids.push_back(line.substr(0, comma));
    try {
      out.labels.push_back(std::stoi(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw FormatError("labels csv line " + std::to_string(line_no) + ": bad label");
    }
  }
  return out;
}

}  // namespace skelfill
