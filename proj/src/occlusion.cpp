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

#include "skelfill/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "skelfill/binary_io.hpp"
#include "skelfill/error.hpp"
#include "skelfill/parallel.hpp"
#include "skelfill/random.hpp"

namespace skelfill {
namespace {

void reject_missing(const Dataset& ds) {
  for (const auto& s : ds.samples) {
    if (s.has_missing()) {
      throw AlreadyOccluded("sample '" + s.sample_id() + "' already contains missing joints");
    }
  }
}

// Partial Fisher-Yates: the first `count` entries of the result are a
// uniform draw without replacement from [0, n).
std::vector<std::size_t> choose(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

void hide(SkeletonSequence& seq, SampleOcclusion& rec, std::size_t t, std::size_t v,
          std::size_t m) {
  rec.joints.push_back({t, v, m, seq.joint(t, v, m)});
  seq.set_joint_missing(t, v, m);
}

void sort_record(SampleOcclusion& rec) {
  std::sort(rec.joints.begin(), rec.joints.end(), [](const auto& a, const auto& b) {
    return std::tie(a.t, a.v, a.m) < std::tie(b.t, b.v, b.m);
  });
}

}  // namespace

std::size_t OcclusionRecord::total() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.joints.size();
  return n;
}

std::size_t occlusion_count(double rate, std::size_t instances) {
  const double exact = rate * static_cast<double>(instances);
  const auto count = static_cast<std::size_t>(std::floor(exact + 1e-9));
  return std::min(count, instances);
}

OcclusionResult occlude_random(const Dataset& ds, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw RateOutOfRange("occlusion rate must be in [0, 1], got " + io::format_double(rate));
  }
  reject_missing(ds);

  OcclusionResult result{ds, {}};
  result.record.samples.resize(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    SkeletonSequence& seq = result.dataset.samples[i];
    SampleOcclusion& rec = result.record.samples[i];
    rec.sample_id = seq.sample_id();

    std::vector<std::size_t> bodies;
    for (std::size_t m = 0; m < seq.bodies(); ++m) {
      if (seq.body_present(m)) bodies.push_back(m);
    }
    const std::size_t per_body = seq.frames() * seq.joints();
    const std::size_t candidates = per_body * bodies.size();
    Rng rng(derive_seed(seed, i));
    for (std::size_t flat : choose(candidates, occlusion_count(rate, candidates), rng)) {
      const std::size_t m = bodies[flat / per_body];
      const std::size_t tv = flat % per_body;
      hide(seq, rec, tv / seq.joints(), tv % seq.joints(), m);
    }
    sort_record(rec);
  });
  result.dataset.refresh_masks();
  return result;
}

OcclusionResult occlude_joints(const Dataset& ds, const std::vector<std::size_t>& joints,
                               double frame_fraction, std::uint64_t seed) {
  if (joints.empty()) throw JointIndexOutOfRange("joint set is empty");
  if (!(frame_fraction >= 0.0 && frame_fraction <= 1.0)) {
    throw RateOutOfRange("frame fraction must be in [0, 1], got " +
                         io::format_double(frame_fraction));
  }
  std::vector<std::size_t> targets = joints;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  const std::size_t V = ds.empty() ? 0 : ds.shape().joints;
  for (std::size_t v : targets) {
    if (!ds.empty() && v >= V) {
      throw JointIndexOutOfRange("joint " + std::to_string(v) + " outside [0, " +
                                 std::to_string(V) + ")");
    }
  }
  reject_missing(ds);

  OcclusionResult result{ds, {}};
  result.record.samples.resize(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    SkeletonSequence& seq = result.dataset.samples[i];
    SampleOcclusion& rec = result.record.samples[i];
    rec.sample_id = seq.sample_id();
    Rng rng(derive_seed(seed, i));
    const std::size_t count = occlusion_count(frame_fraction, seq.frames());
    for (std::size_t v : targets) {
      const auto frames = choose(seq.frames(), count, rng);
      for (std::size_t m = 0; m < seq.bodies(); ++m) {
        if (!seq.body_present(m)) continue;
        for (std::size_t t : frames) hide(seq, rec, t, v, m);
      }
    }
    sort_record(rec);
  });
  result.dataset.refresh_masks();
  return result;
}

void restore_occlusion(Dataset& ds, const OcclusionRecord& record) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.size(); ++i) index[ds.samples[i].sample_id()] = i;
  for (const auto& rec : record.samples) {
    auto it = index.find(rec.sample_id);
    if (it == index.end()) throw RecordMismatch("unknown sample '" + rec.sample_id + "'");
    auto& seq = ds.samples[it->second];
    for (const auto& j : rec.joints) seq.set_joint(j.t, j.v, j.m, j.original);
  }
  ds.refresh_masks();
}

void write_occlusion_csv(std::ostream& out, const OcclusionRecord& record) {
  out << "sample_id,t,v,m,x,y,z\n";
  for (const auto& rec : record.samples) {
    for (const auto& j : rec.joints) {
      out << rec.sample_id << ',' << j.t << ',' << j.v << ',' << j.m << ','
          << io::format_float(j.original[0]) << ',' << io::format_float(j.original[1]) << ','
          << io::format_float(j.original[2]) << '\n';
    }
  }
}

OcclusionRecord read_occlusion_csv(std::istream& in) {
  OcclusionRecord record;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    if (f.size() != 7) {
      throw FormatError("occlusion csv line " + std::to_string(line_no) + ": expected 7 fields");
    }
    auto [it, inserted] = index.try_emplace(f[0], record.samples.size());
    if (inserted) record.samples.push_back({f[0], {}});
    record.samples[it->second].joints.push_back(
        {std::stoul(f[1]), std::stoul(f[2]), std::stoul(f[3]),
         {io::parse_float(f[4]), io::parse_float(f[5]), io::parse_float(f[6])}});
  }
  return record;
}

}  // namespace skelfill
