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

#include "skelfill/skeleton.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "skelfill/binary_io.hpp"
#include "skelfill/error.hpp"

namespace skelfill {

// ===========================================================================
// NTU text parsing

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line split into whitespace-separated tokens.
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(std::move(tok));
      if (!tokens.empty()) return tokens;
    }
    throw MalformedCapture(line_no_ + 1,
                           std::string("unexpected end of file, expected ") + expecting);
  }

  bool at_end() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return false;
    }
    return true;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t parse_count(const std::vector<std::string>& tokens, std::size_t line,
                        const char* what) {
  if (tokens.size() != 1) {
    throw MalformedCapture(line, std::string("expected a single ") + what);
  }
  const std::string& tok = tokens[0];
  std::size_t value = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw MalformedCapture(line, std::string("invalid ") + what + " '" + tok + "'");
  }
  return value;
}

double parse_real(const std::string& tok, std::size_t line) {
  try {
    return io::parse_double(tok);
  } catch (const FormatError&) {
    throw MalformedCapture(line, "non-numeric field '" + tok + "'");
  }
}

}  // namespace

std::size_t RawCapture::joint_count() const {
  for (const auto& f : frames) {
    if (!f.bodies.empty()) return f.bodies.front().joints.size();
  }
  return 0;
}

RawCapture parse_ntu_skeleton(std::istream& in) {
  LineReader reader(in);
  RawCapture raw;

  const std::size_t frame_count = parse_count(reader.next("frame count"), reader.line(), "frame count");
  if (frame_count == 0) throw MalformedCapture(reader.line(), "capture declares zero frames");
  std::optional<std::size_t> joints_per_body;

  raw.frames.resize(frame_count);
  for (auto& frame : raw.frames) {
    const std::size_t body_count = parse_count(reader.next("body count"), reader.line(), "body count");
    frame.bodies.resize(body_count);
    for (auto& body : frame.bodies) {
      body.body_id = reader.next("body metadata").front();
      const std::size_t joint_count = parse_count(reader.next("joint count"), reader.line(), "joint count");
      if (joints_per_body && *joints_per_body != joint_count) {
        throw MalformedCapture(reader.line(), "joint count " + std::to_string(joint_count) +
                                                  " differs from earlier bodies (" +
                                                  std::to_string(*joints_per_body) + ")");
      }
      joints_per_body = joint_count;
      body.joints.resize(joint_count);
      for (auto& joint : body.joints) {
        const auto tokens = reader.next("joint line");
        if (tokens.size() < 3) {
          throw MalformedCapture(reader.line(), "joint line has fewer than 3 fields");
        }
        joint.x = parse_real(tokens[0], reader.line());
        joint.y = parse_real(tokens[1], reader.line());
        joint.z = parse_real(tokens[2], reader.line());
        if (tokens.size() >= 12) {
          joint.tracking_state = static_cast<int>(parse_real(tokens[11], reader.line()));
        }
      }
    }
  }
  if (!reader.at_end()) {
    throw MalformedCapture(reader.line(), "content after the declared frames");
  }
  return raw;
}

RawCapture parse_ntu_skeleton_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return parse_ntu_skeleton(in);
}

std::optional<int> ntu_label_from_filename(const std::string& filename) {
  const auto slash = filename.find_last_of("/\\");
  const std::string base = slash == std::string::npos ? filename : filename.substr(slash + 1);
  const auto pos = base.find('A');
  if (pos == std::string::npos) return std::nullopt;
  std::size_t end = pos + 1;
  while (end < base.size() && std::isdigit(static_cast<unsigned char>(base[end]))) ++end;
  if (end == pos + 1) return std::nullopt;
  return std::stoi(base.substr(pos + 1, end - pos - 1)) - 1;
}

// ===========================================================================
// SkeletonSequence

SkeletonSequence::SkeletonSequence(Shape shape, std::string sample_id,
                                   std::optional<int> label)
    : shape_(shape),
      data_(shape.scalars(), 0.0f),
      sample_id_(std::move(sample_id)),
      label_(label) {}

SkeletonSequence::SkeletonSequence(Shape shape, std::vector<float> data,
                                   std::string sample_id, std::optional<int> label)
    : shape_(shape), data_(std::move(data)), sample_id_(std::move(sample_id)), label_(label) {
  if (data_.size() != shape_.scalars()) {
    throw FormatError("tensor size " + std::to_string(data_.size()) +
                      " does not match shape (" + std::to_string(shape_.scalars()) + ")");
  }
}

void SkeletonSequence::set_joint(std::size_t t, std::size_t v, std::size_t m,
                                 const std::array<float, 3>& xyz) {
  for (std::size_t c = 0; c < kChannels; ++c) at(c, t, v, m) = xyz[c];
}

void SkeletonSequence::set_joint_missing(std::size_t t, std::size_t v, std::size_t m) {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  set_joint(t, v, m, {nan, nan, nan});
}

bool SkeletonSequence::joint_missing(std::size_t t, std::size_t v, std::size_t m) const {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!std::isnan(at(c, t, v, m))) return false;
  }
  return true;
}

bool SkeletonSequence::joint_present(std::size_t t, std::size_t v, std::size_t m) const {
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (!std::isfinite(at(c, t, v, m))) return false;
  }
  return true;
}

bool SkeletonSequence::body_present(std::size_t m) const {
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t t = 0; t < shape_.frames; ++t) {
      for (std::size_t v = 0; v < shape_.joints; ++v) {
        if (at(c, t, v, m) != 0.0f) return true;  // NaN compares unequal too
      }
    }
  }
  return false;
}

std::size_t SkeletonSequence::present_bodies() const {
  std::size_t n = 0;
  for (std::size_t m = 0; m < shape_.bodies; ++m) n += body_present(m) ? 1 : 0;
  return n;
}

bool SkeletonSequence::has_missing() const {
  return std::any_of(data_.begin(), data_.end(), [](float x) { return std::isnan(x); });
}

bool SkeletonSequence::bitwise_equal(const SkeletonSequence& other) const {
  return shape_ == other.shape_ && sample_id_ == other.sample_id_ && label_ == other.label_ &&
         data_.size() == other.data_.size() &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

// ===========================================================================
// Masks and datasets

MissingMask compute_missing_mask(const SkeletonSequence& seq) {
  MissingMask mask;
  mask.shape = seq.shape();
  mask.frame_mask.assign(seq.shape().instances(), false);
  mask.joint_row.assign(seq.joints(), false);
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    for (std::size_t v = 0; v < seq.joints(); ++v) {
      for (std::size_t m = 0; m < seq.bodies(); ++m) {
        if (!seq.joint_missing(t, v, m)) continue;
        mask.frame_mask[(t * seq.joints() + v) * seq.bodies() + m] = true;
        if (m == 0) mask.joint_row[v] = true;
      }
    }
  }
  return mask;
}

const char* to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

Dataset::Dataset(std::vector<SkeletonSequence> s, Split sp) : samples(std::move(s)), split(sp) {
  refresh_masks();
}

Shape Dataset::shape() const {
  if (samples.empty()) return {};
  const Shape s = samples.front().shape();
  for (const auto& seq : samples) {
    if (!(seq.shape() == s)) {
      throw FormatError("sample '" + seq.sample_id() + "' has a different tensor shape");
    }
  }
  return s;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.sample_id());
  return out;
}

void Dataset::refresh_masks() {
  masks.clear();
  masks.reserve(samples.size());
  for (const auto& s : samples) masks.push_back(compute_missing_mask(s));
}

std::vector<std::vector<bool>> Dataset::missing_joint_matrix() const {
  std::vector<std::vector<bool>> rows;
  rows.reserve(masks.size());
  for (const auto& m : masks) rows.push_back(m.joint_row);
  return rows;
}

bool Dataset::bitwise_equal(const Dataset& other) const {
  if (samples.size() != other.samples.size()) return false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].bitwise_equal(other.samples[i])) return false;
  }
  return true;
}

// ===========================================================================
// Canonicalization

std::size_t resample_index(std::size_t i, std::size_t source_frames,
                           std::size_t target_frames) {
  if (target_frames <= 1 || source_frames <= 1) return 0;
  // round(i * (S-1) / (T-1)) in integer arithmetic, halves rounded up.
  const std::size_t num = 2 * i * (source_frames - 1) + (target_frames - 1);
  return num / (2 * (target_frames - 1));
}

namespace {

struct BodyTrack {
  std::string key;
  std::size_t first_frame = 0;
  // frame index -> position of the body inside that frame
  std::map<std::size_t, std::size_t> slots;
  double energy = 0.0;
};

}  // namespace

SkeletonSequence to_canonical(const RawCapture& raw, const CanonicalOptions& options,
                              std::string sample_id, std::optional<int> label) {
  if (options.target_frames < 1 || options.max_bodies < 1) {
    throw ConfigError("target_frames and max_bodies must be >= 1");
  }
  const std::size_t joints = raw.joint_count();
  if (raw.frames.empty() || joints == 0) throw EmptyCapture("capture holds no body data");

  // Track bodies by id; a repeated id inside one frame starts a separate track.
  std::vector<BodyTrack> tracks;
  std::map<std::string, std::size_t> by_key;
  for (std::size_t f = 0; f < raw.frames.size(); ++f) {
    std::map<std::string, std::size_t> seen;
    const auto& bodies = raw.frames[f].bodies;
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      const std::size_t dup = seen[bodies[b].body_id]++;
      std::string key = bodies[b].body_id;
      if (dup > 0) key += "#" + std::to_string(dup);
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        it = by_key.emplace(key, tracks.size()).first;
        tracks.push_back({key, f, {}, 0.0});
      }
      tracks[it->second].slots[f] = b;
    }
  }

  for (auto& track : tracks) {
    for (auto it = track.slots.begin(); it != track.slots.end(); ++it) {
      auto prev = track.slots.find(it->first - 1);
      if (it->first == 0 || prev == track.slots.end()) continue;
      const auto& cur = raw.frames[it->first].bodies[it->second].joints;
      const auto& old = raw.frames[prev->first].bodies[prev->second].joints;
      for (std::size_t v = 0; v < joints; ++v) {
        const double dx = cur[v].x - old[v].x;
        const double dy = cur[v].y - old[v].y;
        const double dz = cur[v].z - old[v].z;
        const double e = dx * dx + dy * dy + dz * dz;
        if (std::isfinite(e)) track.energy += e;
      }
    }
  }

  std::vector<std::size_t> order(tracks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tracks[a].energy > tracks[b].energy;
  });
  if (order.size() > options.max_bodies) order.resize(options.max_bodies);

  const Shape shape{options.target_frames, joints, options.max_bodies};
  SkeletonSequence seq(shape, std::move(sample_id), label);
  for (std::size_t t = 0; t < shape.frames; ++t) {
    const std::size_t src = resample_index(t, raw.frames.size(), shape.frames);
    for (std::size_t m = 0; m < order.size(); ++m) {
      const auto& track = tracks[order[m]];
      auto it = track.slots.find(src);
      if (it == track.slots.end()) continue;
      const auto& js = raw.frames[src].bodies[it->second].joints;
      for (std::size_t v = 0; v < joints; ++v) {
        seq.set_joint(t, v, m,
                      {static_cast<float>(js[v].x), static_cast<float>(js[v].y),
                       static_cast<float>(js[v].z)});
      }
    }
  }
  return seq;
}

RelativeResult preprocess_relative(const SkeletonSequence& seq, std::size_t center_joint) {
  if (center_joint >= seq.joints()) {
    throw JointIndexOutOfRange("center joint " + std::to_string(center_joint) +
                               " outside [0, " + std::to_string(seq.joints()) + ")");
  }
  RelativeResult result{seq, 0};
  SkeletonSequence& out = result.sequence;
  for (std::size_t m = 0; m < seq.bodies(); ++m) {
    if (!seq.body_present(m)) continue;
    for (std::size_t t = 0; t < seq.frames(); ++t) {
      if (!seq.joint_present(t, center_joint, m)) {
        ++result.untranslated_frames;
        continue;
      }
      const auto center = seq.joint(t, center_joint, m);
      for (std::size_t v = 0; v < seq.joints(); ++v) {
        for (std::size_t c = 0; c < kChannels; ++c) {
          out.at(c, t, v, m) = seq.at(c, t, v, m) - center[c];
        }
      }
    }
  }
  return result;
}

// ===========================================================================
// SKL1

namespace {
constexpr std::string_view kSkl1Magic = "SKL1";
}

void write_skl1(std::ostream& out, const Dataset& ds) {
  const Shape shape = ds.shape();
  io::write_magic(out, kSkl1Magic);
  io::write_u32(out, static_cast<std::uint32_t>(ds.size()));
  io::write_u32(out, static_cast<std::uint32_t>(kChannels));
  io::write_u32(out, static_cast<std::uint32_t>(shape.frames));
  io::write_u32(out, static_cast<std::uint32_t>(shape.joints));
  io::write_u32(out, static_cast<std::uint32_t>(shape.bodies));
  for (const auto& s : ds.samples) {
    io::write_string(out, s.sample_id());
    io::write_i32(out, s.label().value_or(-1));
    for (float x : s.data()) io::write_f32(out, x);
  }
  if (!out) throw FormatError("write failed");
}

void write_skl1_file(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_skl1(out, ds);
}

Dataset read_skl1(std::istream& in, Split split) {
  io::expect_magic(in, kSkl1Magic);
  const std::uint32_t n = io::read_u32(in);
  const std::uint32_t c = io::read_u32(in);
  const Shape shape{io::read_u32(in), io::read_u32(in), io::read_u32(in)};
  if (c != kChannels) throw FormatError("SKL1 channel count must be 3, got " + std::to_string(c));
  if (n > 0 && (shape.frames == 0 || shape.joints == 0 || shape.bodies == 0)) {
    throw FormatError("SKL1 dimensions must be >= 1");
  }
  std::vector<SkeletonSequence> samples;
  samples.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string id = io::read_string(in);
    const std::int32_t label = io::read_i32(in);
    std::vector<float> data(shape.scalars());
    for (float& x : data) x = io::read_f32(in);
    samples.emplace_back(shape, std::move(data), std::move(id),
                         label < 0 ? std::nullopt : std::optional<int>(label));
  }
  io::expect_eof(in);
  return Dataset(std::move(samples), split);
}

Dataset read_skl1_file(const std::string& path, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_skl1(in, split);
}

// ===========================================================================
// Long-form CSV

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << "sample_id,label,t,v,m,x,y,z\n";
  for (const auto& s : ds.samples) {
    const std::string label = s.label() ? std::to_string(*s.label()) : "-1";
    for (std::size_t t = 0; t < s.frames(); ++t) {
      for (std::size_t v = 0; v < s.joints(); ++v) {
        for (std::size_t m = 0; m < s.bodies(); ++m) {
          out << s.sample_id() << ',' << label << ',' << t << ',' << v << ',' << m;
          for (std::size_t c = 0; c < kChannels; ++c) out << ',' << io::format_float(s.at(c, t, v, m));
          out << '\n';
        }
      }
    }
  }
}

Dataset read_dataset_csv(std::istream& in, Split split) {
  struct Row {
    std::size_t t, v, m;
    std::array<float, 3> xyz;
  };
  std::vector<std::string> order;
  std::map<std::string, std::pair<int, std::vector<Row>>> rows;
  Shape shape{};

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line_no == 1) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    if (f.size() != 8) throw FormatError("csv line " + std::to_string(line_no) + ": expected 8 fields");
    auto [it, inserted] = rows.try_emplace(f[0]);
    if (inserted) {
      order.push_back(f[0]);
      it->second.first = std::stoi(f[1]);
    }
    Row r{std::stoul(f[2]), std::stoul(f[3]), std::stoul(f[4]),
          {io::parse_float(f[5]), io::parse_float(f[6]), io::parse_float(f[7])}};
    shape.frames = std::max(shape.frames, r.t + 1);
    shape.joints = std::max(shape.joints, r.v + 1);
    shape.bodies = std::max(shape.bodies, r.m + 1);
    it->second.second.push_back(r);
  }
  std::vector<SkeletonSequence> samples;
  for (const auto& id : order) {
    const auto& [label, rs] = rows[id];
    SkeletonSequence seq(shape, id, label < 0 ? std::nullopt : std::optional<int>(label));
    for (const auto& r : rs) seq.set_joint(r.t, r.v, r.m, r.xyz);
    samples.push_back(std::move(seq));
  }
  return Dataset(std::move(samples), split);
}

}  // namespace skelfill
