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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace skelfill {

// ---------------------------------------------------------------------------
// Raw capture as read from an NTU-style text file.

struct JointRecord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int tracking_state = 2;
};

struct BodyRecord {
  std::string body_id;
  std::vector<JointRecord> joints;
};

struct FrameRecord {
  std::vector<BodyRecord> bodies;
};

struct RawCapture {
  std::vector<FrameRecord> frames;

  // Joint count shared by every body, or 0 when no frame holds a body.
  std::size_t joint_count() const;
};

// Layout: line 1 frame count; per frame a body count line; per body one
// metadata line (first token is the body id), a joint count line, then one
// line per joint whose first three fields are x y z. A 12th field, when
// present, is read as the tracking state. Throws MalformedCapture.
RawCapture parse_ntu_skeleton(std::istream& in);
RawCapture parse_ntu_skeleton_file(const std::string& path);

// Action class encoded in an NTU file name ("S001C001P001R001A013" -> 12),
// or nullopt when the name carries no "A<digits>" tag.
std::optional<int> ntu_label_from_filename(const std::string& filename);

// ---------------------------------------------------------------------------
// Canonical tensor.

inline constexpr std::size_t kChannels = 3;
inline constexpr std::size_t kNtuJoints = 25;
// Spine-middle joint of the 25-joint Kinect v2 layout (0-based).
inline constexpr std::size_t kDefaultCenterJoint = 1;
inline constexpr std::size_t kDefaultFrames = 50;
inline constexpr std::size_t kDefaultBodies = 2;

struct Shape {
  std::size_t frames = 0;  // T
  std::size_t joints = 0;  // V
  std::size_t bodies = 0;  // M

  std::size_t instances() const { return frames * joints * bodies; }
  std::size_t scalars() const { return kChannels * instances(); }
  bool operator==(const Shape&) const = default;
};

// One sample: a [C=3, T, V, M] float tensor stored row-major in C,T,V,M
// order. A missing joint instance has NaN in all three channels.
class SkeletonSequence {
 public:
  SkeletonSequence() = default;
  SkeletonSequence(Shape shape, std::string sample_id,
                   std::optional<int> label = std::nullopt);
  SkeletonSequence(Shape shape, std::vector<float> data, std::string sample_id,
                   std::optional<int> label = std::nullopt);

  const Shape& shape() const { return shape_; }
  std::size_t frames() const { return shape_.frames; }
  std::size_t joints() const { return shape_.joints; }
  std::size_t bodies() const { return shape_.bodies; }

  const std::string& sample_id() const { return sample_id_; }
  void set_sample_id(std::string id) { sample_id_ = std::move(id); }
  const std::optional<int>& label() const { return label_; }
  void set_label(std::optional<int> label) { label_ = label; }

  std::size_t index(std::size_t c, std::size_t t, std::size_t v,
                    std::size_t m) const {
    return ((c * shape_.frames + t) * shape_.joints + v) * shape_.bodies + m;
  }
  // Offset between consecutive channels of one joint instance.
  std::size_t channel_stride() const { return shape_.instances(); }

  float at(std::size_t c, std::size_t t, std::size_t v, std::size_t m) const {
    return data_[index(c, t, v, m)];
  }
  float& at(std::size_t c, std::size_t t, std::size_t v, std::size_t m) {
    return data_[index(c, t, v, m)];
  }

  std::array<float, 3> joint(std::size_t t, std::size_t v, std::size_t m) const {
    return {at(0, t, v, m), at(1, t, v, m), at(2, t, v, m)};
  }
  void set_joint(std::size_t t, std::size_t v, std::size_t m,
                 const std::array<float, 3>& xyz);
  void set_joint_missing(std::size_t t, std::size_t v, std::size_t m);

  // All three channels NaN.
  bool joint_missing(std::size_t t, std::size_t v, std::size_t m) const;
  // All three channels finite.
  bool joint_present(std::size_t t, std::size_t v, std::size_t m) const;

  // A body slot is absent when it was zero-filled as padding: every value is
  // exactly 0.0. Occluded (NaN) entries count as present data.
  bool body_present(std::size_t m) const;
  std::size_t present_bodies() const;

  bool has_missing() const;

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  // Bitwise comparison of tensor contents (NaN payloads included), id, label.
  bool bitwise_equal(const SkeletonSequence& other) const;

 private:
  Shape shape_;
  std::vector<float> data_;
  std::string sample_id_;
  std::optional<int> label_;
};

// ---------------------------------------------------------------------------
// Missing-data bookkeeping.

struct MissingMask {
  Shape shape;
  // [T, V, M] row-major; true = joint instance missing.
  std::vector<bool> frame_mask;
  // [V]; true when the joint is missing in at least one frame of body 0.
  std::vector<bool> joint_row;

  bool missing(std::size_t t, std::size_t v, std::size_t m) const {
    return frame_mask[(t * shape.joints + v) * shape.bodies + m];
  }
};

MissingMask compute_missing_mask(const SkeletonSequence& seq);

enum class Split { kTrain, kTest };
const char* to_string(Split split);

struct Dataset {
  std::vector<SkeletonSequence> samples;
  std::vector<MissingMask> masks;
  Split split = Split::kTrain;

  Dataset() = default;
  Dataset(std::vector<SkeletonSequence> samples, Split split);

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Shape shared by all samples; throws FormatError when samples disagree.
  Shape shape() const;
  std::vector<std::string> ids() const;
  void refresh_masks();
  // The dataset's [N, V] missing joint matrix, one joint_row per sample.
  std::vector<std::vector<bool>> missing_joint_matrix() const;
  bool bitwise_equal(const Dataset& other) const;
};

// ---------------------------------------------------------------------------
// Preprocessing.

struct CanonicalOptions {
  std::size_t target_frames = kDefaultFrames;
  std::size_t max_bodies = kDefaultBodies;
};

// Source frame index used for output frame i when resampling `source_frames`
// frames to `target_frames` by nearest index: round(i * (S-1) / (T-1)).
std::size_t resample_index(std::size_t i, std::size_t source_frames,
                           std::size_t target_frames);

// Fixed-shape tensorization. Bodies are tracked by id across frames; when
// more than max_bodies appear, the ones with the largest total motion energy
// are kept, ordered by descending energy. Body slots with no data are zero.
// Throws EmptyCapture when no frame holds a body.
SkeletonSequence to_canonical(const RawCapture& raw, const CanonicalOptions& options,
                              std::string sample_id = {},
                              std::optional<int> label = std::nullopt);

struct RelativeResult {
  SkeletonSequence sequence;
  // (t, m) slices of present bodies whose center joint was missing; those
  // frames are left untranslated.
  std::size_t untranslated_frames = 0;
};

// Translates every joint relative to the center joint of the same frame and
// body. Padding bodies are left as they are.
RelativeResult preprocess_relative(const SkeletonSequence& seq,
                                   std::size_t center_joint = kDefaultCenterJoint);

// ---------------------------------------------------------------------------
// SKL1 binary format.

void write_skl1(std::ostream& out, const Dataset& ds);
void write_skl1_file(const std::string& path, const Dataset& ds);
Dataset read_skl1(std::istream& in, Split split = Split::kTrain);
Dataset read_skl1_file(const std::string& path, Split split = Split::kTrain);

// Long-form CSV (sample_id,label,t,v,m,x,y,z); one row per joint instance.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
Dataset read_dataset_csv(std::istream& in, Split split = Split::kTrain);

}  // namespace skelfill
