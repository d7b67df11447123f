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
#include <stdexcept>
#include <string>

namespace skelfill {

// Root of every error thrown by the library. Each failure class named by
// the pipeline contract gets its own subtype so callers (and the CLI's exit
// code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SKELFILL_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// core-data
class MalformedCapture : public Error {
 public:
  MalformedCapture(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};
SKELFILL_DEFINE_ERROR(EmptyCapture);
SKELFILL_DEFINE_ERROR(FormatError);
SKELFILL_DEFINE_ERROR(IdMismatch);

// occlusion
SKELFILL_DEFINE_ERROR(AlreadyOccluded);
SKELFILL_DEFINE_ERROR(RateOutOfRange);
SKELFILL_DEFINE_ERROR(JointIndexOutOfRange);

// masking
SKELFILL_DEFINE_ERROR(DegenerateGraph);
SKELFILL_DEFINE_ERROR(MaskCountOutOfRange);
SKELFILL_DEFINE_ERROR(FrameCountOutOfRange);

// clustering
SKELFILL_DEFINE_ERROR(KTooLarge);
SKELFILL_DEFINE_ERROR(DimensionMismatch);

// imputation
SKELFILL_DEFINE_ERROR(NoOverlap);
SKELFILL_DEFINE_ERROR(EmptyDonorSet);
SKELFILL_DEFINE_ERROR(LabelMismatch);

// evaluation
SKELFILL_DEFINE_ERROR(RecordMismatch);
SKELFILL_DEFINE_ERROR(LengthMismatch);

// pipeline
SKELFILL_DEFINE_ERROR(MissingArtifact);
SKELFILL_DEFINE_ERROR(ConfigError);

#undef SKELFILL_DEFINE_ERROR

}  // namespace skelfill
