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
#include <optional>
#include <string>
#include <vector>

namespace skelfill {

// Everything a pipeline run depends on. Defaults follow the reference setup
// (T=50, M=2, K=60, k=5, 20% random occlusion).
struct PipelineConfig {
  std::string input;       // NTU .skeleton directory or file, .skl1, or .csv
  std::string test_input;  // optional second split
  std::string workdir = "skelfill_work";

  std::size_t frames = 50;       // T
  std::size_t joints = 0;        // V; 0 = take from the data
  std::size_t bodies = 2;        // M
  std::size_t center_joint = 1;  // spine middle
  std::string graph;             // edge-list file; empty = built-in 25-joint layout

  std::string occlusion_mode = "random";  // random | joints | none
  double occlusion_rate = 0.2;
  std::vector<std::size_t> occlusion_joints;
  double occlusion_frame_fraction = 0.5;

  std::string embedding_source = "builtin";  // builtin | external
  std::string embedding_train;               // SKEMB paths for external
  std::string embedding_test;

  std::size_t clusters = 60;
  std::size_t kmeans_max_iter = 300;
  double kmeans_tol = 1e-4;
  bool kmeans_normalize = false;

  std::size_t neighbors = 5;

  std::uint64_t seed = 0;
  std::optional<std::uint64_t> occlusion_seed;
  std::optional<std::uint64_t> kmeans_seed;
  std::optional<std::uint64_t> baseline_seed;

  std::size_t threads = 0;
  std::string format = "skl1";  // dataset artifacts: skl1 | csv

  std::uint64_t occlusion_seed_value() const { return occlusion_seed.value_or(seed); }
  std::uint64_t kmeans_seed_value() const { return kmeans_seed.value_or(seed); }
  std::uint64_t baseline_seed_value() const { return baseline_seed.value_or(seed); }
};

// Sets one field from its config-file key ("kmeans.k", "occlusion.rate", ...).
// Throws ConfigError on an unknown key or a malformed value.
void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value);

// "key = value" lines; '#' starts a comment; blank lines ignored.
void read_config(std::istream& in, PipelineConfig& config);
void read_config_file(const std::string& path, PipelineConfig& config);

// Canonical "key = value" text of every field that can influence artifacts
// (workdir and threads are excluded). Readable by read_config.
std::string config_to_text(const PipelineConfig& config);

// Throws ConfigError when a parameter is out of range or paths collide.
void validate_config(const PipelineConfig& config);

// Every config key, in config_to_text order, with a one-line description.
struct ConfigKey {
  const char* key;
  const char* help;
};
const std::vector<ConfigKey>& config_keys();

enum class Stage { kIngest, kOcclude, kEmbed, kCluster, kImpute, kEval, kPipeline };
const char* to_string(Stage stage);
std::optional<Stage> stage_from_string(const std::string& name);

struct StageOutcome {
  Stage stage = Stage::kPipeline;
  // Files written, relative to the workdir, in write order.
  std::vector<std::string> artifacts;
  // Machine-readable summary (the eval report for eval and pipeline).
  std::string summary_json;
};

// Runs one stage (or all of them for kPipeline) reading and writing files in
// config.workdir. Each stage also writes manifest.<stage>.json holding the
// config hash, seeds and digests of its inputs and outputs.
// Throws MissingArtifact when a prerequisite file is absent.
StageOutcome run_stage(const PipelineConfig& config, Stage stage);

// Exit status for an exception escaping run_stage: 2 config, 3 missing
// artifact, 4 data/format errors, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace skelfill
