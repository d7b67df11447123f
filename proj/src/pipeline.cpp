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

#include "skelfill/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "skelfill/binary_io.hpp"
#include "skelfill/clustering.hpp"
#include "skelfill/embedding.hpp"
#include "skelfill/error.hpp"
#include "skelfill/evaluation.hpp"
#include "skelfill/imputation.hpp"
#include "skelfill/masking.hpp"
#include "skelfill/occlusion.hpp"
#include "skelfill/parallel.hpp"
#include "skelfill/skeleton.hpp"

namespace fs = std::filesystem;

namespace skelfill {

// ===========================================================================
// Configuration

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

double to_real(const std::string& key, const std::string& value) {
  try {
    return io::parse_double(value);
  } catch (const FormatError&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<std::size_t> to_index_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  for (std::string tok; std::getline(ss, tok, ',');) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(to_size(key, tok));
  }
  return out;
}

std::string join(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

struct KeyBinding {
  ConfigKey doc;
  bool hashed;  // part of config_to_text
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<KeyBinding>& bindings() {
  using C = PipelineConfig;
  using S = std::string;
  static const std::vector<KeyBinding> kBindings = {
      {{"input", "training input: NTU .skeleton dir/file, .skl1 or .csv"}, true,
       [](C& c, const S&, const S& v) { c.input = v; }, [](const C& c) { return c.input; }},
      {{"test_input", "optional test split input"}, true,
       [](C& c, const S&, const S& v) { c.test_input = v; }, [](const C& c) { return c.test_input; }},
      {{"workdir", "directory holding stage artifacts"}, false,
       [](C& c, const S&, const S& v) { c.workdir = v; }, [](const C& c) { return c.workdir; }},
      {{"frames", "frames per sequence (T)"}, true,
       [](C& c, const S& k, const S& v) { c.frames = to_size(k, v); },
       [](const C& c) { return std::to_string(c.frames); }},
      {{"joints", "expected joints per body (V); 0 = from data"}, true,
       [](C& c, const S& k, const S& v) { c.joints = to_size(k, v); },
       [](const C& c) { return std::to_string(c.joints); }},
      {{"bodies", "body slots per frame (M)"}, true,
       [](C& c, const S& k, const S& v) { c.bodies = to_size(k, v); },
       [](const C& c) { return std::to_string(c.bodies); }},
      {{"center_joint", "joint used as the origin of relative coordinates"}, true,
       [](C& c, const S& k, const S& v) { c.center_joint = to_size(k, v); },
       [](const C& c) { return std::to_string(c.center_joint); }},
      {{"graph", "skeleton edge-list file (default: built-in 25-joint layout)"}, true,
       [](C& c, const S&, const S& v) { c.graph = v; }, [](const C& c) { return c.graph; }},
      {{"occlusion.mode", "random | joints | none"}, true,
       [](C& c, const S&, const S& v) { c.occlusion_mode = v; },
       [](const C& c) { return c.occlusion_mode; }},
      {{"occlusion.rate", "fraction of joint instances hidden in random mode"}, true,
       [](C& c, const S& k, const S& v) { c.occlusion_rate = to_real(k, v); },
       [](const C& c) { return io::format_double(c.occlusion_rate); }},
      {{"occlusion.joints", "comma-separated joints hidden in joints mode"}, true,
       [](C& c, const S& k, const S& v) { c.occlusion_joints = to_index_list(k, v); },
       [](const C& c) { return join(c.occlusion_joints); }},
      {{"occlusion.frame_fraction", "fraction of frames hidden per joint in joints mode"}, true,
       [](C& c, const S& k, const S& v) { c.occlusion_frame_fraction = to_real(k, v); },
       [](const C& c) { return io::format_double(c.occlusion_frame_fraction); }},
      {{"embedding.source", "builtin | external"}, true,
       [](C& c, const S&, const S& v) { c.embedding_source = v; },
       [](const C& c) { return c.embedding_source; }},
      {{"embedding.train", "SKEMB file with training embeddings (external source)"}, true,
       [](C& c, const S&, const S& v) { c.embedding_train = v; },
       [](const C& c) { return c.embedding_train; }},
      {{"embedding.test", "SKEMB file with test embeddings (external source)"}, true,
       [](C& c, const S&, const S& v) { c.embedding_test = v; },
       [](const C& c) { return c.embedding_test; }},
      {{"kmeans.k", "number of clusters (K)"}, true,
       [](C& c, const S& k, const S& v) { c.clusters = to_size(k, v); },
       [](const C& c) { return std::to_string(c.clusters); }},
      {{"kmeans.max_iter", "Lloyd iteration cap"}, true,
       [](C& c, const S& k, const S& v) { c.kmeans_max_iter = to_size(k, v); },
       [](const C& c) { return std::to_string(c.kmeans_max_iter); }},
      {{"kmeans.tol", "stop when no centroid moves more than this"}, true,
       [](C& c, const S& k, const S& v) { c.kmeans_tol = to_real(k, v); },
       [](const C& c) { return io::format_double(c.kmeans_tol); }},
      {{"kmeans.normalize", "L2-normalize embeddings before clustering"}, true,
       [](C& c, const S& k, const S& v) { c.kmeans_normalize = to_bool(k, v); },
       [](const C& c) { return std::string(c.kmeans_normalize ? "true" : "false"); }},
      {{"knn.k", "donors per missing joint"}, true,
       [](C& c, const S& k, const S& v) { c.neighbors = to_size(k, v); },
       [](const C& c) { return std::to_string(c.neighbors); }},
      {{"seed", "base seed for every stage"}, true,
       [](C& c, const S& k, const S& v) { c.seed = to_u64(k, v); },
       [](const C& c) { return std::to_string(c.seed); }},
      {{"occlusion.seed", "occlusion seed (default: seed)"}, true,
       [](C& c, const S& k, const S& v) { c.occlusion_seed = to_u64(k, v); },
       [](const C& c) { return std::to_string(c.occlusion_seed_value()); }},
      {{"kmeans.seed", "k-means++ seed (default: seed)"}, true,
       [](C& c, const S& k, const S& v) { c.kmeans_seed = to_u64(k, v); },
       [](const C& c) { return std::to_string(c.kmeans_seed_value()); }},
      {{"baseline.seed", "random-imputation baseline seed (default: seed)"}, true,
       [](C& c, const S& k, const S& v) { c.baseline_seed = to_u64(k, v); },
       [](const C& c) { return std::to_string(c.baseline_seed_value()); }},
      {{"threads", "worker threads (0 = all cores)"}, false,
       [](C& c, const S& k, const S& v) { c.threads = to_size(k, v); },
       [](const C& c) { return std::to_string(c.threads); }},
      {{"format", "dataset artifact format: skl1 | csv"}, true,
       [](C& c, const S&, const S& v) { c.format = v; }, [](const C& c) { return c.format; }},
  };
  return kBindings;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> kKeys = [] {
    std::vector<ConfigKey> out;
    for (const auto& b : bindings()) out.push_back(b.doc);
    return out;
  }();
  return kKeys;
}

void apply_config_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const auto& b : bindings()) {
    if (key == b.doc.key) {
      b.set(config, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void read_config(std::istream& in, PipelineConfig& config) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void read_config_file(const std::string& path, PipelineConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  read_config(in, config);
}

std::string config_to_text(const PipelineConfig& config) {
  std::string out;
  for (const auto& b : bindings()) {
    if (b.hashed) out += std::string(b.doc.key) + " = " + b.get(config) + "\n";
  }
  return out;
}

void validate_config(const PipelineConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (c.frames < 1) fail("frames must be >= 1");
  if (c.bodies < 1) fail("bodies must be >= 1");
  if (c.occlusion_mode != "random" && c.occlusion_mode != "joints" && c.occlusion_mode != "none") {
    fail("occlusion.mode must be random, joints or none");
  }
  if (!(c.occlusion_rate >= 0.0 && c.occlusion_rate <= 1.0)) fail("occlusion.rate must be in [0, 1]");
  if (!(c.occlusion_frame_fraction >= 0.0 && c.occlusion_frame_fraction <= 1.0)) {
    fail("occlusion.frame_fraction must be in [0, 1]");
  }
  if (c.occlusion_mode == "joints" && c.occlusion_joints.empty()) {
    fail("occlusion.joints must list at least one joint in joints mode");
  }
  if (c.embedding_source != "builtin" && c.embedding_source != "external") {
    fail("embedding.source must be builtin or external");
  }
  if (c.embedding_source == "external" && c.embedding_train.empty()) {
    fail("embedding.train is required for external embeddings");
  }
  if (c.clusters < 1) fail("kmeans.k must be >= 1");
  if (c.kmeans_max_iter < 1) fail("kmeans.max_iter must be >= 1");
  if (!(c.kmeans_tol >= 0.0)) fail("kmeans.tol must be >= 0");
  if (c.neighbors < 1) fail("knn.k must be >= 1");
  if (c.format != "skl1" && c.format != "csv") fail("format must be skl1 or csv");
  if (c.workdir.empty()) fail("workdir must not be empty");

  std::vector<std::string> paths = {c.input, c.test_input, c.graph, c.embedding_train,
                                    c.embedding_test, c.workdir};
  std::set<std::string> seen;
  for (const auto& p : paths) {
    if (p.empty()) continue;
    const std::string norm = fs::path(p).lexically_normal().string();
    if (!seen.insert(norm).second) fail("path '" + p + "' is used for more than one purpose");
  }
}

// ===========================================================================
// Stages

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kOcclude: return "occlude";
    case Stage::kEmbed: return "embed";
    case Stage::kCluster: return "cluster";
    case Stage::kImpute: return "impute";
    case Stage::kEval: return "eval";
    case Stage::kPipeline: return "pipeline";
  }
  return "?";
}

std::optional<Stage> stage_from_string(const std::string& name) {
  for (Stage s : {Stage::kIngest, Stage::kOcclude, Stage::kEmbed, Stage::kCluster, Stage::kImpute,
                  Stage::kEval, Stage::kPipeline}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

namespace {

constexpr std::uint64_t kTestSeedSalt = 0x5bd1e9955bd1e995ULL;

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string digest_path(const std::string& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = io::fnv1a("");
    for (const auto& f : files) {
      h = io::fnv1a(f.filename().string(), h);
      h = io::fnv1a(read_bytes(f), h);
    }
    return io::hex64(h);
  }
  return io::hex64(io::fnv1a(read_bytes(path)));
}

// Stage context: artifact lookup, writes and manifest bookkeeping.
class Run {
 public:
  Run(const PipelineConfig& config, Stage stage) : config_(config), stage_(stage) {
    fs::create_directories(config.workdir);
  }

  fs::path path(const std::string& name) const { return fs::path(config_.workdir) / name; }
  bool exists(const std::string& name) const { return fs::exists(path(name)); }

  std::string require(const std::string& name, const char* produced_by) {
    if (!exists(name)) {
      throw MissingArtifact("missing artifact " + path(name).string() + " (run '" + produced_by +
                            "' first)");
    }
    note_input(name, path(name).string());
    return path(name).string();
  }

  void note_input(const std::string& name, const std::string& full) {
    inputs_.emplace_back(name, digest_path(full));
  }

  // Dataset artifacts: <stem>.<split>.skl1 or .csv.
  std::optional<std::string> find_dataset(const std::string& stem, Split split) const {
    for (const char* ext : {"skl1", "csv"}) {
      const std::string name = stem + "." + to_string(split) + "." + ext;
      if (exists(name)) return name;
    }
    return std::nullopt;
  }

  Dataset load_dataset(const std::string& stem, Split split, const char* produced_by) {
    auto name = find_dataset(stem, split);
    if (!name) {
      throw MissingArtifact("missing artifact " +
                            path(stem + "." + to_string(split) + "." + config_.format).string() +
                            " (run '" + produced_by + "' first)");
    }
    const std::string full = require(*name, produced_by);
    if (name->ends_with(".csv")) {
      std::ifstream in(full);
      return read_dataset_csv(in, split);
    }
    return read_skl1_file(full, split);
  }

  void save_dataset(const std::string& stem, const Dataset& ds) {
    const std::string name = stem + "." + to_string(ds.split) + "." + config_.format;
    // Drop a stale artifact in the other format so readers cannot pick it up.
    for (const char* ext : {"skl1", "csv"}) {
      const std::string other = stem + "." + to_string(ds.split) + "." + ext;
      if (other != name && exists(other)) fs::remove(path(other));
    }
    if (config_.format == "csv") {
      write_text(name, [&](std::ostream& out) { write_dataset_csv(out, ds); });
    } else {
      write_skl1_file(path(name).string(), ds);
      outputs_.push_back(name);
    }
  }

  void write_text(const std::string& name, const std::function<void(std::ostream&)>& fn) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw FormatError("cannot write " + path(name).string());
    fn(out);
    if (!out) throw FormatError("write failed for " + path(name).string());
    outputs_.push_back(name);
  }

  void wrote(const std::string& name) { outputs_.push_back(name); }

  void remove_if_exists(const std::string& name) {
    if (exists(name)) fs::remove(path(name));
  }

  StageOutcome finish(std::string summary_json = {}) {
    nlohmann::ordered_json m;
    m["stage"] = to_string(stage_);
    m["config_hash"] = io::hex64(io::fnv1a(config_to_text(config_)));
    m["seeds"] = {{"occlusion", config_.occlusion_seed_value()},
                  {"kmeans", config_.kmeans_seed_value()},
                  {"baseline", config_.baseline_seed_value()}};
    auto& ins = m["inputs"] = nlohmann::ordered_json::array();
    for (const auto& [name, digest] : inputs_) ins.push_back({{"name", name}, {"fnv1a64", digest}});
    auto& outs = m["outputs"] = nlohmann::ordered_json::array();
    for (const auto& name : outputs_) {
      outs.push_back({{"name", name}, {"fnv1a64", digest_path(path(name).string())}});
    }
    const std::string manifest = "manifest." + std::string(to_string(stage_)) + ".json";
    std::vector<std::string> artifacts = outputs_;
    write_text(manifest, [&](std::ostream& out) { out << m.dump(2) << "\n"; });
    artifacts.push_back(manifest);

    StageOutcome outcome;
    outcome.stage = stage_;
    outcome.artifacts = std::move(artifacts);
    if (summary_json.empty()) {
      nlohmann::ordered_json s;
      s["stage"] = to_string(stage_);
      s["artifacts"] = outcome.artifacts;
      summary_json = s.dump(2) + "\n";
    }
    outcome.summary_json = std::move(summary_json);
    return outcome;
  }

  const PipelineConfig& config() const { return config_; }

 private:
  const PipelineConfig& config_;
  Stage stage_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

SkeletonGraph load_graph(const PipelineConfig& config, std::size_t joints) {
  if (!config.graph.empty()) return read_edge_list_file(config.graph, joints);
  if (joints != kNtuJoints) {
    throw ConfigError("data has " + std::to_string(joints) +
                      " joints; supply a matching skeleton graph with 'graph'");
  }
  return SkeletonGraph::ntu25();
}

Dataset load_input(const PipelineConfig& config, const std::string& input, Split split) {
  const fs::path p(input);
  if (!fs::exists(p)) throw MissingArtifact("input " + input + " does not exist");
  const CanonicalOptions opts{config.frames, config.bodies};

  auto from_capture = [&](const fs::path& file) {
    try {
      const RawCapture raw = parse_ntu_skeleton_file(file.string());
      return to_canonical(raw, opts, file.stem().string(),
                          ntu_label_from_filename(file.filename().string()));
    } catch (const MalformedCapture& e) {
      throw MalformedCapture(e.line(), file.string() + ": " + e.what());
    } catch (const EmptyCapture& e) {
      throw EmptyCapture(file.string() + ": " + e.what());
    }
  };

  std::vector<SkeletonSequence> samples;
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".skeleton") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw MissingArtifact("no .skeleton files in " + input);
    samples.resize(files.size());
    parallel_for(files.size(), [&](std::size_t i) { samples[i] = from_capture(files[i]); });
    return Dataset(std::move(samples), split);
  }
  if (p.extension() == ".skeleton") {
    samples.push_back(from_capture(p));
    return Dataset(std::move(samples), split);
  }
  if (p.extension() == ".skl1") return read_skl1_file(input, split);
  if (p.extension() == ".csv") {
    std::ifstream in(input);
    return read_dataset_csv(in, split);
  }
  throw ConfigError("unrecognized input '" + input + "' (expected a directory, .skeleton, .skl1 or .csv)");
}

bool has_test_split(Run& run, const std::string& stem) {
  return run.find_dataset(stem, Split::kTest).has_value();
}

// ---------------------------------------------------------------------------

StageOutcome stage_ingest(const PipelineConfig& config) {
  Run run(config, Stage::kIngest);
  if (config.input.empty()) throw ConfigError("'input' is required for ingest");

  std::set<std::string> ids;
  std::size_t untranslated = 0;
  std::vector<std::pair<std::string, Split>> inputs = {{config.input, Split::kTrain}};
  if (!config.test_input.empty()) {
    inputs.emplace_back(config.test_input, Split::kTest);
  } else {
    run.remove_if_exists("clean.test.skl1");
    run.remove_if_exists("clean.test.csv");
  }

  for (const auto& [input, split] : inputs) {
    Dataset ds = load_input(config, input, split);
    run.note_input(input, input);
    if (ds.empty()) throw FormatError("input " + input + " holds no samples");
    const Shape shape = ds.shape();
    if (config.joints != 0 && shape.joints != config.joints) {
      throw ConfigError("input " + input + " has " + std::to_string(shape.joints) +
                        " joints, config expects " + std::to_string(config.joints));
    }
    if (config.center_joint >= shape.joints) {
      throw ConfigError("center_joint " + std::to_string(config.center_joint) + " outside [0, " +
                        std::to_string(shape.joints) + ")");
    }
    for (auto& s : ds.samples) {
      if (!ids.insert(s.sample_id()).second) {
        throw FormatError("duplicate sample id '" + s.sample_id() + "'");
      }
      RelativeResult rel = preprocess_relative(s, config.center_joint);
      untranslated += rel.untranslated_frames;
      s = std::move(rel.sequence);
    }
    ds.refresh_masks();
    run.save_dataset("clean", ds);
  }

  nlohmann::ordered_json summary;
  summary["stage"] = "ingest";
  summary["samples"] = ids.size();
  summary["untranslated_frames"] = untranslated;
  return run.finish(summary.dump(2) + "\n");
}

StageOutcome stage_occlude(const PipelineConfig& config) {
  Run run(config, Stage::kOcclude);
  std::vector<Split> splits = {Split::kTrain};
  if (has_test_split(run, "clean")) splits.push_back(Split::kTest);
  else run.remove_if_exists("occlusion.test.csv");

  for (Split split : splits) {
    const Dataset clean = run.load_dataset("clean", split, "ingest");
    std::uint64_t seed = config.occlusion_seed_value();
    if (split == Split::kTest) seed ^= kTestSeedSalt;

    OcclusionResult occluded{clean, {}};
    if (config.occlusion_mode == "random") {
      occluded = occlude_random(clean, config.occlusion_rate, seed);
    } else if (config.occlusion_mode == "joints") {
      occluded = occlude_joints(clean, config.occlusion_joints, config.occlusion_frame_fraction, seed);
    }
    occluded.dataset.split = split;
    run.save_dataset("occluded", occluded.dataset);
    run.write_text(std::string("occlusion.") + to_string(split) + ".csv",
                   [&](std::ostream& out) { write_occlusion_csv(out, occluded.record); });
  }
  return run.finish();
}

StageOutcome stage_embed(const PipelineConfig& config) {
  Run run(config, Stage::kEmbed);
  std::vector<Split> splits = {Split::kTrain};
  if (has_test_split(run, "occluded")) splits.push_back(Split::kTest);
  else run.remove_if_exists("embeddings.test.skemb");

  for (Split split : splits) {
    const Dataset ds = run.load_dataset("occluded", split, "occlude");
    const std::string name = std::string("embeddings.") + to_string(split) + ".skemb";
    EmbeddingMatrix e;
    if (config.embedding_source == "builtin") {
      e = embed_baseline(ds, load_graph(config, ds.shape().joints));
    } else {
      const std::string& src = split == Split::kTrain ? config.embedding_train : config.embedding_test;
      if (src.empty()) throw ConfigError("embedding.test is required when a test split exists");
      if (!fs::exists(src)) throw MissingArtifact("missing embedding file " + src);
      run.note_input(src, src);
      e = align_embeddings(load_embeddings_file(src), ds.ids());
    }
    save_embeddings_file(run.path(name).string(), e);
    run.wrote(name);
  }
  return run.finish();
}

StageOutcome stage_cluster(const PipelineConfig& config) {
  Run run(config, Stage::kCluster);
  auto prepare = [&](const EmbeddingMatrix& e) {
    return config.kmeans_normalize ? l2_normalize_rows(e) : e;
  };
  const EmbeddingMatrix train = prepare(load_embeddings_file(run.require("embeddings.train.skemb", "embed")));
  KMeansOptions opts;
  opts.clusters = config.clusters;
  opts.seed = config.kmeans_seed_value();
  opts.max_iter = config.kmeans_max_iter;
  opts.tol = config.kmeans_tol;
  const KMeansResult fit = kmeans_fit(train, opts);

  save_cluster_model_file(run.path("model.skkm").string(), fit.model);
  run.wrote("model.skkm");
  run.write_text("labels.train.csv", [&](std::ostream& out) { write_labels_csv(out, fit.labels); });
  if (run.exists("embeddings.test.skemb")) {
    const EmbeddingMatrix test = prepare(load_embeddings_file(run.require("embeddings.test.skemb", "embed")));
    const PseudoLabels labels = kmeans_predict(fit.model, test);
    run.write_text("labels.test.csv", [&](std::ostream& out) { write_labels_csv(out, labels); });
  } else {
    run.remove_if_exists("labels.test.csv");
  }

  nlohmann::ordered_json summary;
  summary["stage"] = "cluster";
  summary["clusters"] = fit.model.clusters;
  summary["inertia"] = fit.model.inertia;
  summary["iterations"] = fit.model.iterations_run;
  summary["converged"] = fit.model.converged;
  return run.finish(summary.dump(2) + "\n");
}

PseudoLabels load_labels(Run& run, const std::string& name) {
  std::ifstream in(run.require(name, "cluster"));
  return read_labels_csv(in);
}

StageOutcome stage_impute(const PipelineConfig& config) {
  Run run(config, Stage::kImpute);
  const Dataset train = run.load_dataset("occluded", Split::kTrain, "occlude");
  const PseudoLabels train_labels = load_labels(run, "labels.train.csv");
  std::optional<Dataset> test;
  std::optional<PseudoLabels> test_labels;
  if (has_test_split(run, "occluded")) {
    test = run.load_dataset("occluded", Split::kTest, "occlude");
    test_labels = load_labels(run, "labels.test.csv");
  } else {
    run.remove_if_exists("imputed.test.skl1");
    run.remove_if_exists("imputed.test.csv");
  }

  ImputeOptions opts;
  opts.neighbors = config.neighbors;
  ImputationResult result = impute_dataset(train, test ? &*test : nullptr, train_labels,
                                           test_labels ? &*test_labels : nullptr, opts);
  run.save_dataset("imputed", result.train);
  if (result.test) run.save_dataset("imputed", *result.test);
  const std::string report = report_to_json(result.report);
  run.write_text("imputation_report.json", [&](std::ostream& out) { out << report; });

  nlohmann::ordered_json summary;
  summary["stage"] = "impute";
  summary["coordinates_missing"] = result.report.coordinates_missing;
  summary["coordinates_imputed"] = result.report.coordinates_imputed;
  summary["coordinates_unimputable"] = result.report.coordinates_unimputable;
  return run.finish(summary.dump(2) + "\n");
}

StageOutcome stage_eval(const PipelineConfig& config) {
  Run run(config, Stage::kEval);
  std::vector<Split> splits = {Split::kTrain};
  if (has_test_split(run, "imputed")) splits.push_back(Split::kTest);

  Dataset imputed_all, random_all;
  OcclusionRecord record_all;
  PseudoLabels pseudo_all;
  bool have_pseudo = true;
  for (Split split : splits) {
    const std::string sp = to_string(split);
    Dataset imputed = run.load_dataset("imputed", split, "impute");
    const Dataset occluded = run.load_dataset("occluded", split, "occlude");
    std::ifstream rec_in(run.require("occlusion." + sp + ".csv", "occlude"));
    const OcclusionRecord record = read_occlusion_csv(rec_in);
    std::uint64_t seed = config.baseline_seed_value();
    if (split == Split::kTest) seed ^= kTestSeedSalt;
    Dataset random = impute_random_baseline(occluded, seed);

    for (auto& s : imputed.samples) imputed_all.samples.push_back(std::move(s));
    for (auto& s : random.samples) random_all.samples.push_back(std::move(s));
    for (const auto& r : record.samples) record_all.samples.push_back(r);
    if (run.exists("labels." + sp + ".csv")) {
      const PseudoLabels p = load_labels(run, "labels." + sp + ".csv");
      pseudo_all.labels.insert(pseudo_all.labels.end(), p.labels.begin(), p.labels.end());
      pseudo_all.sample_ids.insert(pseudo_all.sample_ids.end(), p.sample_ids.begin(), p.sample_ids.end());
    } else {
      have_pseudo = false;
    }
  }
  imputed_all.refresh_masks();
  random_all.refresh_masks();

  const EvalReport report = evaluate(imputed_all, random_all, record_all, have_pseudo ? &pseudo_all : nullptr);
  const std::string json = eval_report_to_json(report);
  run.write_text("eval_report.json", [&](std::ostream& out) { out << json; });
  run.write_text("eval_report.csv", [&](std::ostream& out) {
    out << eval_report_csv_header() << eval_report_csv_row(report);
  });
  return run.finish(json);
}

}  // namespace

StageOutcome run_stage(const PipelineConfig& config, Stage stage) {
  validate_config(config);
  set_thread_count(config.threads);
  switch (stage) {
    case Stage::kIngest: return stage_ingest(config);
    case Stage::kOcclude: return stage_occlude(config);
    case Stage::kEmbed: return stage_embed(config);
    case Stage::kCluster: return stage_cluster(config);
    case Stage::kImpute: return stage_impute(config);
    case Stage::kEval: return stage_eval(config);
    case Stage::kPipeline: break;
  }

  StageOutcome all;
  all.stage = Stage::kPipeline;
  for (Stage s : {Stage::kIngest, Stage::kOcclude, Stage::kEmbed, Stage::kCluster, Stage::kImpute,
                  Stage::kEval}) {
    StageOutcome one = run_stage(config, s);
    all.artifacts.insert(all.artifacts.end(), one.artifacts.begin(), one.artifacts.end());
    all.summary_json = std::move(one.summary_json);
  }
  return all;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const KTooLarge*>(&e)) return 2;
  if (dynamic_cast<const MissingArtifact*>(&e)) return 3;
  if (dynamic_cast<const Error*>(&e)) return 4;
  return 1;
}

}  // namespace skelfill
