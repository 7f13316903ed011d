/*
 * Copyright 2026 The Trailerness Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TRAILERNESS_TOOLS_PIPELINE_HPP_
#define TRAILERNESS_TOOLS_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trailerness/eval.hpp"
#include "trailerness/model.hpp"
#include "trailerness/synth.hpp"
#include "trailerness/types.hpp"

namespace trailerness::tools {

namespace fs = std::filesystem;

// One video of a dataset. Paths are absolute once loaded; empty paths mean
// the artifact is not part of the dataset.
struct EpisodeEntry {
  std::string id;
  Split split = Split::kTrain;
  std::int64_t frame_count = 0;
  fs::path frames_dir;
  fs::path trailer_dir;
  fs::path shot_cuts;
  fs::path subtitles;
  fs::path planted_labels;  // synthetic ground truth, for diagnostics only
  fs::path editor_labels;   // user-supplied labels when no frames exist
  std::map<std::string, fs::path> features;  // keyed by stream name
};

struct DatasetManifest {
  double fps = kDefaultFps;
  std::vector<EpisodeEntry> episodes;
};

// Relative paths in the file are resolved against its directory.
DatasetManifest read_manifest(const fs::path& path);
// Paths are written relative to the manifest's directory when possible.
void write_manifest(const fs::path& path, const DatasetManifest& manifest);

enum class ModelChoice { kTransformer, kMlp, kRandom };

const char* model_choice_name(ModelChoice choice);

using StreamSubset = std::vector<StreamTag>;

std::string subset_name(const StreamSubset& subset);
StreamSubset parse_subset_name(const std::string& name);
// The 15 non-empty subsets of the four streams: singles, pairs, triples,
// then all four.
std::vector<StreamSubset> all_subsets();

struct RunConfig {
  fs::path manifest;
  fs::path output_dir = "trailerness_out";
  int tau = 10;
  double shot_threshold = kSynthCutThreshold;  // when shot_cuts are absent
  std::vector<StreamTag> streams = all_streams();
  std::vector<StreamSubset> subsets;  // empty: every stream fused as one
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  ModelChoice model = ModelChoice::kTransformer;
  int workers = 1;
  StreamConfig stream_config;
  std::map<std::string, StreamConfig> stream_overrides;

  StreamConfig config_for(StreamTag stream, std::uint64_t seed) const;
  std::vector<StreamSubset> effective_subsets() const;
  void validate() const;
};

// Fields absent from the JSON keep their defaults.
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const fs::path& path);
std::string run_config_to_json(const RunConfig& config);

// Artifact layout under RunConfig::output_dir.
struct OutputLayout {
  fs::path root;

  fs::path labels(const std::string& episode) const;
  fs::path model_dir(StreamTag stream, std::uint64_t seed) const;
  fs::path model(StreamTag stream, std::uint64_t seed) const;
  fs::path prediction(StreamTag stream, std::uint64_t seed,
                      const std::string& episode) const;
  fs::path fused(const StreamSubset& subset, std::uint64_t seed,
                 const std::string& episode) const;
  fs::path eval_dir(const StreamSubset& subset) const;
  fs::path stage_log(const std::string& stage) const;
};

// Hex SHA-256 of a file, or of a directory's sorted (name, content) pairs.
std::string sha256_path(const fs::path& path);

// Stage log: the stage name, the echoed config, input digests, outputs and
// a UTC timestamp. Everything but the timestamp is a function of the inputs.
void write_stage_log(const fs::path& path, const std::string& stage,
                     const RunConfig& config,
                     const std::vector<fs::path>& inputs,
                     const std::vector<fs::path>& outputs);

struct SynthOptions {
  SynthConfig config;
  std::size_t n_episodes = 63;
  std::uint64_t seed = 0;
};

// Writes frames, features, subtitles, shot cuts and planted labels per
// episode plus manifest.json. Returns the manifest path.
fs::path cmd_synth(const SynthOptions& options, const fs::path& out_dir);

// Per-stage progress lines on stdout; on by default.
void set_progress_output(bool enabled);

void cmd_labels(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_fuse(const RunConfig& config);
// Returns one report per effective subset.
std::vector<EvalReport> cmd_eval(const RunConfig& config);
// labels, train and predict for all four streams, then fuse and eval for
// all 15 subsets. Writes grid/summary.json and grid/summary.tsv.
std::vector<EvalReport> cmd_grid(RunConfig config);

// Fused score polyline over shaded editor-label runs.
std::string timeline_svg(const std::string& title,
                         std::span<const double> scores,
                         const LabelTrack& labels, double threshold);

}  // namespace trailerness::tools

#endif  // TRAILERNESS_TOOLS_PIPELINE_HPP_
