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

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trailerness/error.hpp"
#include "trailerness_tools/pipeline.hpp"

namespace {

using namespace trailerness;
using namespace trailerness::tools;

// Flag values that override the --config file when given.
struct RunFlags {
  std::string config_path;
  std::optional<std::string> manifest;
  std::optional<std::string> output_dir;
  std::optional<int> tau;
  std::vector<std::string> streams;
  std::vector<std::string> subsets;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> model;
  std::optional<int> workers;
  std::optional<int> epochs;
  std::optional<int> d_k;
  std::optional<int> heads;
  std::optional<int> blocks;
  std::optional<int> mlp_hidden;
  std::optional<double> learning_rate;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> patience;
  std::optional<double> threshold;
  bool no_positional_encoding = false;
  bool normalize = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", f.manifest, "dataset manifest.json");
  cmd->add_option("--out", f.output_dir, "output directory for stage artifacts");
  cmd->add_option("--tau", f.tau, "Hamming distance threshold for label matching");
  cmd->add_option("--streams", f.streams, "streams to train/predict, e.g. visual_clip textual_shot");
  cmd->add_option("--subsets", f.subsets, "stream subsets to fuse/evaluate, e.g. visual_clip+textual_clip");
  cmd->add_option("--seeds", f.seeds, "training seeds");
  cmd->add_option("--model", f.model, "transformer, mlp or random")
      ->check(CLI::IsMember({"transformer", "mlp", "random"}));
  cmd->add_option("--workers", f.workers, "parallel (stream, seed) jobs");
  cmd->add_option("--epochs", f.epochs);
  cmd->add_option("--d-k", f.d_k);
  cmd->add_option("--heads", f.heads);
  cmd->add_option("--blocks", f.blocks);
  cmd->add_option("--mlp-hidden", f.mlp_hidden);
  cmd->add_option("--lr", f.learning_rate);
  cmd->add_option("--alpha", f.alpha);
  cmd->add_option("--gamma", f.gamma);
  cmd->add_option("--patience", f.patience, "early stopping patience, 0 disables");
  cmd->add_option("--threshold", f.threshold, "binarization threshold");
  cmd->add_flag("--no-pe", f.no_positional_encoding, "disable positional encoding");
  cmd->add_flag("--normalize", f.normalize, "L2-normalize feature rows");
}

RunConfig resolve_run_config(const RunFlags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
  if (f.model) {
    if (*f.model == "mlp" && c.model != ModelChoice::kMlp) {
      c.stream_config = StreamConfig::mlp_baseline_defaults();
    }
    c.model = *f.model == "mlp"      ? ModelChoice::kMlp
              : *f.model == "random" ? ModelChoice::kRandom
                                     : ModelChoice::kTransformer;
  }
  if (f.manifest) c.manifest = *f.manifest;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.tau) c.tau = *f.tau;
  if (f.workers) c.workers = *f.workers;
  if (!f.streams.empty()) {
    c.streams.clear();
    for (const auto& s : f.streams) {
      const auto tag = parse_stream_name(s);
      if (!tag) throw InvalidInput("unknown stream '" + s + "'");
      c.streams.push_back(*tag);
    }
  }
  if (!f.subsets.empty()) {
    c.subsets.clear();
    for (const auto& s : f.subsets) c.subsets.push_back(parse_subset_name(s));
  }
  if (!f.seeds.empty()) c.seeds = f.seeds;
  std::vector<StreamConfig*> targets{&c.stream_config};
  for (auto& [_, o] : c.stream_overrides) targets.push_back(&o);
  for (auto* sc : targets) {
    if (f.epochs) sc->n_epochs = *f.epochs;
    if (f.d_k) sc->d_k = *f.d_k;
    if (f.heads) sc->n_heads = *f.heads;
    if (f.blocks) sc->n_blocks = *f.blocks;
    if (f.mlp_hidden) sc->mlp_hidden = *f.mlp_hidden;
    if (f.learning_rate) sc->learning_rate = *f.learning_rate;
    if (f.alpha) sc->alpha = *f.alpha;
    if (f.gamma) sc->gamma = *f.gamma;
    if (f.patience) sc->patience = *f.patience;
    if (f.threshold) sc->threshold = *f.threshold;
    if (f.no_positional_encoding) sc->positional_encoding = false;
    if (f.normalize) sc->normalize_features = true;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trailerness: trailer-moment labels, stream scorers, fusion and evaluation"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  SynthOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset with planted trailers");
  synth_cmd->add_option("--out", synth_out, "dataset directory")->required();
  synth_cmd->add_option("--episodes", synth.n_episodes)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--frames", synth.config.n_frames, "frames per episode")->capture_default_str();
  synth_cmd->add_option("--shots", synth.config.n_shots, "shots per episode")->capture_default_str();
  synth_cmd->add_option("--trailer-fraction", synth.config.trailer_fraction)->capture_default_str();
  synth_cmd->add_option("--signal", synth.config.signal_strength)->capture_default_str();
  synth_cmd->add_option("--noise", synth.config.noise_rate, "salt-and-pepper rate on trailer frames")
      ->capture_default_str();
  synth_cmd->add_option("--d-visual", synth.config.d_visual)->capture_default_str();
  synth_cmd->add_option("--d-text", synth.config.d_text)->capture_default_str();
  synth_cmd->add_option("--width", synth.config.frame_width)->capture_default_str();
  synth_cmd->add_option("--height", synth.config.frame_height)->capture_default_str();
  synth_cmd->add_option("--segment-len", synth.config.segment_len)->capture_default_str();
  bool no_frames = false;
  synth_cmd->add_flag("--no-frames", no_frames,
                      "skip frame rendering; planted labels become the editor labels");

  RunFlags flags;
  struct Stage {
    const char* name;
    const char* help;
  };
  const std::vector<Stage> stages{
      {"labels", "hash-match trailers against episodes to produce frame labels"},
      {"train", "train stream scorers for every (stream, seed)"},
      {"predict", "score test episodes and upsample to frames"},
      {"fuse", "average frame scores over stream subsets"},
      {"eval", "precision/recall/F1 over seeds, with timeline plots"},
      {"grid", "run every stage over all 15 stream subsets"},
  };
  std::vector<CLI::App*> stage_cmds;
  for (const auto& s : stages) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_run_flags(cmd, flags);
    stage_cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::kInvalidInput);
  }
  set_warnings_enabled(!quiet);

  try {
    if (synth_cmd->parsed()) {
      synth.config.render_frames = !no_frames;
      cmd_synth(synth, synth_out);
      return 0;
    }
    const auto config = resolve_run_config(flags);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "labels") cmd_labels(config);
    if (name == "train") cmd_train(config);
    if (name == "predict") cmd_predict(config);
    if (name == "fuse") cmd_fuse(config);
    if (name == "eval") cmd_eval(config);
    if (name == "grid") cmd_grid(config);
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "trailerness: %s error: %s\n", category_name(e.category()), e.what());
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "trailerness: %s\n", e.what());
    return 1;
  }
}
