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

#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "trailerness/error.hpp"
#include "trailerness/eval.hpp"
#include "trailerness/features.hpp"
#include "trailerness/fusion.hpp"
#include "trailerness/hashmatch.hpp"
#include "trailerness/image.hpp"
#include "trailerness/labels_io.hpp"
#include "trailerness/timeline.hpp"
#include "trailerness/train.hpp"
#include "trailerness_tools/pipeline.hpp"

namespace trailerness::tools {

namespace {

using json = nlohmann::json;

void require(const fs::path& path, const std::string& stage, const std::string& what) {
  if (path.empty()) throw MissingArtifact(stage, what);
  if (!fs::exists(path)) throw MissingArtifact(stage, path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

VideoTimeline load_timeline(const EpisodeEntry& ep, double fps, double shot_threshold) {
  if (!ep.shot_cuts.empty()) {
    require(ep.shot_cuts, "synth", ep.id + " shot cuts");
    return make_timeline(ep.frame_count, shots_from_cuts(read_shot_cuts(ep.shot_cuts), ep.frame_count),
                         ShotSource::kIngested, fps);
  }
  require(ep.frames_dir, "synth", ep.id + " shot cuts or frames");
  const auto frames = read_frame_directory(ep.frames_dir);
  if (static_cast<std::int64_t>(frames.size()) != ep.frame_count) {
    throw FormatError(ep.id + ": " + std::to_string(frames.size()) + " frames on disk, manifest says " +
                      std::to_string(ep.frame_count));
  }
  return make_timeline(ep.frame_count, detect_shots_naive(frames, shot_threshold),
                       ShotSource::kNaiveDetector, fps);
}

FeatureSequence load_stream_features(const EpisodeEntry& ep, StreamTag stream,
                                     const VideoTimeline& timeline) {
  const auto name = stream_name(stream);
  const auto it = ep.features.find(name);
  require(it == ep.features.end() ? fs::path{} : it->second, "synth", ep.id + " " + name + " features");
  return load_features(it->second, timeline, stream.scale);
}

LabelTrack load_labels(const OutputLayout& layout, const EpisodeEntry& ep) {
  const auto path = layout.labels(ep.id);
  require(path, "labels", ep.id + " labels");
  auto labels = read_label_runs(path);
  if (static_cast<std::int64_t>(labels.size()) != ep.frame_count) {
    throw FormatError(path.string() + ": label count differs from frame_count");
  }
  return labels;
}

std::vector<const EpisodeEntry*> in_split(const DatasetManifest& m, Split split) {
  std::vector<const EpisodeEntry*> out;
  for (const auto& ep : m.episodes) {
    if (ep.split == split) out.push_back(&ep);
  }
  return out;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// is rethrown after all threads finish.
void run_jobs(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::jthread> threads;
  for (std::size_t t = 1; t < count; ++t) threads.emplace_back(worker);
  worker();
  threads.clear();
  if (error) std::rethrow_exception(error);
}

bool g_progress = true;

std::mutex& print_mutex() {
  static std::mutex m;
  return m;
}

template <typename... Args>
void say(const char* format, Args... args) {
  if (!g_progress) return;
  std::lock_guard lock(print_mutex());
  if constexpr (sizeof...(Args) == 0) {
    std::fputs(format, stdout);
  } else {
    std::printf(format, args...);
  }
  std::fflush(stdout);
}

std::vector<fs::path> feature_inputs(const DatasetManifest& m, StreamTag stream) {
  std::vector<fs::path> out;
  for (const auto& ep : m.episodes) {
    const auto it = ep.features.find(stream_name(stream));
    if (it != ep.features.end()) out.push_back(it->second);
  }
  return out;
}

std::uint64_t stream_index(StreamTag stream) {
  return static_cast<std::uint64_t>(stream.modality) * 2 + static_cast<std::uint64_t>(stream.scale);
}

}  // namespace

void set_progress_output(bool enabled) { g_progress = enabled; }

fs::path cmd_synth(const SynthOptions& options, const fs::path& out_dir) {
  const auto dataset = synth_dataset(options.config, options.n_episodes, options.seed);
  fs::create_directories(out_dir);
  DatasetManifest manifest;
  manifest.fps = options.config.fps;
  for (std::size_t i = 0; i < dataset.episodes.size(); ++i) {
    const auto& ep = dataset.episodes[i];
    const auto dir = out_dir / "episodes" / ep.id;
    fs::create_directories(dir / "features");
    EpisodeEntry entry;
    entry.id = ep.id;
    entry.split = dataset.splits[i];
    entry.frame_count = ep.timeline.frame_count;
    if (options.config.render_frames) {
      entry.frames_dir = dir / "frames";
      entry.trailer_dir = dir / "trailer";
      fs::remove_all(entry.frames_dir);
      fs::remove_all(entry.trailer_dir);
      write_frame_directory(entry.frames_dir, ep.frames);
      write_frame_directory(entry.trailer_dir, ep.trailer_frames);
    } else {
      // Without frames the planted labels stand in for the editor labels.
      entry.editor_labels = dir / "planted_labels.jsonl";
    }
    entry.shot_cuts = dir / "shot_cuts.json";
    write_shot_cuts(entry.shot_cuts, cuts_from_shots(ep.timeline.shot_bounds));
    entry.subtitles = dir / "subtitles.jsonl";
    write_subtitles_jsonl(entry.subtitles, ep.subtitles);
    entry.planted_labels = dir / "planted_labels.jsonl";
    write_label_runs(entry.planted_labels, ep.planted);
    for (const auto& tag : all_streams()) {
      const auto path = dir / "features" / (stream_name(tag) + ".trlf");
      save_features(path, ep.features(tag));
      entry.features[stream_name(tag)] = path;
    }
    manifest.episodes.push_back(std::move(entry));
  }
  const auto manifest_path = out_dir / "manifest.json";
  write_manifest(manifest_path, manifest);
  const auto& c = options.config;
  const json log{{"stage", "synth"},
                 {"config",
                  {{"episodes", options.n_episodes},
                   {"seed", options.seed},
                   {"n_frames", c.n_frames},
                   {"n_shots", c.n_shots},
                   {"trailer_fraction", c.trailer_fraction},
                   {"signal_strength", c.signal_strength},
                   {"noise_rate", c.noise_rate},
                   {"d_visual", c.d_visual},
                   {"d_text", c.d_text},
                   {"frame_width", c.frame_width},
                   {"frame_height", c.frame_height},
                   {"segment_len", c.segment_len},
                   {"fps", c.fps},
                   {"render_frames", c.render_frames}}},
                 {"outputs", {{{"path", "manifest.json"}, {"sha256", sha256_path(manifest_path)}}}}};
  write_text(out_dir / "logs" / "synth.json", log.dump(2) + "\n");
  const auto counts = split_counts(options.n_episodes);
  say("synth: %zu episodes (train %zu, val %zu, test %zu) -> %s\n", options.n_episodes,
      counts.train, counts.validation, counts.test, manifest_path.string().c_str());
  return manifest_path;
}

void cmd_labels(const RunConfig& config) {
  config.validate();
  const auto manifest = read_manifest(config.manifest);
  const OutputLayout layout{config.output_dir};
  std::vector<fs::path> inputs{config.manifest};
  std::vector<fs::path> outputs;
  std::atomic<std::int64_t> agree{0}, planted_total{0};
  for (const auto& ep : manifest.episodes) {
    LabelTrack labels;
    if (!ep.frames_dir.empty() || ep.editor_labels.empty()) {
      require(ep.frames_dir, "synth", ep.id + " frames");
      require(ep.trailer_dir, "synth", ep.id + " trailer frames");
      const auto frames = hash_frames(read_frame_directory(ep.frames_dir));
      const auto trailer = hash_frames(read_frame_directory(ep.trailer_dir));
      const auto table = min_distance_table_mih(frames, trailer, config.tau,
                                                static_cast<unsigned>(config.workers));
      labels = label_frames(table, config.tau);
      inputs.push_back(ep.frames_dir);
      inputs.push_back(ep.trailer_dir);
    } else {
      require(ep.editor_labels, "synth", ep.id + " editor labels");
      labels = read_label_runs(ep.editor_labels);
      inputs.push_back(ep.editor_labels);
    }
    if (static_cast<std::int64_t>(labels.size()) != ep.frame_count) {
      throw FormatError(ep.id + ": " + std::to_string(labels.size()) +
                        " labeled frames, manifest says " + std::to_string(ep.frame_count));
    }
    if (!ep.planted_labels.empty() && fs::exists(ep.planted_labels)) {
      const auto planted = read_label_runs(ep.planted_labels);
      for (std::size_t f = 0; f < planted.size() && f < labels.size(); ++f) {
        agree += planted.labels[f] == labels.labels[f];
      }
      planted_total += static_cast<std::int64_t>(planted.size());
    }
    const auto path = layout.labels(ep.id);
    fs::create_directories(path.parent_path());
    write_label_runs(path, labels);
    outputs.push_back(path);
  }
  write_stage_log(layout.stage_log("labels"), "labels", config, inputs, outputs);
  say("labels: %zu episodes labeled at tau=%d", manifest.episodes.size(), config.tau);
  if (planted_total > 0) {
    say(" (frame agreement with planted labels %.4f)",
        static_cast<double>(agree) / static_cast<double>(planted_total));
  }
  say("\n");
}

void cmd_train(const RunConfig& config) {
  config.validate();
  const auto manifest = read_manifest(config.manifest);
  const OutputLayout layout{config.output_dir};
  std::vector<fs::path> inputs{config.manifest};
  std::vector<fs::path> outputs;
  if (config.model == ModelChoice::kRandom) {
    write_stage_log(layout.stage_log("train"), "train", config, inputs, outputs);
    say("train: random baseline needs no training\n");
    return;
  }
  struct StreamData {
    std::vector<VideoSample> train;
    std::vector<VideoSample> validation;
  };
  std::vector<StreamData> data;
  for (const auto& stream : config.streams) {
    StreamData d;
    const bool normalize = config.config_for(stream, 0).normalize_features;
    for (const auto& ep : manifest.episodes) {
      if (ep.split == Split::kTest) continue;
      const auto timeline = load_timeline(ep, manifest.fps, config.shot_threshold);
      auto sample = make_sample(ep.id, load_stream_features(ep, stream, timeline),
                                load_labels(layout, ep), timeline, stream.scale, normalize);
      (ep.split == Split::kTrain ? d.train : d.validation).push_back(std::move(sample));
    }
    data.push_back(std::move(d));
    for (const auto& p : feature_inputs(manifest, stream)) inputs.push_back(p);
  }
  for (const auto& ep : manifest.episodes) {
    if (ep.split != Split::kTest) inputs.push_back(layout.labels(ep.id));
  }
  const std::size_t n_jobs = config.streams.size() * config.seeds.size();
  run_jobs(n_jobs, config.workers, [&](std::size_t job) {
    const auto s = job / config.seeds.size();
    const auto stream = config.streams[s];
    const auto seed = config.seeds[job % config.seeds.size()];
    const auto stream_config = config.config_for(stream, seed);
    const auto result = config.model == ModelChoice::kMlp
                            ? train_mlp_baseline(data[s].train, data[s].validation, stream_config)
                            : train_stream(data[s].train, data[s].validation, stream_config);
    fs::create_directories(layout.model_dir(stream, seed));
    save_checkpoint(layout.model(stream, seed), result.model);
    write_history_csv(layout.model_dir(stream, seed) / "history.csv", result.history);
    const auto& last = result.history.back();
    say("train: %s seed %llu: %zu epochs, kept epoch %d, last loss %.5f, val F1 %.4f\n",
        stream_name(stream).c_str(), static_cast<unsigned long long>(seed),
        result.history.size(), result.best_epoch, last.train_loss, last.val_f1);
  });
  for (const auto& stream : config.streams) {
    for (const auto seed : config.seeds) {
      outputs.push_back(layout.model(stream, seed));
      outputs.push_back(layout.model_dir(stream, seed) / "history.csv");
    }
  }
  write_stage_log(layout.stage_log("train"), "train", config, inputs, outputs);
}

void cmd_predict(const RunConfig& config) {
  config.validate();
  const auto manifest = read_manifest(config.manifest);
  const OutputLayout layout{config.output_dir};
  const auto test = in_split(manifest, Split::kTest);
  if (test.empty()) throw InvalidInput("predict: the manifest has no test episodes");
  std::vector<fs::path> inputs{config.manifest};
  std::vector<fs::path> outputs;
  for (const auto& stream : config.streams) {
    for (const auto seed : config.seeds) {
      StreamModel model;
      const bool random = config.model == ModelChoice::kRandom;
      if (!random) {
        require(layout.model(stream, seed), "train", stream_name(stream) + " model");
        model = load_checkpoint(layout.model(stream, seed));
        inputs.push_back(layout.model(stream, seed));
      }
      for (std::size_t e = 0; e < test.size(); ++e) {
        const auto& ep = *test[e];
        const auto timeline = load_timeline(ep, manifest.fps, config.shot_threshold);
        auto features = load_stream_features(ep, stream, timeline);
        ScoreTrack scores;
        if (random) {
          scores = random_baseline(features.count,
                                   derive_seed(derive_seed(seed, stream_index(stream)), e),
                                   features.granularity);
        } else {
          if (static_cast<int>(features.dim) != model.input_dim()) {
            throw InvalidInput(ep.id + ": " + stream_name(stream) + " features have dimension " +
                               std::to_string(features.dim) + ", model expects " +
                               std::to_string(model.input_dim()));
          }
          if (model.config().normalize_features) l2_normalize_rows(features);
          scores = forward(model, features);
        }
        const auto frames = upsample_to_frames(scores, timeline.bounds(stream.scale),
                                               ep.frame_count, {stream});
        const auto path = layout.prediction(stream, seed, ep.id);
        fs::create_directories(path.parent_path());
        save_frame_scores(path, frames);
        outputs.push_back(path);
      }
    }
    for (const auto& p : feature_inputs(manifest, stream)) inputs.push_back(p);
  }
  write_stage_log(layout.stage_log("predict"), "predict", config, inputs, outputs);
  say("predict: %zu streams x %zu seeds over %zu test episodes\n", config.streams.size(),
      config.seeds.size(), test.size());
}

void cmd_fuse(const RunConfig& config) {
  config.validate();
  const auto manifest = read_manifest(config.manifest);
  const OutputLayout layout{config.output_dir};
  const auto test = in_split(manifest, Split::kTest);
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  for (const auto& subset : config.effective_subsets()) {
    for (const auto seed : config.seeds) {
      for (const auto* ep : test) {
        std::vector<FrameScoreTrack> tracks;
        for (const auto& stream : subset) {
          const auto path = layout.prediction(stream, seed, ep->id);
          require(path, "predict", stream_name(stream) + " predictions");
          tracks.push_back(load_frame_scores(path));
          inputs.push_back(path);
        }
        const auto path = layout.fused(subset, seed, ep->id);
        fs::create_directories(path.parent_path());
        save_frame_scores(path, fuse(tracks));
        outputs.push_back(path);
      }
    }
  }
  std::sort(inputs.begin(), inputs.end());
  inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
  write_stage_log(layout.stage_log("fuse"), "fuse", config, inputs, outputs);
  say("fuse: %zu stream subsets\n", config.effective_subsets().size());
}

std::vector<EvalReport> cmd_eval(const RunConfig& config) {
  config.validate();
  const auto manifest = read_manifest(config.manifest);
  const OutputLayout layout{config.output_dir};
  const auto test = in_split(manifest, Split::kTest);
  const double threshold = config.stream_config.threshold;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::vector<LabelTrack> gold;
  for (const auto* ep : test) {
    gold.push_back(load_labels(layout, *ep));
    inputs.push_back(layout.labels(ep->id));
  }
  std::vector<EvalReport> reports;
  for (const auto& subset : config.effective_subsets()) {
    std::vector<SeedResult> runs;
    const auto dir = layout.eval_dir(subset);
    for (std::size_t k = 0; k < config.seeds.size(); ++k) {
      const auto seed = config.seeds[k];
      Confusion pooled;
      for (std::size_t e = 0; e < test.size(); ++e) {
        const auto path = layout.fused(subset, seed, test[e]->id);
        require(path, "fuse", subset_name(subset) + " fused scores");
        const auto fused = load_frame_scores(path);
        inputs.push_back(path);
        pooled += confusion(binarize(fused, threshold), gold[e]);
        if (k == 0) {
          const auto plot = dir / "plots" / (test[e]->id + ".svg");
          write_text(plot, timeline_svg(test[e]->id + "  " + subset_name(subset) + "  seed " +
                                            std::to_string(seed),
                                        fused.scores, gold[e], threshold));
          outputs.push_back(plot);
        }
      }
      runs.push_back({seed, metrics_from(pooled)});
    }
    auto report = multi_seed_report(runs);
    for (const auto& s : subset) report.streams.push_back(stream_name(s));
    write_text(dir / "report.json", report_to_json(report) + "\n");
    outputs.push_back(dir / "report.json");
    say("eval: %-50s P %.4f  R %.4f  F1 %.4f +- %.4f\n", subset_name(subset).c_str(),
        report.mean.precision, report.mean.recall, report.mean.f1, report.std.f1);
    reports.push_back(std::move(report));
  }
  write_stage_log(layout.stage_log("eval"), "eval", config, inputs, outputs);
  return reports;
}

std::vector<EvalReport> cmd_grid(RunConfig config) {
  config.streams = all_streams();
  config.subsets = all_subsets();
  config.validate();
  cmd_labels(config);
  cmd_train(config);
  cmd_predict(config);
  cmd_fuse(config);
  auto reports = cmd_eval(config);
  const OutputLayout layout{config.output_dir};
  json all = json::array();
  std::string tsv = "streams\tprecision\trecall\tf1\tf1_std\n";
  char row[128];
  for (const auto& r : reports) {
    all.push_back(json::parse(report_to_json(r)));
    std::string names;
    for (const auto& s : r.streams) names += (names.empty() ? "" : "+") + s;
    std::snprintf(row, sizeof row, "\t%.6f\t%.6f\t%.6f\t%.6f\n", r.mean.precision,
                  r.mean.recall, r.mean.f1, r.std.f1);
    tsv += names + row;
  }
  write_text(layout.root / "grid" / "summary.json",
             json{{"model", model_choice_name(config.model)}, {"reports", all}}.dump(2) + "\n");
  write_text(layout.root / "grid" / "summary.tsv", tsv);
  return reports;
}

}  // namespace trailerness::tools
