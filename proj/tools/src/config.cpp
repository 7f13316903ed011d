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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "trailerness/error.hpp"
#include "trailerness_tools/pipeline.hpp"

namespace trailerness::tools {

using json = nlohmann::json;

namespace {

std::string read_text(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve(const fs::path& base, const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  const fs::path p = j.at(key).get<std::string>();
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

std::string relative_to(const fs::path& base, const fs::path& p) {
  if (p.empty()) return {};
  const auto rel = p.lexically_relative(base);
  return (rel.empty() || *rel.begin() == "..") ? p.string() : rel.generic_string();
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw FormatError("unknown split '" + name + "'");
}

StreamTag stream_or_throw(const std::string& name) {
  const auto tag = parse_stream_name(name);
  if (!tag) throw InvalidInput("unknown stream '" + name + "'");
  return *tag;
}

void apply_stream_config(const json& j, StreamConfig& c) {
  c.d_k = j.value("d_k", c.d_k);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.n_blocks = j.value("n_blocks", c.n_blocks);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  c.alpha = j.value("alpha", c.alpha);
  c.gamma = j.value("gamma", c.gamma);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.n_epochs = j.value("n_epochs", c.n_epochs);
  c.patience = j.value("patience", c.patience);
  c.threshold = j.value("threshold", c.threshold);
  c.positional_encoding = j.value("positional_encoding", c.positional_encoding);
  c.normalize_features = j.value("normalize_features", c.normalize_features);
}

json stream_config_json(const StreamConfig& c) {
  return {{"d_k", c.d_k},
          {"n_heads", c.n_heads},
          {"n_blocks", c.n_blocks},
          {"mlp_hidden", c.mlp_hidden},
          {"alpha", c.alpha},
          {"gamma", c.gamma},
          {"learning_rate", c.learning_rate},
          {"n_epochs", c.n_epochs},
          {"patience", c.patience},
          {"threshold", c.threshold},
          {"positional_encoding", c.positional_encoding},
          {"normalize_features", c.normalize_features}};
}

}  // namespace

DatasetManifest read_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact("synth", path);
  const auto base = path.parent_path();
  DatasetManifest m;
  try {
    const auto j = json::parse(read_text(path, "manifest"));
    m.fps = j.value("fps", kDefaultFps);
    for (const auto& e : j.at("episodes")) {
      EpisodeEntry ep;
      ep.id = e.at("id").get<std::string>();
      ep.split = parse_split(e.at("split").get<std::string>());
      ep.frame_count = e.at("frame_count").get<std::int64_t>();
      ep.frames_dir = resolve(base, e, "frames_dir");
      ep.trailer_dir = resolve(base, e, "trailer_dir");
      ep.shot_cuts = resolve(base, e, "shot_cuts");
      ep.subtitles = resolve(base, e, "subtitles");
      ep.planted_labels = resolve(base, e, "planted_labels");
      ep.editor_labels = resolve(base, e, "editor_labels");
      if (e.contains("features")) {
        for (const auto& [name, _] : e.at("features").items()) {
          stream_or_throw(name);
          ep.features[name] = resolve(base, e.at("features"), name.c_str());
        }
      }
      if (ep.frame_count < 1) throw FormatError(ep.id + ": frame_count must be positive");
      m.episodes.push_back(std::move(ep));
    }
  } catch (const json::exception& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
  if (m.episodes.empty()) throw FormatError("manifest " + path.string() + " lists no episodes");
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  const auto base = path.parent_path();
  json episodes = json::array();
  for (const auto& ep : manifest.episodes) {
    json e{{"id", ep.id}, {"split", split_name(ep.split)}, {"frame_count", ep.frame_count}};
    auto put = [&](const char* key, const fs::path& p) {
      if (!p.empty()) e[key] = relative_to(base, p);
    };
    put("frames_dir", ep.frames_dir);
    put("trailer_dir", ep.trailer_dir);
    put("shot_cuts", ep.shot_cuts);
    put("subtitles", ep.subtitles);
    put("planted_labels", ep.planted_labels);
    put("editor_labels", ep.editor_labels);
    json features = json::object();
    for (const auto& [name, p] : ep.features) features[name] = relative_to(base, p);
    e["features"] = features;
    episodes.push_back(std::move(e));
  }
  const json j{{"version", 1}, {"fps", manifest.fps}, {"episodes", episodes}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

const char* model_choice_name(ModelChoice choice) {
  switch (choice) {
    case ModelChoice::kTransformer:
      return "transformer";
    case ModelChoice::kMlp:
      return "mlp";
    case ModelChoice::kRandom:
      return "random";
  }
  return "?";
}

std::string subset_name(const StreamSubset& subset) {
  std::string out;
  for (const auto& tag : subset) {
    if (!out.empty()) out += '+';
    out += stream_name(tag);
  }
  return out;
}

StreamSubset parse_subset_name(const std::string& name) {
  StreamSubset subset;
  std::size_t begin = 0;
  while (begin <= name.size()) {
    const auto end = std::min(name.find('+', begin), name.size());
    subset.push_back(stream_or_throw(name.substr(begin, end - begin)));
    begin = end + 1;
  }
  std::vector<StreamTag> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("stream subset '" + name + "' repeats a stream");
  }
  return subset;
}

std::vector<StreamSubset> all_subsets() {
  const auto streams = all_streams();
  std::vector<StreamSubset> out;
  for (std::size_t k = 1; k <= streams.size(); ++k) {
    // Lexicographic k-combinations of stream indices.
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      StreamSubset s;
      for (const auto i : idx) s.push_back(streams[i]);
      out.push_back(std::move(s));
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == streams.size() - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

StreamConfig RunConfig::config_for(StreamTag stream, std::uint64_t seed) const {
  const auto it = stream_overrides.find(stream_name(stream));
  StreamConfig c = it == stream_overrides.end() ? stream_config : it->second;
  c.seed = seed;
  return c;
}

std::vector<StreamSubset> RunConfig::effective_subsets() const {
  return subsets.empty() ? std::vector<StreamSubset>{streams} : subsets;
}

void RunConfig::validate() const {
  if (manifest.empty()) throw InvalidInput("run config: manifest path is required");
  if (!fs::exists(manifest)) throw MissingArtifact("synth", manifest);
  if (seeds.empty()) throw InvalidInput("run config: seeds must be nonempty");
  if (streams.empty()) throw InvalidInput("run config: streams must be nonempty");
  if (tau < 0 || tau > 64) throw InvalidInput("run config: tau must lie in [0, 64]");
  if (workers < 1) throw InvalidInput("run config: workers must be >= 1");
  if (output_dir.empty()) throw InvalidInput("run config: output_dir is required");
  stream_config.validate();
  for (const auto& [_, c] : stream_overrides) c.validate();
  for (const auto& subset : subsets) {
    if (subset.empty()) throw InvalidInput("run config: empty stream subset");
  }
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig c;
  try {
    const auto j = json::parse(text);
    if (j.contains("manifest")) c.manifest = j.at("manifest").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.tau = j.value("tau", c.tau);
    c.shot_threshold = j.value("shot_threshold", c.shot_threshold);
    c.workers = j.value("workers", c.workers);
    if (j.contains("streams")) {
      c.streams.clear();
      for (const auto& s : j.at("streams")) c.streams.push_back(stream_or_throw(s.get<std::string>()));
    }
    if (j.contains("subsets")) {
      for (const auto& s : j.at("subsets")) c.subsets.push_back(parse_subset_name(s.get<std::string>()));
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("model")) {
      const auto m = j.at("model").get<std::string>();
      if (m == "transformer") {
        c.model = ModelChoice::kTransformer;
      } else if (m == "mlp") {
        c.model = ModelChoice::kMlp;
        c.stream_config = StreamConfig::mlp_baseline_defaults();
      } else if (m == "random") {
        c.model = ModelChoice::kRandom;
      } else {
        throw InvalidInput("run config: unknown model '" + m + "'");
      }
    }
    if (j.contains("stream_config")) apply_stream_config(j.at("stream_config"), c.stream_config);
    if (j.contains("stream_overrides")) {
      for (const auto& [name, o] : j.at("stream_overrides").items()) {
        stream_or_throw(name);
        StreamConfig sc = c.stream_config;
        apply_stream_config(o, sc);
        c.stream_overrides[name] = sc;
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(read_text(path, "run config"));
}

std::string run_config_to_json(const RunConfig& c) {
  json streams = json::array();
  for (const auto& s : c.streams) streams.push_back(stream_name(s));
  json subsets = json::array();
  for (const auto& s : c.subsets) subsets.push_back(subset_name(s));
  json overrides = json::object();
  for (const auto& [name, sc] : c.stream_overrides) overrides[name] = stream_config_json(sc);
  const json j{{"manifest", c.manifest.generic_string()},
               {"output_dir", c.output_dir.generic_string()},
               {"tau", c.tau},
               {"shot_threshold", c.shot_threshold},
               {"streams", streams},
               {"subsets", subsets},
               {"seeds", c.seeds},
               {"model", model_choice_name(c.model)},
               {"workers", c.workers},
               {"stream_config", stream_config_json(c.stream_config)},
               {"stream_overrides", overrides}};
  return j.dump(2);
}

fs::path OutputLayout::labels(const std::string& episode) const {
  return root / "labels" / (episode + ".jsonl");
}

fs::path OutputLayout::model_dir(StreamTag stream, std::uint64_t seed) const {
  return root / "models" / stream_name(stream) / ("seed" + std::to_string(seed));
}

fs::path OutputLayout::model(StreamTag stream, std::uint64_t seed) const {
  return model_dir(stream, seed) / "model.trlm";
}

fs::path OutputLayout::prediction(StreamTag stream, std::uint64_t seed,
                                  const std::string& episode) const {
  return root / "predictions" / stream_name(stream) / ("seed" + std::to_string(seed)) /
         (episode + ".trlf");
}

fs::path OutputLayout::fused(const StreamSubset& subset, std::uint64_t seed,
                             const std::string& episode) const {
  return root / "fused" / subset_name(subset) / ("seed" + std::to_string(seed)) /
         (episode + ".trlf");
}

fs::path OutputLayout::eval_dir(const StreamSubset& subset) const {
  return root / "eval" / subset_name(subset);
}

fs::path OutputLayout::stage_log(const std::string& stage) const {
  return root / "logs" / (stage + ".json");
}

}  // namespace trailerness::tools
