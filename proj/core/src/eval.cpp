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

#include "trailerness/eval.hpp"

#include <cmath>
#include <vector>

#include "json.hpp"
#include "trailerness/error.hpp"

namespace trailerness {

using nlohmann::json;

LabelTrack binarize(std::span<const double> scores, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidInput("binarize: threshold must lie in [0, 1]");
  }
  LabelTrack out{Granularity::kFrame, std::vector<std::uint8_t>(scores.size())};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.labels[i] = scores[i] >= threshold ? 1 : 0;
  }
  return out;
}

LabelTrack binarize(const FrameScoreTrack& track, double threshold) {
  return binarize(track.scores, threshold);
}

Confusion confusion(const LabelTrack& pred, const LabelTrack& gold) {
  if (pred.size() != gold.size()) {
    throw InvalidInput("prediction has " + std::to_string(pred.size()) +
                       " frames, gold has " + std::to_string(gold.size()));
  }
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.labels[i] != 0;
    const bool g = gold.labels[i] != 0;
    if (p && g) {
      ++c.tp;
    } else if (p) {
      ++c.fp;
    } else if (g) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

Metrics metrics_from(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Metrics prf1(const LabelTrack& pred, const LabelTrack& gold) {
  return metrics_from(confusion(pred, gold));
}

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Offsets from the first run keep the mean exact (and the spread zero) when
// every run agrees.
MeanStd mean_and_sample_std(std::span<const double> values) {
  const double origin = values.front();
  const double n = static_cast<double>(values.size());
  double offset = 0.0;
  for (const double v : values) offset += v - origin;
  offset /= n;
  MeanStd out{origin + offset, 0.0};
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += ((v - origin) - offset) * ((v - origin) - offset);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

}  // namespace

EvalReport multi_seed_report(std::span<const SeedResult> runs) {
  if (runs.empty()) throw InvalidInput("multi_seed_report: no runs");
  EvalReport report;
  report.per_seed.assign(runs.begin(), runs.end());
  std::vector<double> p, r, f;
  for (const auto& run : runs) {
    p.push_back(run.metrics.precision);
    r.push_back(run.metrics.recall);
    f.push_back(run.metrics.f1);
    report.confusion += run.metrics.confusion;
  }
  const auto mp = mean_and_sample_std(p);
  const auto mr = mean_and_sample_std(r);
  const auto mf = mean_and_sample_std(f);
  report.mean.precision = mp.mean;
  report.mean.recall = mr.mean;
  report.mean.f1 = mf.mean;
  report.std.precision = mp.std;
  report.std.recall = mr.std;
  report.std.f1 = mf.std;
  return report;
}

namespace {

json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

json triple_json(const Metrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

Confusion confusion_from(const json& j) {
  return {j.at("tp").get<std::int64_t>(), j.at("fp").get<std::int64_t>(),
          j.at("fn").get<std::int64_t>(), j.at("tn").get<std::int64_t>()};
}

Metrics triple_from(const json& j) {
  Metrics m;
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  return m;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json j;
  j["streams"] = report.streams;
  j["per_seed"] = json::array();
  for (const auto& r : report.per_seed) {
    json entry = triple_json(r.metrics);
    entry["seed"] = r.seed;
    entry["confusion"] = confusion_json(r.metrics.confusion);
    j["per_seed"].push_back(std::move(entry));
  }
  j["mean"] = triple_json(report.mean);
  j["std"] = triple_json(report.std);
  j["confusion"] = confusion_json(report.confusion);
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    EvalReport report;
    if (j.contains("streams")) report.streams = j["streams"].get<std::vector<std::string>>();
    for (const auto& entry : j.at("per_seed")) {
      SeedResult r;
      r.seed = entry.at("seed").get<std::uint64_t>();
      r.metrics = triple_from(entry);
      r.metrics.confusion = confusion_from(entry.at("confusion"));
      report.per_seed.push_back(r);
    }
    report.mean = triple_from(j.at("mean"));
    report.std = triple_from(j.at("std"));
    report.confusion = confusion_from(j.at("confusion"));
    return report;
  } catch (const json::exception& e) {
    throw FormatError(std::string("eval report: ") + e.what());
  }
}

}  // namespace trailerness
