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

#ifndef TRAILERNESS_EVAL_HPP_
#define TRAILERNESS_EVAL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trailerness/fusion.hpp"
#include "trailerness/types.hpp"

namespace trailerness {

inline constexpr double kDefaultThreshold = 0.5;

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

// label = 1 iff score >= threshold.
LabelTrack binarize(std::span<const double> scores,
                    double threshold = kDefaultThreshold);
LabelTrack binarize(const FrameScoreTrack& track,
                    double threshold = kDefaultThreshold);

Confusion confusion(const LabelTrack& pred, const LabelTrack& gold);

// Zero-denominator ratios are reported as 0.
Metrics metrics_from(const Confusion& counts);
Metrics prf1(const LabelTrack& pred, const LabelTrack& gold);

struct SeedResult {
  std::uint64_t seed = 0;
  Metrics metrics;
};

struct EvalReport {
  std::vector<std::string> streams;
  std::vector<SeedResult> per_seed;
  Metrics mean;  // confusion unused
  Metrics std;   // sample standard deviation, n - 1 denominator
  Confusion confusion;  // summed over seeds
};

EvalReport multi_seed_report(std::span<const SeedResult> runs);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

}  // namespace trailerness

#endif  // TRAILERNESS_EVAL_HPP_
