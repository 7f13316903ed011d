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

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include "json.hpp"
#include "trailerness/error.hpp"
#include "trailerness_tools/pipeline.hpp"

namespace trailerness::tools {

namespace {

using json = nlohmann::json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw IoError("sha256 initialization failed");
    }
  }

  void update(const void* data, std::size_t size) {
    EVP_DigestUpdate(ctx_.get(), data, size);
  }

  void update_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    char buffer[1 << 16];
    while (in) {
      in.read(buffer, sizeof buffer);
      update(buffer, static_cast<std::size_t>(in.gcount()));
    }
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int size = 0;
    EVP_DigestFinal_ex(ctx_.get(), digest, &size);
    std::string out;
    char byte[3];
    for (unsigned int i = 0; i < size; ++i) {
      std::snprintf(byte, sizeof byte, "%02x", digest[i]);
      out += byte;
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_path(const fs::path& path) {
  Sha256 sha;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto name = f.lexically_relative(path).generic_string();
      sha.update(name.data(), name.size() + 1);  // includes the terminator
      sha.update_file(f);
    }
  } else {
    sha.update_file(path);
  }
  return sha.hex();
}

void write_stage_log(const fs::path& path, const std::string& stage,
                     const RunConfig& config, const std::vector<fs::path>& inputs,
                     const std::vector<fs::path>& outputs) {
  json in = json::array();
  for (const auto& p : inputs) {
    in.push_back({{"path", p.generic_string()}, {"sha256", sha256_path(p)}});
  }
  json out = json::array();
  for (const auto& p : outputs) out.push_back(p.generic_string());
  const json log{{"stage", stage},
                 {"config", json::parse(run_config_to_json(config))},
                 {"inputs", in},
                 {"outputs", out},
                 {"timestamp", utc_timestamp()}};
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << log.dump(2) << '\n';
}

std::string timeline_svg(const std::string& title, std::span<const double> scores,
                         const LabelTrack& labels, double threshold) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw InvalidInput("timeline_svg: scores and labels must be nonempty and equal length");
  }
  constexpr int kWidth = 1000;
  constexpr int kHeight = 200;
  constexpr int kTop = 30;
  constexpr int kPlot = 150;
  const double n = static_cast<double>(scores.size());
  auto x_of = [&](double frame) { return frame / n * kWidth; };
  auto y_of = [&](double s) { return kTop + (1.0 - s) * kPlot; };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                kWidth, kHeight, kWidth, kHeight);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string escaped;
  for (const char c : title) {
    if (c == '<') escaped += "&lt;";
    else if (c == '>') escaped += "&gt;";
    else if (c == '&') escaped += "&amp;";
    else escaped += c;
  }
  svg += "<text x=\"4\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" + escaped +
         "</text>\n";

  // Editor-labeled runs.
  std::size_t i = 0;
  while (i < labels.size()) {
    std::size_t j = i;
    while (j < labels.size() && labels.labels[j] == labels.labels[i]) ++j;
    if (labels.labels[i]) {
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.2f\" y=\"%d\" width=\"%.2f\" height=\"%d\" "
                    "fill=\"#f4a261\" fill-opacity=\"0.45\"/>\n",
                    x_of(static_cast<double>(i)), kTop,
                    x_of(static_cast<double>(j)) - x_of(static_cast<double>(i)), kPlot);
      svg += buf;
    }
    i = j;
  }

  std::snprintf(buf, sizeof buf,
                "<line x1=\"0\" y1=\"%.2f\" x2=\"%d\" y2=\"%.2f\" stroke=\"#888\" "
                "stroke-dasharray=\"4 3\"/>\n",
                y_of(threshold), kWidth, y_of(threshold));
  svg += buf;

  // One point per pixel column: the mean score of the frames it covers.
  svg += "<polyline fill=\"none\" stroke=\"#1d3557\" stroke-width=\"1.2\" points=\"";
  const std::size_t columns = std::min<std::size_t>(kWidth, scores.size());
  for (std::size_t c = 0; c < columns; ++c) {
    const std::size_t b = c * scores.size() / columns;
    const std::size_t e = (c + 1) * scores.size() / columns;
    double sum = 0.0;
    for (std::size_t f = b; f < e; ++f) sum += scores[f];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of((b + e) / 2.0),
                  y_of(sum / static_cast<double>(e - b)));
    svg += buf;
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

}  // namespace trailerness::tools
