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

#include "trailerness/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>
#include <string>

#include "trailerness/error.hpp"

namespace trailerness {

namespace fs = std::filesystem;

GrayImage to_luma(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) *
                                 image.height * 3) {
    throw InvalidInput("to_luma: malformed RGB image");
  }
  GrayImage out(image.width, image.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double luma = 0.299 * image.pixels[3 * i] +
                        0.587 * image.pixels[3 * i + 1] +
                        0.114 * image.pixels[3 * i + 2];
    out.pixels[i] =
        static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) break;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return token;
}

int parse_header_int(const std::string& token, const fs::path& path) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size() || value < 0) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw FormatError("bad PGM header field '" + token + "' in " +
                      path.string());
  }
}

}  // namespace

GrayImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_pgm_token(in) != "P5") {
    throw FormatError("not a binary PGM (P5): " + path.string());
  }
  const int width = parse_header_int(next_pgm_token(in), path);
  const int height = parse_header_int(next_pgm_token(in), path);
  const int maxval = parse_header_int(next_pgm_token(in), path);
  if (width == 0 || height == 0 || maxval == 0 || maxval > 255) {
    throw FormatError("unsupported PGM geometry or maxval in " +
                      path.string());
  }
  GrayImage image(width, height);
  in.read(reinterpret_cast<char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) {
    throw FormatError("truncated PGM payload in " + path.string());
  }
  if (maxval != 255) {
    for (auto& p : image.pixels) {
      p = static_cast<std::uint8_t>(
          std::lround(std::min<int>(p, maxval) * 255.0 / maxval));
    }
  }
  return image;
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

GrayImage read_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw FormatError("cannot decode PNG " + path.string() + ": " +
                      png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw FormatError("cannot decode PNG " + path.string() + ": " + message);
  }
  const int width = static_cast<int>(png.width);
  const int height = static_cast<int>(png.height);
  if (color) {
    RgbImage rgb{width, height, std::move(buffer)};
    return to_luma(rgb);
  }
  GrayImage gray(width, height);
  gray.pixels = std::move(buffer);
  return gray;
}

GrayImage read_frame(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw FormatError("unsupported frame file type: " + path.string());
}

std::vector<fs::path> list_frame_files(const fs::path& directory) {
  if (!fs::is_directory(directory)) {
    throw IoError("frame directory not found: " + directory.string());
  }
  static const std::regex kFramePattern(R"(frame_\d+\.(pgm|png|PGM|PNG))");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    if (std::regex_match(entry.path().filename().string(), kFramePattern)) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return files;
}

std::vector<GrayImage> read_frame_directory(const fs::path& directory) {
  std::vector<GrayImage> frames;
  for (const auto& file : list_frame_files(directory)) {
    frames.push_back(read_frame(file));
  }
  return frames;
}

void write_frame_directory(const fs::path& directory,
                           std::span<const GrayImage> frames) {
  fs::create_directories(directory);
  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "frame_%08zu.pgm", i);
    write_pgm(directory / name, frames[i]);
  }
}

}  // namespace trailerness
