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

#ifndef TRAILERNESS_ERROR_HPP_
#define TRAILERNESS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace trailerness {

// Coarse error categories. The command line tool maps each category onto a
// distinct process exit code.
enum class ErrorCategory {
  kInvalidInput = 2,
  kIo = 3,
  kFormat = 4,
  kMissingArtifact = 5,
  kTraining = 6,
};

const char* category_name(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& message)
      : Error(ErrorCategory::kInvalidInput, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorCategory::kIo, message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error(ErrorCategory::kFormat, message) {}
};

class MissingArtifact : public Error {
 public:
  MissingArtifact(const std::string& stage, const std::string& path)
      : Error(ErrorCategory::kMissingArtifact,
              "missing artifact '" + path + "' (run the '" + stage +
                  "' stage first)"),
        stage_(stage) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message)
      : Error(ErrorCategory::kTraining, message) {}
};

// Emits a warning line on stderr unless warnings were silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace trailerness

#endif  // TRAILERNESS_ERROR_HPP_
