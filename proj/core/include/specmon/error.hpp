// Copyright 2026 The specmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specmon {

// Every failure surfaced by the library carries one of these kinds. The CLI
// maps each kind onto its own exit code.
enum class ErrorKind {
  kDimension,
  kDegenerateInput,
  kLabel,
  kState,
  kTraining,
  kFormat,
  kCorruption,
  kVocabulary,
  kCoverage,
  kConfig,
  kInput,
  kEvaluation,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define SPECMON_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message) : Error(Kind, message) {} \
  }

SPECMON_DEFINE_ERROR(DimensionError, ErrorKind::kDimension);
SPECMON_DEFINE_ERROR(DegenerateInputError, ErrorKind::kDegenerateInput);
SPECMON_DEFINE_ERROR(LabelError, ErrorKind::kLabel);
SPECMON_DEFINE_ERROR(StateError, ErrorKind::kState);
SPECMON_DEFINE_ERROR(TrainingError, ErrorKind::kTraining);
SPECMON_DEFINE_ERROR(FormatError, ErrorKind::kFormat);
SPECMON_DEFINE_ERROR(CorruptionError, ErrorKind::kCorruption);
SPECMON_DEFINE_ERROR(VocabularyError, ErrorKind::kVocabulary);
SPECMON_DEFINE_ERROR(CoverageError, ErrorKind::kCoverage);
SPECMON_DEFINE_ERROR(ConfigError, ErrorKind::kConfig);
SPECMON_DEFINE_ERROR(InputError, ErrorKind::kInput);
SPECMON_DEFINE_ERROR(EvaluationError, ErrorKind::kEvaluation);
SPECMON_DEFINE_ERROR(IoError, ErrorKind::kIo);

#undef SPECMON_DEFINE_ERROR

}  // namespace specmon
