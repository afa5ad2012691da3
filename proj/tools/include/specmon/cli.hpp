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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmon/classifier.hpp"
#include "specmon/datasets.hpp"

namespace specmon::cli {

// Bad command line: unknown flag, missing required flag, unparsable value.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --help; what() holds the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subcommand {
  kGenerate,
  kIngest,
  kTrain,
  kEvaluate,
  kClassify,
  kExportEmbeddings,
  kInspect,
};

std::string_view subcommand_name(Subcommand sub);

struct Command {
  Subcommand subcommand = Subcommand::kInspect;
  std::optional<TaskKind> task;
  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path scenario;
  std::filesystem::path checkpoint;
  std::filesystem::path input;     // classify: raw IQ file, empty or "-" for stdin
  std::filesystem::path manifest;  // evaluate, export-embeddings: dataset manifest
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
  TrainConfig train;
  SplitSizes split;
  SplitPolicy split_policy = SplitPolicy::kRandom;
  NormalizePolicy normalize = NormalizePolicy::kNone;
  std::vector<std::string> arguments;  // argv[1..], recorded in run manifests
};

// UsageError on a bad command line; IoError when an input path is missing.
Command parse_args(int argc, const char* const* argv);

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
// Library errors exit with kExitErrorBase + static_cast<int>(ErrorKind).
inline constexpr int kExitErrorBase = 10;

int exit_code_for(ErrorKind kind);

// Runs the command; artifacts go to files, `out` carries classify and inspect
// output, `log` carries progress and diagnostics. Returns the exit code.
int execute(const Command& cmd, std::ostream& out, std::ostream& log);

// parse_args + execute with every error mapped to an exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

// Windows for a (task, data config) pair, drawn the same way by train,
// evaluate and export-embeddings.
DatasetSplit build_split(std::span<const RecordingPtr> recordings, TaskKind task,
                         const DataConfig& data);

}  // namespace specmon::cli
