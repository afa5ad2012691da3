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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specmon/classifier.hpp"

namespace specmon {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<std::string> class_map;
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t classes() const noexcept { return class_map.size(); }
  std::uint64_t total() const;
  std::uint64_t trace() const;
};

// InputError on a length mismatch, LabelError on an index outside the map.
ConfusionMatrix confusion_matrix(std::span<const std::size_t> predictions,
                                 std::span<const std::size_t> labels,
                                 std::vector<std::string> class_map);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;    // true windows of this class
  std::uint64_t predicted = 0;  // windows predicted as this class
  // Set when the matching denominator is zero and the metric is reported as 0.
  bool no_predictions = false;
  bool no_support = false;
};

struct MetricsReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  std::uint64_t total = 0;
};

// 2PR/(P+R), or 0 when P+R is 0.
double f1_score(double precision, double recall);

// EvaluationError on an empty matrix.
MetricsReport classification_report(const ConfusionMatrix& cm);

// Full-precision JSON holding the report and the confusion matrix.
nlohmann::json report_to_json(const MetricsReport& report, const ConfusionMatrix& cm);
// Aligned table with two decimals, in the layout of a paper results table.
std::string render_report_table(const MetricsReport& report);
// Header row of predicted class names, then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm);

// One row per window: f0..f255, true_label, predicted_label. Returns the
// number of data rows.
std::size_t export_embeddings(const CnnModel& model,
                              std::span<const LabeledWindow> windows,
                              NormalizePolicy policy,
                              const std::filesystem::path& path,
                              std::size_t batch_size = 256);

// seconds,epoch,train_loss,val_accuracy. EvaluationError on an empty history.
std::string history_csv(const TrainHistory& history);
std::size_t export_history(const TrainHistory& history,
                           const std::filesystem::path& path);
// FormatError on a malformed header or row.
std::vector<TrainRecord> parse_history_csv(std::string_view text);

}  // namespace specmon
