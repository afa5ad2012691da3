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


#include "specmon/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "specmon/error.hpp"
#include "specmon/io.hpp"

namespace specmon {

using nlohmann::json;

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> predictions,
                                 std::span<const std::size_t> labels,
                                 std::vector<std::string> class_map) {
  if (predictions.size() != labels.size()) {
    throw InputError("confusion matrix: " + std::to_string(predictions.size()) +
                     " predictions for " + std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm;
  const std::size_t c = class_map.size();
  cm.class_map = std::move(class_map);
  cm.counts.assign(c, std::vector<std::uint64_t>(c, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= c || predictions[i] >= c) {
      throw LabelError("confusion matrix: pair " + std::to_string(i) +
                       " has a class index outside [0, " + std::to_string(c) + ")");
    }
    ++cm.counts[labels[i]][predictions[i]];
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

MetricsReport classification_report(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.total = cm.total();
  if (r.total == 0) throw EvaluationError("cannot derive metrics from an empty matrix");
  const std::size_t c = cm.classes();
  for (std::size_t k = 0; k < c; ++k) {
    ClassMetrics m;
    m.name = cm.class_map[k];
    for (std::size_t j = 0; j < c; ++j) {
      m.support += cm.counts[k][j];
      m.predicted += cm.counts[j][k];
    }
    const double hit = static_cast<double>(cm.counts[k][k]);
    m.no_predictions = m.predicted == 0;
    m.no_support = m.support == 0;
    m.precision = m.no_predictions ? 0.0 : hit / static_cast<double>(m.predicted);
    m.recall = m.no_support ? 0.0 : hit / static_cast<double>(m.support);
    m.f1 = f1_score(m.precision, m.recall);
    r.classes.push_back(std::move(m));
  }
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(r.total);
  return r;
}

json report_to_json(const MetricsReport& report, const ConfusionMatrix& cm) {
  json classes = json::array();
  for (const auto& m : report.classes) {
    classes.push_back({{"class", m.name},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"predicted", m.predicted},
                       {"no_predictions", m.no_predictions},
                       {"no_support", m.no_support}});
  }
  return {{"accuracy", report.accuracy},
          {"total", report.total},
          {"classes", classes},
          {"confusion", {{"class_map", cm.class_map}, {"counts", cm.counts}}}};
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_report_table(const MetricsReport& report) {
  std::size_t width = std::string_view("accuracy").size();
  for (const auto& m : report.classes) width = std::max(width, m.name.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("class", width) << "  precision  recall  f1-score  support\n";
  for (const auto& m : report.classes) {
    out << pad(m.name, width) << "  " << pad(fixed2(m.precision), 9) << "  "
        << pad(fixed2(m.recall), 6) << "  " << pad(fixed2(m.f1), 8) << "  " << m.support;
    if (m.no_predictions) out << "  (no predictions)";
    if (m.no_support) out << "  (no support)";
    out << '\n';
  }
  out << pad("accuracy", width) << "  " << pad("", 9) << "  " << pad("", 6) << "  "
      << pad(fixed2(report.accuracy), 8) << "  " << report.total << '\n';
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& name : cm.class_map) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    out << cm.class_map[i];
    for (auto c : cm.counts[i]) out << ',' << c;
    out << '\n';
  }
  return out.str();
}

namespace {

std::string format_float(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::size_t export_embeddings(const CnnModel& model,
                              std::span<const LabeledWindow> windows,
                              NormalizePolicy policy, const std::filesystem::path& path,
                              std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::string out;
  for (std::size_t j = 0; j < kHiddenUnits; ++j) out += "f" + std::to_string(j) + ",";
  out += "true_label,predicted_label\n";
  const std::size_t classes = model.num_classes();
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, windows.size() - start);
    const auto chunk = windows.subspan(start, n);
    const nn::Tensor<float> batch = make_batch(chunk, policy);
    const nn::Tensor<float> h = model.embeddings(batch);
    const nn::Tensor<float> logits = model.logits(batch);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < kHiddenUnits; ++j) {
        out += format_float(h[i * kHiddenUnits + j]);
        out += ',';
      }
      const std::size_t pred =
          argmax_class({logits.data().data() + i * classes, classes});
      out += model.class_map()[chunk[i].label(model.task())];
      out += ',';
      out += model.class_map()[pred];
      out += '\n';
    }
  }
  write_file_atomic(path, out);
  return windows.size();
}

std::string history_csv(const TrainHistory& history) {
  if (history.records.empty()) throw EvaluationError("training history is empty");
  std::string out = "seconds,epoch,train_loss,val_accuracy\n";
  for (const auto& r : history.records) {
    out += format_double(r.seconds) + ',' + format_double(r.epoch) + ',' +
           format_double(r.train_loss) + ',' + format_double(r.val_accuracy) + '\n';
  }
  return out;
}

std::size_t export_history(const TrainHistory& history,
                           const std::filesystem::path& path) {
  write_file_atomic(path, history_csv(history));
  return history.records.size();
}

std::vector<TrainRecord> parse_history_csv(std::string_view text) {
  std::vector<TrainRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line_no == 1) {
      if (line != "seconds,epoch,train_loss,val_accuracy") {
        throw FormatError("history CSV has an unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    double v[4];
    std::size_t field = 0;
    while (true) {
      const std::size_t comma = line.find(',');
      const std::string_view cell = line.substr(0, comma);
      if (field >= 4) throw FormatError("history CSV line " + std::to_string(line_no) +
                                        " has too many fields");
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v[field]);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw FormatError("history CSV line " + std::to_string(line_no) +
                          " has a malformed number");
      }
      ++field;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (field != 4) {
      throw FormatError("history CSV line " + std::to_string(line_no) +
                        " has " + std::to_string(field) + " fields");
    }
    out.push_back({v[0], v[1], v[2], v[3]});
  }
  if (line_no == 0) throw FormatError("history CSV is empty");
  return out;
}

}  // namespace specmon
