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


#include "specmon/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "specmon/checkpoint.hpp"
#include "specmon/error.hpp"
#include "specmon/eval.hpp"
#include "specmon/io.hpp"
#include "specmon/runtime.hpp"
#include "specmon/synthgen.hpp"

#ifndef SPECMON_VERSION_STRING
#define SPECMON_VERSION_STRING "unknown"
#endif

namespace specmon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view subcommand_name(Subcommand sub) {
  switch (sub) {
    case Subcommand::kGenerate: return "generate";
    case Subcommand::kIngest: return "ingest";
    case Subcommand::kTrain: return "train";
    case Subcommand::kEvaluate: return "evaluate";
    case Subcommand::kClassify: return "classify";
    case Subcommand::kExportEmbeddings: return "export-embeddings";
    case Subcommand::kInspect: return "inspect";
  }
  return "?";
}

int exit_code_for(ErrorKind kind) { return kExitErrorBase + static_cast<int>(kind); }

namespace {

SplitSizes parse_split(const std::string& text) {
  SplitSizes s;
  std::size_t parts[3];
  std::size_t count = 0;
  std::string_view rest = text;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string_view cell = rest.substr(0, comma);
    if (count == 3 || cell.empty()) break;
    std::size_t value = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) break;
    parts[count++] = value;
    if (comma == std::string_view::npos) {
      if (count == 3) {
        s = {parts[0], parts[1], parts[2]};
        return s;
      }
      break;
    }
    rest.remove_prefix(comma + 1);
  }
  throw UsageError("--split expects three counts TRAIN,VAL,TEST, got '" + text + "'");
}

double parse_snr(const std::string& text) {
  if (text == "inf" || text == "none") return synth::kNoNoise;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || std::isnan(v)) {
    throw UsageError("--snr-db expects a number or 'inf', got '" + text + "'");
  }
  return v;
}

template <typename F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void require_exists(const fs::path& path, const char* flag, bool directory) {
  std::error_code ec;
  if (directory ? !fs::is_directory(path, ec) : !fs::is_regular_file(path, ec)) {
    throw IoError(std::string(flag) + ": " + path.string() + " is not an existing " +
                  (directory ? "directory" : "file"));
  }
}

}  // namespace

Command parse_args(int argc, const char* const* argv) {
  CLI::App app{"RF protocol and transmitter classification toolkit", "specmon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPECMON_VERSION_STRING);

  std::string task, split, split_policy = "random", normalize = "none", snr;
  std::uint64_t seed = 0;
  Command cmd;

  auto* gen = app.add_subcommand("generate", "write a synthetic corpus");
  auto* ing = app.add_subcommand("ingest", "index a <tx>/<protocol>/<day>/*.iq tree");
  auto* trn = app.add_subcommand("train", "train a classifier");
  auto* evl = app.add_subcommand("evaluate", "evaluate a checkpoint on its test split");
  auto* cls = app.add_subcommand("classify", "classify raw IQ windows");
  auto* emb = app.add_subcommand("export-embeddings", "write hidden-layer features");
  auto* ins = app.add_subcommand("inspect", "describe a checkpoint");

  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "master seed"); };
  auto add_task = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--task", task, "protocol | transmitter | joint");
    if (required) o->required();
  };
  auto add_data_options = [&](CLI::App* sub) {
    sub->add_option("--split", split, "TRAIN,VAL,TEST window counts");
    sub->add_option("--split-policy", split_policy, "random | by_offset");
    sub->add_option("--normalize", normalize, "none | unit_rms");
  };

  gen->add_option("--out", cmd.out, "output directory")->required();
  gen->add_option("--scenario", cmd.scenario, "scenario JSON");
  gen->add_option("--snr-db", snr, "override the scenario SNR ('inf' for none)");
  add_seed(gen);

  ing->add_option("--data", cmd.data, "capture tree root")->required();
  ing->add_option("--out", cmd.out, "directory for the index and run manifest")->required();

  add_task(trn, true);
  trn->add_option("--data", cmd.data, "corpus directory")->required();
  trn->add_option("--out", cmd.out, "output directory (default: current directory)");
  add_seed(trn);
  trn->add_option("--epochs", cmd.train.epochs, "training epochs");
  trn->add_option("--batch-size", cmd.train.batch_size, "mini-batch size");
  trn->add_option("--lr", cmd.train.lr, "Adam learning rate");
  trn->add_option("--evals-per-epoch", cmd.train.evals_per_epoch,
                  "validation passes per epoch");
  trn->add_option("--recalibration-windows", cmd.train.recalibration_windows,
                  "training windows for batchnorm recalibration (0 disables)");
  add_data_options(trn);

  for (auto* sub : {evl, emb}) {
    sub->add_option("--checkpoint", cmd.checkpoint, "model checkpoint")->required();
    sub->add_option("--data", cmd.data, "corpus directory")->required();
    sub->add_option("--out", cmd.out, "output directory")->required();
    sub->add_option("--manifest", cmd.manifest, "dataset manifest written by train");
    add_task(sub, false);
  }

  cls->add_option("--checkpoint", cmd.checkpoint, "model checkpoint")->required();
  cls->add_option("--input", cmd.input, "interleaved float32 IQ file ('-' for stdin)");

  ins->add_option("--checkpoint", cmd.checkpoint, "model checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::CallForVersion&) {
    throw HelpRequested(std::string(SPECMON_VERSION_STRING) + "\n");
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const std::pair<CLI::App*, Subcommand> subs[] = {
      {gen, Subcommand::kGenerate}, {ing, Subcommand::kIngest},
      {trn, Subcommand::kTrain},    {evl, Subcommand::kEvaluate},
      {cls, Subcommand::kClassify}, {emb, Subcommand::kExportEmbeddings},
      {ins, Subcommand::kInspect}};
  for (const auto& [app_ptr, sub] : subs) {
    if (app_ptr->parsed()) cmd.subcommand = sub;
  }
  if (cmd.subcommand == Subcommand::kTrain && cmd.out.empty()) cmd.out = ".";
  const auto* active = app.get_subcommands().front();
  if (const auto* opt = active->get_option_no_throw("--seed"); opt && opt->count()) {
    cmd.seed = seed;
  }
  if (!task.empty()) cmd.task = as_usage([&] { return parse_task(task); });
  if (!split.empty()) cmd.split = parse_split(split);
  if (!snr.empty()) cmd.snr_db = parse_snr(snr);
  cmd.split_policy = as_usage([&] { return parse_split_policy(split_policy); });
  cmd.normalize = as_usage([&] { return parse_normalize_policy(normalize); });
  cmd.train.seed = seed;
  as_usage([&] {
    cmd.train.validate();
    return 0;
  });
  for (int i = 1; i < argc; ++i) cmd.arguments.emplace_back(argv[i]);

  switch (cmd.subcommand) {
    case Subcommand::kGenerate:
      if (!cmd.scenario.empty()) require_exists(cmd.scenario, "--scenario", false);
      break;
    case Subcommand::kIngest:
    case Subcommand::kTrain:
      require_exists(cmd.data, "--data", true);
      break;
    case Subcommand::kEvaluate:
    case Subcommand::kExportEmbeddings:
      require_exists(cmd.checkpoint, "--checkpoint", false);
      require_exists(cmd.data, "--data", true);
      if (!cmd.manifest.empty()) require_exists(cmd.manifest, "--manifest", false);
      break;
    case Subcommand::kClassify:
      require_exists(cmd.checkpoint, "--checkpoint", false);
      if (!cmd.input.empty() && cmd.input != "-") require_exists(cmd.input, "--input", false);
      break;
    case Subcommand::kInspect:
      require_exists(cmd.checkpoint, "--checkpoint", false);
      break;
  }
  return cmd;
}

DatasetSplit build_split(std::span<const RecordingPtr> recordings, TaskKind task,
                         const DataConfig& data) {
  auto windows = sample_windows(recordings, data.split.total(), task,
                                derive_seed(data.seed, {1}));
  return split_dataset(std::move(windows), data.split, derive_seed(data.seed, {2}),
                       data.policy);
}

namespace {

json file_entry(const fs::path& path) {
  const std::string bytes = read_file(path);
  return {{"path", path.string()}, {"bytes", bytes.size()}, {"crc32", crc32(bytes)}};
}

json corpus_inputs(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext == ".iq" || ext == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  json out = json::array();
  for (const auto& f : files) out.push_back(file_entry(f));
  return out;
}

json build_info() {
  return {{"version", SPECMON_VERSION_STRING},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"threads", thread_count()}};
}

void write_run_manifest(const Command& cmd, const json& config, const json& inputs,
                        const json& outputs) {
  json doc = {{"format", "specmon-run-manifest"},
              {"command", std::string(subcommand_name(cmd.subcommand))},
              {"arguments", cmd.arguments},
              {"seed", cmd.seed ? json(*cmd.seed) : json(nullptr)},
              {"config", config},
              {"inputs", inputs},
              {"outputs", outputs},
              {"build", build_info()}};
  write_file_atomic(cmd.out / "run.json", doc.dump(1) + "\n");
}

json outputs_of(std::initializer_list<fs::path> paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(file_entry(p));
  return out;
}

json cli_data_config(const DataConfig& cfg, TaskKind task) {
  json doc = data_config_to_json(cfg);
  doc["task"] = std::string(task_name(task));
  return doc;
}

// Test windows for evaluate and export-embeddings.
std::vector<LabeledWindow> test_windows(const Command& cmd, const CnnModel& model,
                                        std::span<const RecordingPtr> recordings) {
  if (cmd.task && *cmd.task != model.task()) {
    throw ConfigError("checkpoint was trained for task " +
                      std::string(task_name(model.task())) + " but --task is " +
                      std::string(task_name(*cmd.task)));
  }
  if (!cmd.manifest.empty()) {
    DatasetManifest m = read_manifest(cmd.manifest, recordings);
    if (m.task != model.task()) {
      throw ConfigError("dataset manifest labels task " + std::string(task_name(m.task)) +
                        " but the checkpoint was trained for " +
                        std::string(task_name(model.task())));
    }
    if (m.normalize != model.data_config().normalize) {
      throw ConfigError("dataset manifest normalization differs from the checkpoint's");
    }
    return std::move(m.split.test);
  }
  return build_split(recordings, model.task(), model.data_config()).test;
}

int do_generate(const Command& cmd, std::ostream& log) {
  synth::Scenario scenario =
      cmd.scenario.empty() ? synth::default_scenario() : synth::load_scenario(cmd.scenario);
  if (cmd.seed) scenario.master_seed = *cmd.seed;
  if (cmd.snr_db) scenario.snr_db = *cmd.snr_db;
  synth::validate(scenario);
  const auto manifest = synth::generate_corpus(scenario, cmd.out);
  log << "generated " << manifest.entries.size() << " recordings in " << cmd.out.string()
      << '\n';
  json inputs = json::array();
  if (!cmd.scenario.empty()) inputs.push_back(file_entry(cmd.scenario));
  write_run_manifest(cmd, synth::to_json(scenario), inputs, corpus_inputs(cmd.out));
  return kExitOk;
}

int do_ingest(const Command& cmd, std::ostream& log) {
  const std::size_t written = import_directory_layout(cmd.data);
  const auto recordings = load_corpus(cmd.data);
  json index = json::array();
  for (const auto& r : recordings) {
    index.push_back({{"capture_id", r->capture_id},
                     {"protocol", std::string(protocol_name(r->protocol))},
                     {"transmitter", std::string(transmitter_name(r->transmitter))},
                     {"day", r->day},
                     {"samples", r->samples.size()},
                     {"sample_rate_hz", r->sample_rate_hz}});
  }
  const fs::path index_path = cmd.out / "corpus_index.json";
  write_file_atomic(index_path, index.dump(1) + "\n");
  log << "indexed " << recordings.size() << " recordings (" << written
      << " new sidecars)\n";
  write_run_manifest(cmd, {{"data", cmd.data.string()}}, corpus_inputs(cmd.data),
                     outputs_of({index_path}));
  return kExitOk;
}

int do_train(const Command& cmd, std::ostream& log) {
  const TaskKind task = *cmd.task;
  DataConfig data{cmd.split, cmd.split_policy, cmd.normalize, cmd.seed.value_or(0)};
  TrainConfig cfg = cmd.train;
  cfg.seed = data.seed;

  const auto recordings = load_corpus(cmd.data);
  log << "loaded " << recordings.size() << " recordings from " << cmd.data.string()
      << '\n';
  DatasetSplit split = build_split(recordings, task, data);

  CnnModel model = build_model(task, derive_seed(data.seed, {3}));
  model.set_data_config(data);
  log << "training " << task_name(task) << " model (" << count_parameters(model)
      << " parameters) on " << split.train.size() << " windows\n";
  TrainHistory history = train(model, split.train, split.val, cfg, data.normalize,
                               [&](const TrainRecord& r) {
                                 log << "epoch " << format_double(r.epoch) << "  loss "
                                     << r.train_loss << "  val_acc " << r.val_accuracy
                                     << "  " << r.seconds << " s\n";
                               });
  model.set_data_config(data);

  fs::create_directories(cmd.out);
  const fs::path ckpt = cmd.out / "model.spmc";
  const fs::path hist = cmd.out / "history.csv";
  const fs::path dman = cmd.out / "dataset.json";
  save_checkpoint(model, ckpt);
  export_history(history, hist);
  write_manifest({split, task, data.normalize}, dman);
  const TrainRecord& best = history.records[history.best_record];
  log << "kept epoch " << format_double(best.epoch) << " (val_acc " << best.val_accuracy
      << ")\n";
  json config = {{"train", train_config_to_json(cfg)},
                 {"data", cli_data_config(data, task)},
                 {"model_seed", derive_seed(data.seed, {3})}};
  write_run_manifest(cmd, config, corpus_inputs(cmd.data), outputs_of({ckpt, hist, dman}));
  return kExitOk;
}

int do_evaluate(const Command& cmd, std::ostream& log) {
  const CnnModel model = load_checkpoint(cmd.checkpoint);
  const auto recordings = load_corpus(cmd.data);
  const auto test = test_windows(cmd, model, recordings);
  if (test.empty()) throw EvaluationError("the test split is empty");
  const NormalizePolicy policy = model.data_config().normalize;
  const auto predictions = predict_classes(model, test, policy);
  std::vector<std::size_t> labels;
  labels.reserve(test.size());
  for (const auto& w : test) labels.push_back(w.label(model.task()));
  const ConfusionMatrix cm = confusion_matrix(predictions, labels, model.class_map());
  const MetricsReport report = classification_report(cm);

  json doc = report_to_json(report, cm);
  doc["task"] = std::string(task_name(model.task()));
  const fs::path report_json = cmd.out / "report.json";
  const fs::path report_txt = cmd.out / "report.txt";
  const fs::path confusion = cmd.out / "confusion.csv";
  write_file_atomic(report_json, doc.dump(1) + "\n");
  write_file_atomic(report_txt, render_report_table(report));
  write_file_atomic(confusion, confusion_csv(cm));
  log << render_report_table(report);
  json inputs = corpus_inputs(cmd.data);
  inputs.push_back(file_entry(cmd.checkpoint));
  if (!cmd.manifest.empty()) inputs.push_back(file_entry(cmd.manifest));
  write_run_manifest(cmd, {{"data", cli_data_config(model.data_config(), model.task())}},
                     inputs, outputs_of({report_json, report_txt, confusion}));
  return kExitOk;
}

std::vector<std::complex<float>> decode_iq(const std::string& bytes) {
  if (bytes.size() % 8 != 0) {
    throw FormatError("IQ input holds " + std::to_string(bytes.size()) +
                      " bytes, not a whole number of float32 I/Q pairs");
  }
  std::vector<std::complex<float>> out(bytes.size() / 8);
  auto word = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    }
    return std::bit_cast<float>(v);
  };
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {word(8 * i), word(8 * i + 4)};
  return out;
}

int do_classify(const Command& cmd, std::ostream& out, std::ostream& log) {
  const CnnModel model = load_checkpoint(cmd.checkpoint);
  std::string bytes;
  if (cmd.input.empty() || cmd.input == "-") {
    bytes.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    bytes = read_file(cmd.input);
  }
  const auto samples = decode_iq(bytes);
  const std::size_t windows = samples.size() / kWindowLength;
  if (windows == 0) {
    throw InputError("IQ input holds " + std::to_string(samples.size()) +
                     " samples; at least 1024 are needed");
  }
  if (samples.size() % kWindowLength != 0) {
    log << "ignoring " << samples.size() % kWindowLength << " trailing samples\n";
  }
  const NormalizePolicy policy = model.data_config().normalize;
  out << "window,offset,class";
  for (const auto& name : model.class_map()) out << ",p_" << name;
  out << '\n';
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < windows; start += kChunk) {
    const std::size_t n = std::min(kChunk, windows - start);
    std::vector<ChannelizedWindow> batch;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t offset = (start + i) * kWindowLength;
      batch.push_back(normalize_window(
          iq_to_channels(std::span(samples).subspan(offset, kWindowLength)), policy));
    }
    const auto preds = predict_batch(model, make_batch(batch));
    for (std::size_t i = 0; i < n; ++i) {
      out << start + i << ',' << (start + i) * kWindowLength << ',' << preds[i].class_name;
      for (float p : preds[i].probabilities) out << ',' << format_double(p);
      out << '\n';
    }
  }
  return kExitOk;
}

int do_export_embeddings(const Command& cmd, std::ostream& log) {
  const CnnModel model = load_checkpoint(cmd.checkpoint);
  const auto recordings = load_corpus(cmd.data);
  const auto windows = test_windows(cmd, model, recordings);
  const fs::path path = cmd.out / "embeddings.csv";
  const std::size_t rows =
      export_embeddings(model, windows, model.data_config().normalize, path);
  log << "wrote " << rows << " embeddings to " << path.string() << '\n';
  json inputs = corpus_inputs(cmd.data);
  inputs.push_back(file_entry(cmd.checkpoint));
  write_run_manifest(cmd, {{"data", cli_data_config(model.data_config(), model.task())}},
                     inputs, outputs_of({path}));
  return kExitOk;
}

int do_inspect(const Command& cmd, std::ostream& out) {
  const CnnModel model = load_checkpoint(cmd.checkpoint);
  out << "task: " << task_name(model.task()) << '\n';
  out << "classes:";
  for (std::size_t i = 0; i < model.num_classes(); ++i) {
    out << (i ? ", " : " ") << model.class_map()[i];
  }
  out << '\n';
  out << "parameters: " << count_parameters(model) << '\n';
  out << "train_config: " << train_config_to_json(model.train_config()).dump() << '\n';
  out << "data_config: " << data_config_to_json(model.data_config()).dump() << '\n';
  return kExitOk;
}

}  // namespace

int execute(const Command& cmd, std::ostream& out, std::ostream& log) {
  try {
    switch (cmd.subcommand) {
      case Subcommand::kGenerate: return do_generate(cmd, log);
      case Subcommand::kIngest: return do_ingest(cmd, log);
      case Subcommand::kTrain: return do_train(cmd, log);
      case Subcommand::kEvaluate: return do_evaluate(cmd, log);
      case Subcommand::kClassify: return do_classify(cmd, out, log);
      case Subcommand::kExportEmbeddings: return do_export_embeddings(cmd, log);
      case Subcommand::kInspect: return do_inspect(cmd, out);
    }
  } catch (const Error& e) {
    log << "specmon: " << error_kind_name(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    log << "specmon: I/O error: " << e.what() << '\n';
    return exit_code_for(ErrorKind::kIo);
  } catch (const std::exception& e) {
    log << "specmon: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  Command cmd;
  try {
    cmd = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    log << "specmon: usage error: " << e.what() << "\nrun 'specmon --help' for usage\n";
    return kExitUsage;
  } catch (const Error& e) {
    log << "specmon: " << error_kind_name(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return execute(cmd, out, log);
}

}  // namespace specmon::cli
