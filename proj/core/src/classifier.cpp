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


#include "specmon/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "specmon/error.hpp"
#include "specmon/runtime.hpp"

namespace specmon {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
nn::Tensor<T> uniform_tensor(nn::Shape shape, double bound, std::mt19937_64& rng) {
  nn::Tensor<T> t(std::move(shape));
  for (T& v : t.data()) v = static_cast<T>((2.0 * unit_uniform(rng) - 1.0) * bound);
  return t;
}

template <typename T>
std::shared_ptr<nn::Tensor<T>> trainable(nn::Tensor<T> value) {
  return nn::Graph<T>::leaf(std::move(value), true);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ConfigError("learning rate must be positive and finite");
  }
  if (evals_per_epoch == 0) throw ConfigError("evals per epoch must be at least 1");
}

template <typename T>
BasicCnn<T>::BasicCnn(TaskKind task, std::uint64_t seed)
    : task_(task), class_map_(class_names(task)) {
  std::mt19937_64 rng(seed);
  std::size_t in = kFeatureChannels;
  for (std::size_t i = 0; i < kConvChannels.size(); ++i) {
    const std::size_t out = kConvChannels[i];
    const double fan_in = static_cast<double>(in * kConvKernel);
    const std::string id = std::to_string(i + 1);
    params_.push_back({"conv" + id + ".weight",
                       trainable(uniform_tensor<T>({out, in, kConvKernel},
                                                   1.0 / std::sqrt(fan_in), rng))});
    params_.push_back({"conv" + id + ".bias",
                       trainable(uniform_tensor<T>({out}, 1.0 / std::sqrt(fan_in), rng))});
    params_.push_back({"bn" + id + ".gamma", trainable(nn::Tensor<T>({out}, T{1}))});
    params_.push_back({"bn" + id + ".beta", trainable(nn::Tensor<T>({out}, T{0}))});
    norms_.emplace_back(out);
    in = out;
  }
  const std::size_t flat = activation_lengths().flatten;
  const std::size_t classes = class_map_.size();
  params_.push_back({"fc1.weight",
                     trainable(uniform_tensor<T>({kHiddenUnits, flat},
                                                 1.0 / std::sqrt(double(flat)), rng))});
  params_.push_back({"fc1.bias", trainable(uniform_tensor<T>(
                                     {kHiddenUnits}, 1.0 / std::sqrt(double(flat)), rng))});
  params_.push_back({"fc2.weight",
                     trainable(uniform_tensor<T>({classes, kHiddenUnits},
                                                 1.0 / std::sqrt(double(kHiddenUnits)), rng))});
  params_.push_back({"fc2.bias",
                     trainable(uniform_tensor<T>(
                         {classes}, 1.0 / std::sqrt(double(kHiddenUnits)), rng))});
}

template <typename T>
BasicCnn<T>::BasicCnn(const BasicCnn& other)
    : task_(other.task_),
      class_map_(other.class_map_),
      norms_(other.norms_),
      train_config_(other.train_config_),
      data_config_(other.data_config_) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) {
    nn::Tensor<T> copy(p.tensor->shape(),
                       std::vector<T>(p.tensor->data().begin(), p.tensor->data().end()));
    params_.push_back({p.name, trainable(std::move(copy))});
  }
}

template <typename T>
BasicCnn<T>& BasicCnn<T>::operator=(const BasicCnn& other) {
  if (this != &other) *this = BasicCnn(other);
  return *this;
}

template <typename T>
template <typename Norms>
typename BasicCnn<T>::Node BasicCnn<T>::run(nn::Graph<T>& graph, const Node& batch,
                                            nn::Mode mode,
                                            std::mt19937_64* dropout_rng,
                                            Norms& norms, ForwardTrace* trace,
                                            bool stop_at_hidden, bool dropout) const {
  check_input_shape(batch->shape());
  if (batch->rank() != 3) throw DimensionError("forward expects a batch [B, 4, 1024]");
  if (trace) *trace = ForwardTrace{};
  Node x = batch;
  for (std::size_t i = 0; i < kConvChannels.size(); ++i) {
    x = graph.conv1d(x, param(4 * i), param(4 * i + 1));
    x = graph.batchnorm1d(x, param(4 * i + 2), param(4 * i + 3), norms[i], mode);
    x = graph.relu(x);
    if (trace) trace->conv.push_back(x->shape());
    x = graph.maxpool1d(x);
    if (trace) trace->pool.push_back(x->shape());
    if (dropout) x = graph.dropout(x, kConvDropout, mode, dropout_rng);
  }
  x = graph.flatten(x);
  if (trace) trace->flatten = x->shape();
  x = graph.relu(graph.dense(x, param(12), param(13)));
  if (trace) trace->hidden = x->shape();
  if (stop_at_hidden) return x;
  if (dropout) x = graph.dropout(x, kHiddenDropout, mode, dropout_rng);
  x = graph.dense(x, param(14), param(15));
  if (trace) trace->logits = x->shape();
  return x;
}

template <typename T>
typename BasicCnn<T>::Node BasicCnn<T>::forward(nn::Graph<T>& graph, const Node& batch,
                                                nn::Mode mode,
                                                std::mt19937_64* dropout_rng,
                                                ForwardTrace* trace) {
  return run(graph, batch, mode, dropout_rng, norms_, trace, false, true);
}

template <typename T>
nn::Tensor<T> BasicCnn<T>::logits(const nn::Tensor<T>& batch, ForwardTrace* trace) const {
  nn::Graph<T> graph(false);
  const auto& norms = norms_;
  Node in = nn::Graph<T>::leaf(batch.rank() == 2
                                   ? batch.reshaped({1, batch.dim(0), batch.dim(1)})
                                   : batch.reshaped(batch.shape()));
  return *run(graph, in, nn::Mode::kEval, nullptr, norms, trace, false, false);
}

template <typename T>
nn::Tensor<T> BasicCnn<T>::embeddings(const nn::Tensor<T>& batch) const {
  nn::Graph<T> graph(false);
  const auto& norms = norms_;
  Node in = nn::Graph<T>::leaf(batch.rank() == 2
                                   ? batch.reshaped({1, batch.dim(0), batch.dim(1)})
                                   : batch.reshaped(batch.shape()));
  return *run(graph, in, nn::Mode::kEval, nullptr, norms, nullptr, true, false);
}

template <typename T>
void BasicCnn<T>::recalibrate_norms(std::span<const nn::Tensor<T>> batches) {
  if (batches.empty()) throw InputError("batchnorm recalibration needs at least one batch");
  std::vector<nn::BatchNormState<T>> work = norms_;
  for (std::size_t k = 0; k < batches.size(); ++k) {
    // Momentum 1/(k+1) turns the running update into a plain average of the
    // per-batch statistics.
    for (auto& n : work) n.momentum = static_cast<T>(1.0 / static_cast<double>(k + 1));
    nn::Graph<T> graph(false);
    run(graph, nn::Graph<T>::leaf(batches[k].reshaped(batches[k].shape())),
        nn::Mode::kTrain, nullptr, work, nullptr, false, false);
  }
  for (std::size_t i = 0; i < norms_.size(); ++i) {
    norms_[i].running_mean = std::move(work[i].running_mean);
    norms_[i].running_var = std::move(work[i].running_var);
  }
}

CnnModel build_model(TaskKind task, std::uint64_t seed) { return CnnModel(task, seed); }

template <typename T>
std::size_t count_parameters(const BasicCnn<T>& model) {
  std::size_t total = 0;
  for (const auto& p : model.parameters()) total += p.tensor->size();
  return total;
}

void check_input_shape(const nn::Shape& shape) {
  const bool single = shape.size() == 2;
  const bool batch = shape.size() == 3;
  const std::size_t c = single ? shape[0] : batch ? shape[1] : 0;
  const std::size_t l = single ? shape[1] : batch ? shape[2] : 0;
  if ((!single && !batch) || c != kFeatureChannels || l != kWindowLength ||
      (batch && shape[0] == 0)) {
    throw DimensionError("input has shape " + nn::shape_string(shape) +
                         "; expected [4, 1024] or [B, 4, 1024]");
  }
}

nn::Tensor<float> make_batch(std::span<const ChannelizedWindow> windows) {
  if (windows.empty()) throw InputError("cannot build a batch from zero windows");
  const std::size_t per = kFeatureChannels * kWindowLength;
  nn::Tensor<float> out({windows.size(), kFeatureChannels, kWindowLength});
  for (std::size_t i = 0; i < windows.size(); ++i) {
    check_input_shape(windows[i].data.shape());
    std::copy_n(windows[i].data.data().begin(), per, out.data().begin() + i * per);
  }
  return out;
}

nn::Tensor<float> make_batch(std::span<const LabeledWindow> windows,
                             NormalizePolicy policy) {
  if (windows.empty()) throw InputError("cannot build a batch from zero windows");
  const std::size_t per = kFeatureChannels * kWindowLength;
  nn::Tensor<float> out({windows.size(), kFeatureChannels, kWindowLength});
  parallel_for(0, windows.size(), [&](std::size_t i) {
    ChannelizedWindow w = windows[i].channels(policy);
    std::copy_n(w.data.data().begin(), per, out.data().begin() + i * per);
  });
  return out;
}

std::size_t argmax_class(std::span<const float> scores) {
  if (scores.empty()) throw InputError("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

namespace {

std::vector<float> softmax(std::span<const float> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> e(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - mx);
    total += e[i];
  }
  std::vector<float> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<float>(e[i] / total);
  return p;
}

}  // namespace

std::vector<Prediction> predict_batch(const CnnModel& model,
                                      const nn::Tensor<float>& batch) {
  nn::Tensor<float> out = model.logits(batch);
  const std::size_t classes = model.num_classes();
  std::vector<Prediction> preds(out.dim(0));
  for (std::size_t n = 0; n < preds.size(); ++n) {
    std::span<const float> row(out.data().data() + n * classes, classes);
    preds[n].class_index = argmax_class(row);
    preds[n].class_name = model.class_map()[preds[n].class_index];
    preds[n].probabilities = softmax(row);
  }
  return preds;
}

Prediction predict(const CnnModel& model, const ChannelizedWindow& window) {
  check_input_shape(window.data.shape());
  return predict_batch(model, window.data).front();
}

std::vector<float> extract_embedding(const CnnModel& model,
                                     const ChannelizedWindow& window) {
  check_input_shape(window.data.shape());
  nn::Tensor<float> h = model.embeddings(window.data);
  return h.values();
}

std::size_t steps_per_epoch(std::size_t samples, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  return (samples + batch_size - 1) / batch_size;
}

std::vector<std::size_t> predict_classes(const CnnModel& model,
                                         std::span<const LabeledWindow> windows,
                                         NormalizePolicy policy,
                                         std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  std::vector<std::size_t> out;
  out.reserve(windows.size());
  const std::size_t classes = model.num_classes();
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, windows.size() - start);
    nn::Tensor<float> logits = model.logits(make_batch(windows.subspan(start, n), policy));
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(argmax_class({logits.data().data() + i * classes, classes}));
    }
  }
  return out;
}

namespace {

struct Snapshot {
  std::vector<std::vector<float>> values;
  std::vector<nn::BatchNormState<float>> norms;
};

Snapshot take_snapshot(const CnnModel& model) {
  Snapshot s;
  for (const auto& p : model.parameters()) s.values.push_back(p.tensor->values());
  s.norms = model.norm_states();
  return s;
}

void restore_snapshot(CnnModel& model, const Snapshot& s) {
  auto& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(s.values[i].begin(), s.values[i].end(), params[i].tensor->data().begin());
  }
  model.norm_states() = s.norms;
}

double accuracy(const CnnModel& model, std::span<const LabeledWindow> windows,
                NormalizePolicy policy, std::size_t batch_size) {
  const std::vector<std::size_t> pred = predict_classes(model, windows, policy, batch_size);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == windows[i].label(model.task())) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

TrainHistory train(CnnModel& model, std::span<const LabeledWindow> train_set,
                   std::span<const LabeledWindow> val_set, const TrainConfig& cfg,
                   NormalizePolicy policy, const TrainObserver& observer) {
  cfg.validate();
  if (train_set.empty()) throw InputError("training set is empty");
  if (val_set.empty()) throw InputError("validation set is empty");
  const TaskKind task = model.task();
  for (const auto* set : {&train_set, &val_set}) {
    for (const LabeledWindow& w : *set) {
      if (w.label(task) >= model.num_classes()) {
        throw LabelError("label outside the model's class map");
      }
    }
  }

  TrainHistory history;
  history.steps_per_epoch = steps_per_epoch(train_set.size(), cfg.batch_size);
  const std::size_t steps = history.steps_per_epoch;
  const std::size_t evals = std::min(cfg.evals_per_epoch, steps);

  nn::AdamOptions opts;
  opts.lr = cfg.lr;
  nn::Adam<float> adam(model.parameters(), opts);
  std::mt19937_64 dropout_rng(derive_seed(cfg.seed, {0x64726f70}));

  std::vector<nn::Tensor<float>> recal_batches;
  const std::size_t recal_count = std::min(cfg.recalibration_windows, train_set.size());
  for (std::size_t start = 0; start < recal_count; start += cfg.batch_size) {
    const std::size_t n = std::min(cfg.batch_size, recal_count - start);
    recal_batches.push_back(make_batch(train_set.subspan(start, n), policy));
  }

  std::vector<std::size_t> order(train_set.size());
  std::vector<LabeledWindow> batch_windows;
  std::vector<std::size_t> labels;
  Snapshot best;
  double best_acc = -1.0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      std::mt19937_64 rng(derive_seed(cfg.seed, {0x73687566, epoch}));
      std::shuffle(order.begin(), order.end(), rng);
    }
    std::size_t next_eval = 1;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t start = step * cfg.batch_size;
      const std::size_t n = std::min(cfg.batch_size, train_set.size() - start);
      batch_windows.clear();
      labels.clear();
      for (std::size_t i = 0; i < n; ++i) {
        batch_windows.push_back(train_set[order[start + i]]);
        labels.push_back(batch_windows.back().label(task));
      }
      nn::Graph<float> graph;
      auto input = nn::Graph<float>::leaf(make_batch(batch_windows, policy));
      adam.zero_grad();
      auto logits = model.forward(graph, input, nn::Mode::kTrain, &dropout_rng);
      auto loss = graph.softmax_cross_entropy(logits, labels);
      const double value = (*loss)[0];
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                            " batch " + std::to_string(step + 1));
      }
      graph.backward(loss);
      adam.step();
      loss_sum += value;
      ++loss_count;

      // Evaluation points split the epoch into `evals` near-equal parts.
      if ((step + 1) * evals >= next_eval * steps) {
        ++next_eval;
        TrainRecord rec;
        rec.epoch = static_cast<double>(epoch) +
                    static_cast<double>(step + 1) / static_cast<double>(steps);
        rec.train_loss = loss_sum / static_cast<double>(loss_count);
        loss_sum = 0.0;
        loss_count = 0;
        if (!recal_batches.empty()) model.recalibrate_norms(recal_batches);
        rec.val_accuracy = accuracy(model, val_set, policy, cfg.batch_size);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
        history.records.push_back(rec);
        if (rec.val_accuracy > best_acc) {
          best_acc = rec.val_accuracy;
          history.best_record = history.records.size() - 1;
          best = take_snapshot(model);
        }
        if (observer) observer(rec);
      }
    }
  }
  restore_snapshot(model, best);
  model.set_train_config(cfg);
  return history;
}

template class BasicCnn<float>;
template class BasicCnn<double>;
template std::size_t count_parameters<float>(const BasicCnn<float>&);
template std::size_t count_parameters<double>(const BasicCnn<double>&);

}  // namespace specmon
