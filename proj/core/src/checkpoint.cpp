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


#include "specmon/checkpoint.hpp"

#include <bit>
#include <limits>
#include <vector>

#include "specmon/error.hpp"
#include "specmon/io.hpp"

namespace specmon {

using nlohmann::json;

namespace {

static_assert(std::numeric_limits<float>::is_iec559);

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(std::string_view bytes, std::size_t at) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
  }
  return value;
}

struct TensorEntry {
  std::string name;
  nn::Shape shape;
  std::string kind;
};

std::vector<TensorEntry> tensor_layout(const CnnModel& model) {
  std::vector<TensorEntry> out;
  for (const auto& p : model.parameters()) {
    out.push_back({p.name, p.tensor->shape(), "parameter"});
  }
  const auto& norms = model.norm_states();
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const std::string id = "bn" + std::to_string(i + 1);
    out.push_back({id + ".running_mean", {norms[i].running_mean.size()}, "buffer"});
    out.push_back({id + ".running_var", {norms[i].running_var.size()}, "buffer"});
  }
  return out;
}

std::vector<float*> tensor_storage(CnnModel& model) {
  std::vector<float*> out;
  for (auto& p : model.parameters()) out.push_back(p.tensor->data().data());
  for (auto& n : model.norm_states()) {
    out.push_back(n.running_mean.data());
    out.push_back(n.running_var.data());
  }
  return out;
}

}  // namespace

json train_config_to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},         {"batch_size", cfg.batch_size},
          {"lr", cfg.lr},                 {"seed", cfg.seed},
          {"shuffle", cfg.shuffle},       {"evals_per_epoch", cfg.evals_per_epoch},
          {"recalibration_windows", cfg.recalibration_windows}};
}

TrainConfig train_config_from_json(const json& doc) {
  TrainConfig cfg;
  cfg.epochs = doc.at("epochs").get<std::size_t>();
  cfg.batch_size = doc.at("batch_size").get<std::size_t>();
  cfg.lr = doc.at("lr").get<double>();
  cfg.seed = doc.at("seed").get<std::uint64_t>();
  cfg.shuffle = doc.at("shuffle").get<bool>();
  cfg.evals_per_epoch = doc.at("evals_per_epoch").get<std::size_t>();
  cfg.recalibration_windows = doc.at("recalibration_windows").get<std::size_t>();
  return cfg;
}

json data_config_to_json(const DataConfig& cfg) {
  return {{"split", {cfg.split.train, cfg.split.val, cfg.split.test}},
          {"split_policy", std::string(split_policy_name(cfg.policy))},
          {"normalize", std::string(normalize_policy_name(cfg.normalize))},
          {"seed", cfg.seed}};
}

DataConfig data_config_from_json(const json& doc) {
  DataConfig cfg;
  const auto& split = doc.at("split");
  if (!split.is_array() || split.size() != 3) {
    throw FormatError("data config split must hold three sizes");
  }
  cfg.split = {split[0].get<std::size_t>(), split[1].get<std::size_t>(),
               split[2].get<std::size_t>()};
  cfg.policy = parse_split_policy(doc.at("split_policy").get<std::string>());
  cfg.normalize = parse_normalize_policy(doc.at("normalize").get<std::string>());
  cfg.seed = doc.at("seed").get<std::uint64_t>();
  return cfg;
}

json checkpoint_header(const CnnModel& model) {
  json tensors = json::array();
  for (const auto& t : tensor_layout(model)) {
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"kind", t.kind}});
  }
  const auto& bn = model.norm_states().front();
  return {
      {"task", std::string(task_name(model.task()))},
      {"class_map", model.class_map()},
      {"input", {kFeatureChannels, kWindowLength}},
      {"layers",
       {{"conv_channels", kConvChannels},
        {"conv_kernel", kConvKernel},
        {"hidden_units", kHiddenUnits},
        {"conv_dropout", kConvDropout},
        {"hidden_dropout", kHiddenDropout},
        {"batchnorm_momentum", static_cast<double>(bn.momentum)},
        {"batchnorm_eps", static_cast<double>(bn.eps)}}},
      {"tensors", tensors},
      {"parameter_count", count_parameters(model)},
      {"train_config", train_config_to_json(model.train_config())},
      {"data_config", data_config_to_json(model.data_config())},
      {"seed", model.train_config().seed},
  };
}

std::string serialize_checkpoint(const CnnModel& model) {
  const std::string header = checkpoint_header(model).dump();
  std::string payload;
  auto& mutable_model = const_cast<CnnModel&>(model);  // storage is only read
  const auto layout = tensor_layout(model);
  const auto storage = tensor_storage(mutable_model);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const std::size_t n = nn::shape_size(layout[i].shape);
    for (std::size_t j = 0; j < n; ++j) {
      put_le(payload, std::bit_cast<std::uint32_t>(storage[i][j]));
    }
  }
  std::string out(kCheckpointMagic);
  put_le(out, kCheckpointVersion);
  put_le(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out += payload;
  put_le(out, crc32(payload));
  return out;
}

CnnModel deserialize_checkpoint(std::string_view bytes) {
  if (bytes.empty()) throw CorruptionError("checkpoint is empty");
  if (bytes.size() < kCheckpointMagic.size()) {
    throw CorruptionError("checkpoint is truncated inside the magic bytes");
  }
  if (bytes.substr(0, 4) != kCheckpointMagic) {
    throw FormatError("not a checkpoint: bad magic bytes");
  }
  if (bytes.size() < 10) throw CorruptionError("checkpoint is truncated inside the preamble");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t header_len = get_le<std::uint32_t>(bytes, 6);
  if (bytes.size() < 10 + header_len) {
    throw CorruptionError("checkpoint is truncated inside the header");
  }
  json header;
  try {
    header = json::parse(bytes.substr(10, header_len));
  } catch (const json::exception& e) {
    throw CorruptionError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }

  try {
    const TaskKind task = parse_task(header.at("task").get<std::string>());
    CnnModel model = build_model(task, 0);
    if (header.at("class_map").get<std::vector<std::string>>() != model.class_map()) {
      throw FormatError("checkpoint class map does not match task " +
                        std::string(task_name(task)));
    }
    const auto layout = tensor_layout(model);
    const auto& tensors = header.at("tensors");
    if (tensors.size() != layout.size()) {
      throw FormatError("checkpoint lists " + std::to_string(tensors.size()) +
                        " tensors, expected " + std::to_string(layout.size()));
    }
    std::size_t floats = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto name = tensors[i].at("name").get<std::string>();
      const auto shape = tensors[i].at("shape").get<nn::Shape>();
      if (name != layout[i].name || shape != layout[i].shape) {
        throw FormatError("checkpoint tensor " + std::to_string(i) + " is " + name + " " +
                          nn::shape_string(shape) + ", expected " + layout[i].name +
                          " " + nn::shape_string(layout[i].shape));
      }
      floats += nn::shape_size(shape);
    }
    const std::size_t payload_at = 10 + header_len;
    const std::size_t payload_len = floats * 4;
    if (bytes.size() < payload_at + payload_len + 4) {
      throw CorruptionError("checkpoint is truncated inside the payload");
    }
    if (bytes.size() > payload_at + payload_len + 4) {
      throw CorruptionError("checkpoint has trailing bytes after the checksum");
    }
    const std::string_view payload = bytes.substr(payload_at, payload_len);
    const auto stored = get_le<std::uint32_t>(bytes, payload_at + payload_len);
    if (stored != crc32(payload)) throw CorruptionError("checkpoint checksum mismatch");

    const auto storage = tensor_storage(model);
    std::size_t at = 0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const std::size_t n = nn::shape_size(layout[i].shape);
      for (std::size_t j = 0; j < n; ++j, at += 4) {
        storage[i][j] = std::bit_cast<float>(get_le<std::uint32_t>(payload, at));
      }
    }
    const auto& layers = header.at("layers");
    for (auto& n : model.norm_states()) {
      n.momentum = layers.at("batchnorm_momentum").get<float>();
      n.eps = layers.at("batchnorm_eps").get<float>();
    }
    model.set_train_config(train_config_from_json(header.at("train_config")));
    model.set_data_config(data_config_from_json(header.at("data_config")));
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header is malformed: ") + e.what());
  }
}

void save_checkpoint(const CnnModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(model));
}

CnnModel load_checkpoint(const std::filesystem::path& path) {
  try {
    return deserialize_checkpoint(read_file(path));
  } catch (const CorruptionError& e) {
    throw CorruptionError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace specmon
