// Copyright 2026 The hpcdetect Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/rnn.hpp"

namespace hpcdetect {
namespace {

using nlohmann::json;

json flat(std::span<const double> values) { return json(std::vector<double>(values.begin(), values.end())); }

std::vector<double> read_array(const json& node, const std::string& what, std::size_t expected) {
  if (!node.is_array()) throw DataError("model file: '" + what + "' must be an array");
  if (node.size() != expected) {
    throw DataError("model file: '" + what + "' has " + std::to_string(node.size()) +
                    " entries, expected " + std::to_string(expected));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : node) {
    if (!v.is_number()) throw DataError("model file: non-finite weight in '" + what + "'");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DataError("model file: non-finite weight in '" + what + "'");
    out.push_back(d);
  }
  return out;
}

const json& member(const json& node, const char* key) {
  auto it = node.find(key);
  if (it == node.end()) throw DataError(std::string("model file: missing field '") + key + "'");
  return *it;
}

}  // namespace

std::string serialize_model(const ModelParameters& model) {
  json weights = json::object();
  const auto names = ParameterSet::tensor_names();
  const auto tensors = model.weights.tensors();
  for (std::size_t k = 0; k < ParameterSet::kTensorCount; ++k) {
    if (names[k] == "dense_bias") {
      weights[std::string(names[k])] = tensors[k][0];
    } else {
      weights[std::string(names[k])] = flat(tensors[k]);
    }
  }
  json doc = {
      {"format_version", kModelFormatVersion},
      {"group", std::string(group_name(model.group))},
      {"metric_names", metric_names(model.group)},
      {"normalizer",
       {{"mean", flat({model.normalizer.mean.data(), static_cast<std::size_t>(model.normalizer.mean.size())})},
        {"std", flat({model.normalizer.stddev.data(), static_cast<std::size_t>(model.normalizer.stddev.size())})}}},
      {"dims", {{"F", model.input_dim()}, {"H", model.hidden_dim()}}},
      {"weights", weights},
  };
  return doc.dump(2) + "\n";
}

ModelParameters deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("model file: top level must be an object");
  const auto& version = member(doc, "format_version");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion) {
    throw DataError("model file: unsupported format_version " + version.dump());
  }
  const auto& group_node = member(doc, "group");
  const auto group = group_node.is_string() ? parse_group(group_node.get<std::string>()) : std::nullopt;
  if (!group) throw DataError("model file: unknown group " + group_node.dump());
  if (member(doc, "metric_names") != json(metric_names(*group))) {
    throw DataError("model file: metric_names do not match group " + std::string(group_name(*group)));
  }

  const auto& dims = member(doc, "dims");
  const auto& f_node = member(dims, "F");
  const auto& h_node = member(dims, "H");
  if (!f_node.is_number_integer() || !h_node.is_number_integer()) {
    throw DataError("model file: dims must be integers");
  }
  const int features = f_node.get<int>();
  const int hidden = h_node.get<int>();
  if (features != metric_count(*group)) {
    throw DataError("model file: dims.F=" + std::to_string(features) + " inconsistent with group " +
                    std::string(group_name(*group)));
  }
  if (hidden < 1) throw DataError("model file: dims.H must be positive");

  ModelParameters model;
  model.group = *group;
  model.weights = ParameterSet::zeros(features, hidden);
  const auto& weights = member(doc, "weights");
  const auto names = ParameterSet::tensor_names();
  auto tensors = model.weights.tensors();
  for (std::size_t k = 0; k < ParameterSet::kTensorCount; ++k) {
    const std::string name(names[k]);
    const auto& node = member(weights, name.c_str());
    std::vector<double> values;
    if (name == "dense_bias") {
      values = read_array(node.is_array() ? node : json::array({node}), name, 1);
    } else {
      values = read_array(node, name, tensors[k].size());
    }
    std::copy(values.begin(), values.end(), tensors[k].begin());
  }

  const auto& norm = member(doc, "normalizer");
  const auto mean = read_array(member(norm, "mean"), "normalizer.mean", static_cast<std::size_t>(features));
  const auto stddev = read_array(member(norm, "std"), "normalizer.std", static_cast<std::size_t>(features));
  model.normalizer.mean = Eigen::Map<const Vector>(mean.data(), features);
  model.normalizer.stddev = Eigen::Map<const Vector>(stddev.data(), features);
  if ((model.normalizer.stddev.array() < 0.0).any()) {
    throw DataError("model file: negative normalizer std");
  }
  return model;
}

void save_model(const ModelParameters& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << serialize_model(model);
  if (!out) throw DataError("failed writing '" + path + "'");
}

ModelParameters load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace hpcdetect
