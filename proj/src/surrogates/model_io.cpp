// Copyright 2026 The pemsim Authors
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

#include <fstream>
#include <stdexcept>

#include "pemsim/surrogates/surrogate_model.hpp"

namespace pemsim::surrogates {

using nlohmann::json;

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::gt: return "gt";
    case SurrogateKind::gf: return "gf";
    case SurrogateKind::lr: return "lr";
    case SurrogateKind::ns: return "ns";
  }
  return "?";
}

SurrogateKind surrogate_kind_from_string(const std::string& name) {
  if (name == "gt") return SurrogateKind::gt;
  if (name == "gf") return SurrogateKind::gf;
  if (name == "lr") return SurrogateKind::lr;
  if (name == "ns") return SurrogateKind::ns;
  throw std::invalid_argument("unknown surrogate kind: " + name);
}

SurrogateKind SurrogateModel::kind() const {
  return static_cast<SurrogateKind>(storage_.index());
}

std::vector<Detection> SurrogateModel::perceive(std::span<const SalientVector> salients,
                                                std::mt19937_64& rng) const {
  std::vector<Detection> out;
  out.reserve(salients.size());
  if (const auto* ns = std::get_if<NeuralSurrogate>(&storage_)) {
    const std::vector<NSOutput> heads = ns->predict(salients);
    for (std::size_t i = 0; i < salients.size(); ++i) out.push_back(ns_sample(heads[i], salients[i], rng));
  } else if (const auto* lr = std::get_if<LogisticSurrogate>(&storage_)) {
    for (const auto& s : salients) out.push_back(lr_apply(*lr, s, rng));
  } else if (const auto* gf = std::get_if<GFParams>(&storage_)) {
    for (const auto& s : salients) out.push_back(gf_sample(*gf, s, rng));
  } else {
    for (const auto& s : salients) out.push_back(gt_passthrough(s));
  }
  return out;
}

std::vector<double> SurrogateModel::detection_probabilities(std::span<const SalientVector> salients) const {
  std::vector<double> out(salients.size(), 1.0);
  if (const auto* ns = std::get_if<NeuralSurrogate>(&storage_)) {
    const std::vector<NSOutput> heads = ns->predict(salients);
    for (std::size_t i = 0; i < heads.size(); ++i) out[i] = heads[i].p_det;
  } else if (const auto* lr = std::get_if<LogisticSurrogate>(&storage_)) {
    for (std::size_t i = 0; i < salients.size(); ++i) out[i] = lr->probability(salients[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json standardizer_to_json(const Standardizer& s) { return {{"mean", vec_to_json(s.mean)}, {"std", vec_to_json(s.std)}}; }

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = vec_from_json(j.at("mean"));
  s.std = vec_from_json(j.at("std"));
  if (s.mean.size() != s.std.size()) throw std::invalid_argument("model: standardizer size mismatch");
  return s;
}

json layer_to_json(const DenseLayer& l) {
  // Row-major weights.
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(l.weight.size()));
  for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
    for (Eigen::Index k = 0; k < l.weight.cols(); ++k) w.push_back(l.weight(i, k));
  return {{"rows", l.weight.rows()}, {"cols", l.weight.cols()}, {"weight", w}, {"bias", vec_to_json(l.bias)}};
}

DenseLayer layer_from_json(const json& j) {
  DenseLayer l;
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("weight").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w.size()) != rows * cols) throw std::invalid_argument("model: weight size mismatch");
  l.weight.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) l.weight(i, k) = w[static_cast<std::size_t>(i * cols + k)];
  l.bias = vec_from_json(j.at("bias"));
  return l;
}

}  // namespace

json to_json(const SurrogateModel& model) {
  json j = {{"format", "pemsim-surrogate"},
            {"version", kModelFormatVersion},
            {"kind", to_string(model.kind())},
            {"features", feature_names()}};
  const auto& st = model.storage();
  if (const auto* ns = std::get_if<NeuralSurrogate>(&st)) {
    const MLPParams& p = ns->params();
    json layers = json::array();
    for (const auto& l : p.layers) layers.push_back(layer_to_json(l));
    j["standardizer"] = standardizer_to_json(ns->standardizer());
    j["ns"] = {{"width", p.shape.width},     {"blocks", p.shape.blocks},
               {"input_dim", p.shape.input_dim}, {"output_dim", p.shape.output_dim},
               {"dropout", p.dropout},       {"velocity_head", ns->velocity_head()},
               {"layers", layers}};
  } else if (const auto* lr = std::get_if<LogisticSurrogate>(&st)) {
    j["standardizer"] = standardizer_to_json(lr->standardizer());
    j["lr"] = {{"weights", vec_to_json(lr->params().weights)}};
  } else if (const auto* gf = std::get_if<GFParams>(&st)) {
    json pos = json::array();
    json vel = json::array();
    for (int a = 0; a < 2; ++a) {
      pos.push_back({{"mean", gf->position[a].mean}, {"std", gf->position[a].std}});
      vel.push_back({{"loc", gf->velocity[a].loc}, {"scale", gf->velocity[a].scale}, {"dof", gf->velocity[a].dof}});
    }
    j["gf"] = {{"position", pos}, {"velocity", vel}};
  }
  return j;
}

SurrogateModel model_from_json(const json& j) {
  if (j.value("format", "") != "pemsim-surrogate") throw std::invalid_argument("model: unrecognised format");
  if (j.at("version").get<int>() != kModelFormatVersion) throw std::invalid_argument("model: unsupported version");
  if (j.at("features").get<std::vector<std::string>>() != feature_names())
    throw std::invalid_argument("model: feature schema mismatch");
  switch (surrogate_kind_from_string(j.at("kind").get<std::string>())) {
    case SurrogateKind::gt:
      return SurrogateModel(GroundTruthModel{});
    case SurrogateKind::gf: {
      GFParams p;
      const json& g = j.at("gf");
      for (int a = 0; a < 2; ++a) {
        p.position[a] = {g.at("position")[a].at("mean").get<double>(), g.at("position")[a].at("std").get<double>()};
        p.velocity[a] = {g.at("velocity")[a].at("loc").get<double>(), g.at("velocity")[a].at("scale").get<double>(),
                         g.at("velocity")[a].at("dof").get<double>()};
      }
      return SurrogateModel(p);
    }
    case SurrogateKind::lr:
      return SurrogateModel(
          LogisticSurrogate(LRParams{vec_from_json(j.at("lr").at("weights"))}, standardizer_from_json(j.at("standardizer"))));
    case SurrogateKind::ns: {
      const json& n = j.at("ns");
      MLPParams p;
      p.shape = {n.at("input_dim").get<int>(), n.at("width").get<int>(), n.at("blocks").get<int>(),
                 n.at("output_dim").get<int>()};
      p.dropout = n.at("dropout").get<double>();
      for (const auto& l : n.at("layers")) p.layers.push_back(layer_from_json(l));
      return SurrogateModel(
          NeuralSurrogate(std::move(p), standardizer_from_json(j.at("standardizer")), n.at("velocity_head").get<bool>()));
    }
  }
  throw std::invalid_argument("model: unknown kind");
}

void save_model(const SurrogateModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << to_json(model).dump(1) << '\n';
}

SurrogateModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read model file " + path.string());
  return model_from_json(json::parse(in));
}

}  // namespace pemsim::surrogates
