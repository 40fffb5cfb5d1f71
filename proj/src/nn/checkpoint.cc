#include "ukit/nn/checkpoint.h"

#include <fstream>
#include <sstream>

#include "ukit/errors.h"
#include "ukit/io.h"

namespace ukit::nn {

using nlohmann::ordered_json;

std::string activation_name(Activation kind) {
  switch (kind) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
  }
  return "relu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "' (expected identity, relu or tanh)");
}

ordered_json model_to_json(const Model& model) {
  ordered_json j;
  j["format"] = "ukit.model";
  j["version"] = kCheckpointVersion;
  j["seed"] = model.seed();
  j["input_dim"] = model.input_dim();
  j["num_classes"] = model.num_classes();
  ordered_json layers = ordered_json::array();
  for (const Layer& layer : model.layers()) {
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
      layers.push_back({{"type", "linear"}, {"in", lin->in}, {"out", lin->out}});
    } else {
      layers.push_back({{"type", "activation"},
                        {"kind", activation_name(std::get<ActivationLayer>(layer).kind)}});
    }
  }
  j["layers"] = std::move(layers);
  ordered_json adapters = ordered_json::array();
  for (const LowRankAdapter& a : model.adapters()) {
    adapters.push_back({{"layer", a.target_layer}, {"rank", a.rank}, {"scale", a.scale}});
  }
  j["adapters"] = std::move(adapters);
  j["params"] = std::vector<double>(model.params().begin(), model.params().end());
  return j;
}

Model model_from_json(const ordered_json& j) {
  try {
    if (j.at("format") != "ukit.model") throw ConfigError("not a ukit model record");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    std::vector<Layer> layers;
    for (const auto& l : j.at("layers")) {
      const std::string type = l.at("type");
      if (type == "linear") {
        layers.push_back(LinearLayer{l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(), 0});
      } else if (type == "activation") {
        layers.push_back(ActivationLayer{activation_from_string(l.at("kind"))});
      } else {
        throw ConfigError("unknown layer type '" + type + "'");
      }
    }
    Model model(j.at("input_dim").get<std::size_t>(), std::move(layers),
                j.at("seed").get<std::uint64_t>());
    std::vector<double> params = j.at("params").get<std::vector<double>>();
    if (params.size() < model.base_param_count()) throw ShapeError("checkpoint has too few parameters");
    std::vector<double> base(params.begin(), params.begin() + model.base_param_count());
    model.set_params(std::move(base));
    std::size_t cursor = model.base_param_count();
    for (const auto& a : j.at("adapters")) {
      LowRankAdapter adapter{a.at("layer").get<std::size_t>(), a.at("rank").get<std::size_t>(),
                             a.at("scale").get<double>(), 0};
      const LinearLayer& lin = model.linear(adapter.target_layer);
      const std::size_t n = adapter.rank * (lin.in + lin.out);
      if (cursor + n > params.size()) throw ShapeError("checkpoint adapter parameters truncated");
      model.append_adapter(adapter, std::span<const double>(params).subspan(cursor, n));
      cursor += n;
    }
    if (cursor != params.size()) throw ShapeError("checkpoint has trailing parameters");
    if (model.num_classes() != j.at("num_classes").get<std::size_t>()) {
      throw ShapeError("checkpoint class count disagrees with its layers");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model record: ") + e.what());
  }
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  ordered_json j = model_to_json(checkpoint.model);
  j["metadata"] = checkpoint.metadata;
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  Checkpoint out;
  out.model = model_from_json(j);
  if (j.contains("metadata")) out.metadata = j["metadata"];
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ResolutionError("checkpoint not found: " + path.string());
  }
  return parse_checkpoint(read_file(path));
}

}  // namespace ukit::nn
