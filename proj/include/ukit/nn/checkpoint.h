#ifndef UKIT_NN_CHECKPOINT_H_
#define UKIT_NN_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ukit/nn/model.h"

namespace ukit::nn {

inline constexpr int kCheckpointVersion = 1;

// A model plus free-form metadata (training recipe, budget, data spec).
struct Checkpoint {
  Model model;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

nlohmann::ordered_json model_to_json(const Model& model);
Model model_from_json(const nlohmann::ordered_json& j);

// JSON record of shapes, parameter values and seed. Doubles are written with
// round-trip precision, so load(save(m)) == m bit for bit.
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// Throws ResolutionError when the file is missing.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string activation_name(Activation kind);
Activation activation_from_string(const std::string& name);

}  // namespace ukit::nn

#endif  // UKIT_NN_CHECKPOINT_H_
