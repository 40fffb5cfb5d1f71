#include "ukit/unlearn/config.h"

#include "ukit/errors.h"
#include "ukit/nn/checkpoint.h"

namespace ukit::unlearn {

using nlohmann::ordered_json;

ClockKind clock_kind_from_string(const std::string& name) {
  if (name == "virtual") return ClockKind::kVirtual;
  if (name == "wall") return ClockKind::kWall;
  throw ConfigError("unknown clock '" + name + "' (expected virtual or wall)");
}

std::string to_string(ClockKind kind) { return kind == ClockKind::kWall ? "wall" : "virtual"; }

ordered_json to_json(const TrainConfig& c) {
  return ordered_json{{"input_dim", c.arch.input_dim},
                      {"hidden", c.arch.hidden},
                      {"num_classes", c.arch.num_classes},
                      {"activation", nn::activation_name(c.arch.activation)},
                      {"epochs", c.epochs},
                      {"learning_rate", c.learning_rate},
                      {"batch_size", c.batch_size},
                      {"optimizer", nn::to_string(c.optimizer)},
                      {"seed", c.seed},
                      {"curriculum", c.curriculum.enabled},
                      {"superloss_lambda", c.curriculum.lam},
                      {"superloss_decay", c.curriculum.decay},
                      {"clock", to_string(c.clock)}};
}

TrainConfig train_config_from_json(const ordered_json& j) {
  try {
    TrainConfig c;
    c.arch.input_dim = j.at("input_dim").get<std::size_t>();
    c.arch.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    c.arch.num_classes = j.at("num_classes").get<std::size_t>();
    c.arch.activation = nn::activation_from_string(j.at("activation").get<std::string>());
    c.epochs = j.at("epochs").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.optimizer = nn::optimizer_kind_from_string(j.at("optimizer").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.curriculum.enabled = j.at("curriculum").get<bool>();
    c.curriculum.lam = j.at("superloss_lambda").get<double>();
    c.curriculum.decay = j.at("superloss_decay").get<double>();
    c.clock = clock_kind_from_string(j.at("clock").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed training recipe: ") + e.what());
  }
}

ordered_json to_json(const TrainingRecord& r) {
  return ordered_json{{"recipe", to_json(r.recipe)}, {"seconds", r.seconds}, {"flos", r.flos}};
}

TrainingRecord training_record_from_json(const ordered_json& j) {
  try {
    return TrainingRecord{train_config_from_json(j.at("recipe")), j.at("seconds").get<double>(),
                          j.at("flos").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed training record: ") + e.what());
  }
}

}  // namespace ukit::unlearn
