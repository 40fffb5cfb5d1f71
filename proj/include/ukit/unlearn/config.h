#ifndef UKIT_UNLEARN_CONFIG_H_
#define UKIT_UNLEARN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ukit/curriculum/superloss.h"
#include "ukit/nn/model.h"
#include "ukit/nn/optimizer.h"

namespace ukit::unlearn {

// How run time is measured. `virtual` converts consumed FLOs at a nominal
// 1e9 FLO/s, which keeps reports reproducible; `wall` uses a steady clock.
enum class ClockKind { kVirtual, kWall };
inline constexpr double kVirtualFlosPerSecond = 1e9;

ClockKind clock_kind_from_string(const std::string& name);
std::string to_string(ClockKind kind);

// Recipe for training an original model (and for exact retraining).
struct TrainConfig {
  nn::MlpSpec arch;
  int epochs = 60;
  double learning_rate = 0.01;
  int batch_size = 32;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;
  std::uint64_t seed = 0;
  curriculum::CurriculumConfig curriculum;
  ClockKind clock = ClockKind::kVirtual;
};

// What training the original cost; unlearning may not exceed it.
struct TrainingRecord {
  TrainConfig recipe;
  double seconds = 0.0;
  double flos = 0.0;
};

struct UnlearnConfig {
  std::string method = "rand_label";
  int del_ratio = 5;
  std::uint64_t seed = 0;
  int epochs = 10;
  double learning_rate = 1e-3;
  int batch_size = 32;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;

  std::uint64_t bad_teacher_seed = 7;
  double kl_temperature = 1.0;
  int scrub_max_steps = 1;
  int scrub_min_steps = 1;
  double scrub_alpha = 1.0;             // weight of the KL retain term
  double scrub_ascent_task_weight = 1.0;  // task loss share of the max phase
  double salun_sparsity = 0.5;
  double l1_lambda = 0.0;
  curriculum::CurriculumConfig curriculum;
  int adapter_rank = 0;                  // 0 disables adapters
  double adapter_scale = 1.0;
  std::string adapter_layers = "hidden";  // hidden | all | comma-separated linear ordinals

  ClockKind clock = ClockKind::kVirtual;
  bool enforce_budget = true;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const TrainingRecord& r);
TrainingRecord training_record_from_json(const nlohmann::ordered_json& j);

}  // namespace ukit::unlearn

#endif  // UKIT_UNLEARN_CONFIG_H_
