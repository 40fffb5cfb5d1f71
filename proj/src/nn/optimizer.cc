#include "ukit/nn/optimizer.h"

#include <cmath>

#include "ukit/errors.h"

namespace ukit::nn {

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

Optimizer::Optimizer(OptimizerConfig config, std::size_t param_count) : config_(config) {
  if (!(config_.learning_rate >= 0.0) || !std::isfinite(config_.learning_rate)) {
    throw ConfigError("learning rate must be a finite non-negative number");
  }
  if (config_.kind == OptimizerKind::kAdam) {
    first_moment_.assign(param_count, 0.0);
    second_moment_.assign(param_count, 0.0);
  }
}

void Optimizer::step(Model& model, std::span<const double> gradient, const ParamMask* mask) {
  auto params = model.params();
  if (gradient.size() != params.size()) {
    throw ShapeError("gradient length " + std::to_string(gradient.size()) +
                     " does not match parameter count " + std::to_string(params.size()));
  }
  if (mask && mask->size() != params.size()) {
    throw ShapeError("mask length " + std::to_string(mask->size()) +
                     " does not match parameter count " + std::to_string(params.size()));
  }
  if (config_.kind == OptimizerKind::kAdam && first_moment_.size() != params.size()) {
    throw ShapeError("optimizer state was sized for a different model");
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (mask && !(*mask)[i]) continue;
      params[i] -= lr * gradient[i];
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const double g = gradient[i];
    first_moment_[i] = b1 * first_moment_[i] + (1.0 - b1) * g;
    second_moment_[i] = b2 * second_moment_[i] + (1.0 - b2) * g * g;
    const double m_hat = first_moment_[i] / correction1;
    const double v_hat = second_moment_[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

double count_flos(std::size_t param_count, std::size_t num_samples, std::size_t num_steps) {
  return 6.0 * static_cast<double>(param_count) * static_cast<double>(num_samples) *
         static_cast<double>(num_steps);
}

double count_flos(const Model& model, std::size_t num_samples, std::size_t num_steps) {
  return count_flos(model.param_count(), num_samples, num_steps);
}

double count_forward_flos(std::size_t param_count, std::size_t num_samples) {
  return 2.0 * static_cast<double>(param_count) * static_cast<double>(num_samples);
}

}  // namespace ukit::nn
