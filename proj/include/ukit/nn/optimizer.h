#ifndef UKIT_NN_OPTIMIZER_H_
#define UKIT_NN_OPTIMIZER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ukit/nn/model.h"

namespace ukit::nn {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind optimizer_kind_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Descends along `gradient`. Callers that ascend (NegGrad) pass the negated
// gradient. Parameters outside `mask` are left untouched and their moments
// do not advance.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::size_t param_count);

  void step(Model& model, std::span<const double> gradient, const ParamMask* mask = nullptr);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps() const { return steps_; }

 private:
  OptimizerConfig config_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  std::uint64_t steps_ = 0;
};

// Training compute under the 6 * P per sample-step convention
// (2P forward, 4P backward).
double count_flos(std::size_t param_count, std::size_t num_samples, std::size_t num_steps);
double count_flos(const Model& model, std::size_t num_samples, std::size_t num_steps);
// Forward-only compute, 2 * P per sample.
double count_forward_flos(std::size_t param_count, std::size_t num_samples);

}  // namespace ukit::nn

#endif  // UKIT_NN_OPTIMIZER_H_
