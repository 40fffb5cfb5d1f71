#ifndef UKIT_EVAL_METRICS_H_
#define UKIT_EVAL_METRICS_H_

#include <optional>
#include <span>

#include "ukit/data/dataset.h"
#include "ukit/nn/model.h"

namespace ukit::eval {

struct Accuracies {
  double acc_test = 0.0;
  std::optional<double> acc_f;  // undefined when D_f is empty
  double acc_r = 0.0;

  bool operator==(const Accuracies&) const = default;
};

// Percentage of rows whose argmax logit equals the label.
double accuracy(const nn::Model& model, const nn::Tensor& x, std::span<const int> y);
double accuracy(const nn::Model& model, const data::SampleView& view);
double mean_loss(const nn::Model& model, const data::SampleView& view);

// Accuracies on D_test, D_f and D_r. Throws ConfigError when D_test or D_r
// is empty.
Accuracies evaluate(const nn::Model& model, const data::DatasetSplit& split);

// 100 / C.
double chance_level(int num_classes);

}  // namespace ukit::eval

#endif  // UKIT_EVAL_METRICS_H_
