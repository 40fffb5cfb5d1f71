#include "ukit/eval/metrics.h"

#include "ukit/errors.h"
#include "ukit/nn/ops.h"

namespace ukit::eval {

double accuracy(const nn::Model& model, const nn::Tensor& x, std::span<const int> y) {
  if (y.empty()) throw ConfigError("accuracy of an empty set");
  if (x.rows() != y.size()) throw ShapeError("feature and label counts differ");
  const auto predicted = nn::argmax_rows(model.predict(x));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += predicted[i] == y[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(y.size());
}

double accuracy(const nn::Model& model, const data::SampleView& view) {
  const auto labels = view.all_labels();
  return accuracy(model, view.all_features(), labels);
}

double mean_loss(const nn::Model& model, const data::SampleView& view) {
  if (view.empty()) throw ConfigError("loss of an empty set");
  const auto labels = view.all_labels();
  const auto losses = nn::cross_entropy_values(model.predict(view.all_features()), labels);
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(losses.size());
}

Accuracies evaluate(const nn::Model& model, const data::DatasetSplit& split) {
  if (split.test_y.empty()) throw ConfigError("test set is empty");
  const auto retain = split.retain_indices();
  if (retain.empty()) throw ConfigError("remaining set D_r is empty");
  Accuracies out;
  out.acc_test = accuracy(model, split.test_x, split.test_y);
  out.acc_r = accuracy(model, data::train_view(split, retain));
  if (!split.del_indices.empty()) {
    out.acc_f = accuracy(model, data::train_view(split, split.del_indices));
  }
  return out;
}

double chance_level(int num_classes) { return 100.0 / static_cast<double>(num_classes); }

}  // namespace ukit::eval
