#include "ukit/nn/adapter.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ukit/errors.h"
#include "ukit/nn/rng.h"

namespace ukit::nn {

Model attach_adapter(const Model& model, std::size_t layer_index, std::size_t rank, double scale,
                     std::uint64_t seed) {
  const LinearLayer& lin = model.linear(layer_index);
  if (rank == 0) throw ConfigError("adapter rank must be positive");
  if (rank > std::min(lin.in, lin.out)) {
    throw ConfigError("adapter rank " + std::to_string(rank) + " exceeds min(" +
                      std::to_string(lin.out) + ", " + std::to_string(lin.in) + ")");
  }
  for (const LowRankAdapter& a : model.adapters()) {
    if (a.target_layer == layer_index) {
      throw ConfigError("layer " + std::to_string(layer_index) + " already has an adapter");
    }
  }
  std::vector<double> values(rank * lin.in + lin.out * rank, 0.0);
  Rng rng = Rng::stream(seed, "adapter/" + std::to_string(layer_index));
  const double bound = 1.0 / std::sqrt(static_cast<double>(lin.in));
  for (std::size_t i = 0; i < rank * lin.in; ++i) values[i] = rng.uniform(-bound, bound);

  Model out = model;
  out.append_adapter(LowRankAdapter{layer_index, rank, scale, 0}, values);
  return out;
}

Model merge_adapters(const Model& model) {
  Model merged(model.input_dim(), model.layers(), model.seed());
  std::vector<double> params(model.params().begin(),
                             model.params().begin() + model.base_param_count());
  for (std::size_t li : model.linear_layer_indices()) {
    const LinearLayer& lin = model.linear(li);
    const Tensor w = model.effective_weight(li);
    std::copy(w.raw().begin(), w.raw().end(), params.begin() + lin.offset);
  }
  merged.set_params(std::move(params));
  return merged;
}

TrainableCount trainable_fraction(const Model& model, std::size_t layer_index) {
  const LinearLayer& lin = model.linear(layer_index);
  TrainableCount out{0, lin.weight_count()};
  for (const LowRankAdapter& a : model.adapters()) {
    if (a.target_layer == layer_index) out.trainable += a.rank * (lin.in + lin.out);
  }
  return out;
}

}  // namespace ukit::nn
