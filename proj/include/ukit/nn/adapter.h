#ifndef UKIT_NN_ADAPTER_H_
#define UKIT_NN_ADAPTER_H_

#include <cstddef>
#include <cstdint>

#include "ukit/nn/model.h"

namespace ukit::nn {

// Adds a rank-`rank` adapter to the linear layer at `layer_index`. `down` is
// fan-in initialized from `seed`, `up` starts at zero, so the adapted model
// computes exactly what the base model computes. Throws ConfigError when rank
// is zero or exceeds min(in, out).
Model attach_adapter(const Model& model, std::size_t layer_index, std::size_t rank,
                     double scale, std::uint64_t seed);

// Folds every adapter into its base weight and drops the adapter parameters.
Model merge_adapters(const Model& model);

struct TrainableCount {
  std::size_t trainable = 0;  // adapter parameters on the layer
  std::size_t total = 0;      // dense weight parameters of the layer
};

TrainableCount trainable_fraction(const Model& model, std::size_t layer_index);

}  // namespace ukit::nn

#endif  // UKIT_NN_ADAPTER_H_
