#ifndef UKIT_NN_MODEL_H_
#define UKIT_NN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "ukit/nn/ops.h"
#include "ukit/nn/tape.h"
#include "ukit/nn/tensor.h"

namespace ukit::nn {

// Dense layer: weight [out, in] stored row-major at `offset`, bias [out]
// directly after it.
struct LinearLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t offset = 0;

  std::size_t weight_count() const { return in * out; }
  std::size_t param_count() const { return in * out + out; }
  bool operator==(const LinearLayer&) const = default;
};

struct ActivationLayer {
  Activation kind = Activation::kRelu;
  bool operator==(const ActivationLayer&) const = default;
};

using Layer = std::variant<LinearLayer, ActivationLayer>;

// Low-rank update on one linear layer: W_eff = W + scale * up * down.
// down is [rank, in] at `offset`; up is [out, rank] right after it.
struct LowRankAdapter {
  std::size_t target_layer = 0;  // index into Model::layers()
  std::size_t rank = 0;
  double scale = 1.0;
  std::size_t offset = 0;

  bool operator==(const LowRankAdapter&) const = default;
};

// Boolean selector over the flat parameter vector.
class ParamMask {
 public:
  ParamMask() = default;
  explicit ParamMask(std::size_t n, bool value = false) : selected_(n, value ? 1 : 0) {}

  static ParamMask all(std::size_t n) { return ParamMask(n, true); }

  std::size_t size() const { return selected_.size(); }
  bool operator[](std::size_t i) const { return selected_[i] != 0; }
  void set(std::size_t i, bool v) { selected_[i] = v ? 1 : 0; }
  std::size_t count() const;
  bool all_selected() const { return count() == size(); }
  ParamMask operator&(const ParamMask& other) const;
  bool operator==(const ParamMask&) const = default;

 private:
  std::vector<std::uint8_t> selected_;
};

struct MlpSpec {
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden;
  std::size_t num_classes = 2;
  Activation activation = Activation::kRelu;
};

// Feed-forward classifier with a flat, index-addressable parameter vector.
// Base layer parameters come first; adapter parameters follow.
class Model {
 public:
  Model() = default;
  // Parameters start at zero.
  Model(std::size_t input_dim, std::vector<Layer> layers, std::uint64_t seed = 0);

  // Symmetric uniform fan-in initialization, U(-1/sqrt(in), 1/sqrt(in)).
  static Model mlp(const MlpSpec& spec, std::uint64_t seed);
  // Same layers as `shape_source` (adapters dropped), freshly initialized.
  static Model fresh_like(const Model& shape_source, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t num_classes() const { return num_classes_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t param_count() const { return params_.size(); }
  std::size_t base_param_count() const { return base_param_count_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  void set_params(std::vector<double> values);

  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<LowRankAdapter>& adapters() const { return adapters_; }
  // Layer indices of the linear layers, in order.
  std::vector<std::size_t> linear_layer_indices() const;
  const LinearLayer& linear(std::size_t layer_index) const;

  // Weight with any adapter update folded in, shape [out, in].
  Tensor effective_weight(std::size_t layer_index) const;
  Tensor bias(std::size_t layer_index) const;

  Tensor predict(const Tensor& batch) const;
  // Activations feeding the last linear layer.
  Tensor features(const Tensor& batch) const;

  // With adapters attached only adapter parameters are trainable.
  ParamMask trainable_mask() const;

  // Reserved for adapter.cc.
  void append_adapter(LowRankAdapter adapter, std::span<const double> values);

  bool operator==(const Model&) const = default;

 private:
  Tensor run(const Tensor& batch, bool stop_at_features) const;

  std::size_t input_dim_ = 0;
  std::size_t num_classes_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<Layer> layers_;
  std::vector<LowRankAdapter> adapters_;
  std::vector<double> params_;
  std::size_t base_param_count_ = 0;
};

// Binds a model to a fresh tape. Parameters become leaves once; forward() may
// run several batches through the same leaves and backward() returns the flat
// gradient accumulated over all of them.
class ModelPass {
 public:
  struct Output {
    Var logits;
    Var features;
  };

  explicit ModelPass(const Model& model);

  Output forward(const Tensor& batch);
  // Throws StateError when forward() has not run.
  std::vector<double> backward(Var loss);

  Tape& tape() { return *tape_; }
  Var constant(Tensor t) { return tape_->constant(std::move(t)); }

 private:
  struct Binding {
    Var var;
    std::size_t offset;
  };

  Var param(std::size_t offset, Shape shape, bool trainable);

  const Model& model_;
  std::unique_ptr<Tape> tape_;
  std::vector<Binding> bindings_;
  std::vector<Var> weights_;  // per layer index; unbound for activations
  std::vector<Var> biases_;
  bool forwarded_ = false;
};

}  // namespace ukit::nn

#endif  // UKIT_NN_MODEL_H_
