#include "ukit/nn/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ukit/errors.h"
#include "ukit/nn/rng.h"

namespace ukit::nn {

std::size_t ParamMask::count() const {
  return static_cast<std::size_t>(std::count(selected_.begin(), selected_.end(), 1));
}

ParamMask ParamMask::operator&(const ParamMask& other) const {
  if (size() != other.size()) throw ShapeError("mask length mismatch");
  ParamMask out(size());
  for (std::size_t i = 0; i < size(); ++i) out.selected_[i] = selected_[i] & other.selected_[i];
  return out;
}

Model::Model(std::size_t input_dim, std::vector<Layer> layers, std::uint64_t seed)
    : input_dim_(input_dim), seed_(seed), layers_(std::move(layers)) {
  if (input_dim_ == 0) throw ConfigError("model input width must be positive");
  std::size_t width = input_dim_;
  std::size_t offset = 0;
  bool any_linear = false;
  for (Layer& layer : layers_) {
    if (auto* lin = std::get_if<LinearLayer>(&layer)) {
      if (lin->in != width) {
        throw ShapeError("linear layer expects width " + std::to_string(lin->in) +
                         " but receives " + std::to_string(width));
      }
      if (lin->out == 0) throw ConfigError("linear layer with zero outputs");
      lin->offset = offset;
      offset += lin->param_count();
      width = lin->out;
      any_linear = true;
    }
  }
  if (!any_linear) throw ConfigError("model needs at least one linear layer");
  num_classes_ = width;
  base_param_count_ = offset;
  params_.assign(offset, 0.0);
}

Model Model::mlp(const MlpSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw ConfigError("classifier needs at least two classes");
  std::vector<Layer> layers;
  std::size_t width = spec.input_dim;
  for (std::size_t h : spec.hidden) {
    if (h == 0) throw ConfigError("hidden width must be positive");
    layers.push_back(LinearLayer{width, h, 0});
    layers.push_back(ActivationLayer{spec.activation});
    width = h;
  }
  layers.push_back(LinearLayer{width, spec.num_classes, 0});
  return fresh_like(Model(spec.input_dim, std::move(layers), seed), seed);
}

Model Model::fresh_like(const Model& shape_source, std::uint64_t seed) {
  Model model(shape_source.input_dim_, shape_source.layers_, seed);
  Rng rng = Rng::stream(seed, "init");
  for (const Layer& layer : model.layers_) {
    const auto* lin = std::get_if<LinearLayer>(&layer);
    if (!lin) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(lin->in));
    for (std::size_t i = 0; i < lin->param_count(); ++i) {
      model.params_[lin->offset + i] = rng.uniform(-bound, bound);
    }
  }
  return model;
}

void Model::set_params(std::vector<double> values) {
  if (values.size() != params_.size()) {
    throw ShapeError("expected " + std::to_string(params_.size()) + " parameters, got " +
                     std::to_string(values.size()));
  }
  params_ = std::move(values);
}

std::vector<std::size_t> Model::linear_layer_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (std::holds_alternative<LinearLayer>(layers_[i])) out.push_back(i);
  }
  return out;
}

const LinearLayer& Model::linear(std::size_t layer_index) const {
  if (layer_index >= layers_.size()) throw ConfigError("layer index out of range");
  const auto* lin = std::get_if<LinearLayer>(&layers_[layer_index]);
  if (!lin) throw ConfigError("layer " + std::to_string(layer_index) + " is not linear");
  return *lin;
}

Tensor Model::effective_weight(std::size_t layer_index) const {
  const LinearLayer& lin = linear(layer_index);
  Tensor w({lin.out, lin.in},
           std::vector<double>(params_.begin() + lin.offset,
                               params_.begin() + lin.offset + lin.weight_count()));
  for (const LowRankAdapter& a : adapters_) {
    if (a.target_layer != layer_index) continue;
    const double* down = params_.data() + a.offset;
    const double* up = down + a.rank * lin.in;
    for (std::size_t o = 0; o < lin.out; ++o)
      for (std::size_t i = 0; i < lin.in; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.rank; ++k) acc += up[o * a.rank + k] * down[k * lin.in + i];
        w.at(o, i) += a.scale * acc;
      }
  }
  return w;
}

Tensor Model::bias(std::size_t layer_index) const {
  const LinearLayer& lin = linear(layer_index);
  const auto begin = params_.begin() + lin.offset + lin.weight_count();
  return Tensor({lin.out}, std::vector<double>(begin, begin + lin.out));
}

Tensor Model::run(const Tensor& batch, bool stop_at_features) const {
  if (batch.rank() != 2 || batch.cols() != input_dim_) {
    throw ShapeError("batch " + shape_string(batch.shape()) + " does not match model input width " +
                     std::to_string(input_dim_));
  }
  const auto linear_ids = linear_layer_indices();
  const std::size_t last_linear = linear_ids.back();
  Tensor h = batch;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    if (stop_at_features && li == last_linear) return h;
    if (const auto* act = std::get_if<ActivationLayer>(&layers_[li])) {
      if (act->kind == Activation::kRelu) {
        for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
      } else if (act->kind == Activation::kTanh) {
        for (double& v : h.values()) v = std::tanh(v);
      }
      continue;
    }
    const LinearLayer& lin = std::get<LinearLayer>(layers_[li]);
    const Tensor w = effective_weight(li);
    const double* b = params_.data() + lin.offset + lin.weight_count();
    Tensor next({h.rows(), lin.out});
    for (std::size_t r = 0; r < h.rows(); ++r) {
      auto hr = h.row(r);
      for (std::size_t o = 0; o < lin.out; ++o) {
        auto wr = w.row(o);
        double acc = b[o];
        for (std::size_t i = 0; i < lin.in; ++i) acc += hr[i] * wr[i];
        next.at(r, o) = acc;
      }
    }
    h = std::move(next);
  }
  return h;
}

Tensor Model::predict(const Tensor& batch) const { return run(batch, false); }

Tensor Model::features(const Tensor& batch) const { return run(batch, true); }

ParamMask Model::trainable_mask() const {
  if (adapters_.empty()) return ParamMask::all(params_.size());
  ParamMask mask(params_.size());
  for (std::size_t i = base_param_count_; i < params_.size(); ++i) mask.set(i, true);
  return mask;
}

void Model::append_adapter(LowRankAdapter adapter, std::span<const double> values) {
  adapter.offset = params_.size();
  params_.insert(params_.end(), values.begin(), values.end());
  adapters_.push_back(adapter);
}

ModelPass::ModelPass(const Model& model)
    : model_(model), tape_(std::make_unique<Tape>()) {
  const bool frozen_base = !model.adapters().empty();
  const auto& layers = model.layers();
  weights_.resize(layers.size());
  biases_.resize(layers.size());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto* lin = std::get_if<LinearLayer>(&layers[li]);
    if (!lin) continue;
    Var w = param(lin->offset, {lin->out, lin->in}, !frozen_base);
    biases_[li] = param(lin->offset + lin->weight_count(), {lin->out}, !frozen_base);
    for (const LowRankAdapter& a : model.adapters()) {
      if (a.target_layer != li) continue;
      Var down = param(a.offset, {a.rank, lin->in}, true);
      Var up = param(a.offset + a.rank * lin->in, {lin->out, a.rank}, true);
      w = add(w, scale(matmul(up, down), a.scale));
    }
    weights_[li] = w;
  }
}

Var ModelPass::param(std::size_t offset, Shape shape, bool trainable) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  auto values = model_.params().subspan(offset, n);
  Tensor t(std::move(shape), std::vector<double>(values.begin(), values.end()));
  if (!trainable) return tape_->constant(std::move(t));
  Var v = tape_->variable(std::move(t));
  bindings_.push_back({v, offset});
  return v;
}

ModelPass::Output ModelPass::forward(const Tensor& batch) {
  if (batch.rank() != 2 || batch.cols() != model_.input_dim()) {
    throw ShapeError("batch " + shape_string(batch.shape()) + " does not match model input width " +
                     std::to_string(model_.input_dim()));
  }
  const auto& layers = model_.layers();
  const std::size_t last_linear = model_.linear_layer_indices().back();
  Var h = tape_->constant(batch);
  Output out;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    if (li == last_linear) out.features = h;
    if (const auto* act = std::get_if<ActivationLayer>(&layers[li])) {
      h = activate(h, act->kind);
    } else {
      h = linear(h, weights_[li], biases_[li]);
    }
  }
  out.logits = h;
  forwarded_ = true;
  return out;
}

std::vector<double> ModelPass::backward(Var loss) {
  if (!forwarded_) throw StateError("backward() called before forward()");
  tape_->backward(loss);
  std::vector<double> grad(model_.param_count(), 0.0);
  for (const Binding& b : bindings_) {
    const Tensor& g = tape_->grad(b.var);
    for (std::size_t i = 0; i < g.size(); ++i) grad[b.offset + i] += g[i];
  }
  return grad;
}

}  // namespace ukit::nn
