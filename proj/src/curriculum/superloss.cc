#include "ukit/curriculum/superloss.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ukit/curriculum/lambert_w.h"
#include "ukit/errors.h"
#include "ukit/nn/ops.h"

namespace ukit::curriculum {

double superloss_sigma(double loss, const SuperLossParams& params) {
  if (!(params.lam > 0.0)) throw ConfigError("SuperLoss lambda must be positive");
  const double beta = std::max(-2.0 / std::numbers::e, (loss - params.tau) / params.lam);
  return std::exp(-lambert_w0(0.5 * beta));
}

double superloss_term(double loss, double sigma, const SuperLossParams& params) {
  const double log_sigma = std::log(sigma);
  return (loss - params.tau) * sigma + params.lam * log_sigma * log_sigma;
}

LossReducer::LossReducer(CurriculumConfig config) : config_(config) {
  if (config_.enabled) {
    if (!(config_.lam > 0.0)) throw ConfigError("SuperLoss lambda must be positive");
    if (!(config_.decay >= 0.0 && config_.decay < 1.0)) {
      throw ConfigError("SuperLoss decay must lie in [0, 1)");
    }
  }
}

void LossReducer::update_tau(double batch_mean) {
  tau_ = config_.decay * *tau_ + (1.0 - config_.decay) * batch_mean;
}

nn::Var LossReducer::reduce(nn::Var per_sample) {
  if (!config_.enabled) return nn::mean(per_sample);
  const auto values = per_sample.value().values();
  if (values.empty()) throw ConfigError("empty batch");
  double batch_mean = 0.0;
  for (double v : values) batch_mean += v;
  batch_mean /= static_cast<double>(values.size());
  if (!tau_) tau_ = batch_mean;

  const SuperLossParams params{*tau_, config_.lam};
  const double n = static_cast<double>(values.size());
  std::vector<double> weights(values.size());
  double constant = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double sigma = superloss_sigma(values[i], params);
    weights[i] = sigma / n;
    const double log_sigma = std::log(sigma);
    constant += (-params.tau * sigma + params.lam * log_sigma * log_sigma) / n;
  }
  nn::Var weighted = nn::weighted_sum(per_sample, weights);
  nn::Tape& tape = *per_sample.tape();
  nn::Var offset = tape.constant(nn::Tensor::scalar(constant));
  update_tau(batch_mean);
  return nn::add(weighted, offset);
}

double LossReducer::reduce(std::span<const double> per_sample) {
  if (per_sample.empty()) throw ConfigError("empty batch");
  double batch_mean = 0.0;
  for (double v : per_sample) batch_mean += v;
  batch_mean /= static_cast<double>(per_sample.size());
  if (!config_.enabled) return batch_mean;
  if (!tau_) tau_ = batch_mean;
  const SuperLossParams params{*tau_, config_.lam};
  double total = 0.0;
  for (double l : per_sample) total += superloss_term(l, superloss_sigma(l, params), params);
  update_tau(batch_mean);
  return total / static_cast<double>(per_sample.size());
}

}  // namespace ukit::curriculum
