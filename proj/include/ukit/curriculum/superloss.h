#ifndef UKIT_CURRICULUM_SUPERLOSS_H_
#define UKIT_CURRICULUM_SUPERLOSS_H_

#include <optional>
#include <span>

#include "ukit/nn/tape.h"

namespace ukit::curriculum {

struct SuperLossParams {
  double tau = 0.0;  // baseline loss
  double lam = 1.0;  // regularization weight, > 0
};

// Per-sample confidence sigma* = exp(-W0(max(-2/e, (l - tau)/lam) / 2)).
// Always positive and non-increasing in l.
double superloss_sigma(double loss, const SuperLossParams& params);

// (l - tau) * sigma + lam * log(sigma)^2 for one sample.
double superloss_term(double loss, double sigma, const SuperLossParams& params);

struct CurriculumConfig {
  bool enabled = false;
  double lam = 1.0;
  double decay = 0.9;  // EMA decay of tau
};

// Reduces a batch of per-sample losses to a scalar. Disabled, it is the plain
// mean. Enabled, it is the SuperLoss-weighted mean with sigma held constant
// (the optimum over sigma, so no gradient flows through it), and tau tracks
// an exponential moving average of batch mean loss. tau starts at the first
// batch mean.
class LossReducer {
 public:
  explicit LossReducer(CurriculumConfig config = {});

  nn::Var reduce(nn::Var per_sample);
  double reduce(std::span<const double> per_sample);

  const CurriculumConfig& config() const { return config_; }
  std::optional<double> tau() const { return tau_; }

 private:
  void update_tau(double batch_mean);

  CurriculumConfig config_;
  std::optional<double> tau_;
};

}  // namespace ukit::curriculum

#endif  // UKIT_CURRICULUM_SUPERLOSS_H_
