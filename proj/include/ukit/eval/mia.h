#ifndef UKIT_EVAL_MIA_H_
#define UKIT_EVAL_MIA_H_

#include <span>
#include <vector>

#include "ukit/data/dataset.h"
#include "ukit/nn/model.h"

namespace ukit::eval {

// Single-threshold loss attack: a sample is predicted a member when its
// cross-entropy loss is below `threshold`.
struct MiaAttack {
  double threshold = 0.0;
  double calibration_accuracy = 0.0;  // balanced accuracy in percent
  // False when member and non-member losses were not distinguishable at the
  // 5% level; the threshold then falls back to the pooled median.
  bool separable = false;
};

// Picks the threshold maximizing balanced accuracy over midpoints of the
// pooled calibration losses (lowest such threshold on ties). When the best
// advantage 2*bacc - 1 does not exceed the two-sample Kolmogorov-Smirnov
// critical value at alpha = 0.05, the pooled median is used instead, so an
// attack without signal predicts "member" for about half of any sample.
MiaAttack calibrate_from_losses(std::span<const double> member_losses,
                                std::span<const double> nonmember_losses);

// Percentage of `losses` strictly below the threshold.
double attack_success(const MiaAttack& attack, std::span<const double> losses);

// Calibrates on D_r (members) against D_test (non-members). D_f is never
// read; `log` receives the train indices that were. Throws
// InsufficientDataError when |D_test| < 10 and ConfigError when D_r is empty.
MiaAttack calibrate(const nn::Model& model, const data::DatasetSplit& split,
                    data::AccessLog* log = nullptr);

// Attack success on D_f, in percent. Throws ConfigError when D_f is empty.
double mia_success(const nn::Model& model, const data::DatasetSplit& split,
                   const MiaAttack& attack);
double mia_success(const nn::Model& model, const data::DatasetSplit& split);

}  // namespace ukit::eval

#endif  // UKIT_EVAL_MIA_H_
