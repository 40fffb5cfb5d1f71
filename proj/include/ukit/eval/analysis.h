#ifndef UKIT_EVAL_ANALYSIS_H_
#define UKIT_EVAL_ANALYSIS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ukit/nn/model.h"
#include "ukit/unlearn/trace.h"

namespace ukit::eval {

struct CapacityPoint {
  int ratio = 0;
  double acc_test = 0.0;
};

// Largest ratio whose acc_test stays within `tolerance` of the baseline,
// scanning upward from the smallest ratio and stopping at the first
// violation; 0 when the first ratio already violates. Throws ConfigError on
// an empty sweep or ratios that are not strictly increasing.
int deletion_capacity(std::span<const CapacityPoint> sweep, double baseline_acc,
                      double tolerance);

struct TransferResult {
  double original = 0.0;   // accuracy of f on the shifted inputs
  double unlearned = 0.0;  // accuracy of f' on the same inputs
};

TransferResult transfer_eval(const nn::Model& original, const nn::Model& unlearned,
                             const nn::Tensor& shifted_x, std::span<const int> labels);

struct ScalingPoint {
  double flos = 0.0;
  double acc_f = 0.0;
  bool operator==(const ScalingPoint&) const = default;
};

// (flos, acc_f) per trace row, skipping rows without acc_f and rows that do
// not advance the FLO count, so flos is strictly increasing.
std::vector<ScalingPoint> scaling_curve(const unlearn::Trace& trace);
std::map<std::string, std::vector<ScalingPoint>> scaling_curves(
    const std::map<std::string, unlearn::Trace>& traces);

// FLOs at which the curve first reaches acc_f <= target; nullopt if never.
std::optional<double> flos_to_reach(const std::vector<ScalingPoint>& curve, double target);

}  // namespace ukit::eval

#endif  // UKIT_EVAL_ANALYSIS_H_
