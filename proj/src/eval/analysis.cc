#include "ukit/eval/analysis.h"

#include "ukit/errors.h"
#include "ukit/eval/metrics.h"

namespace ukit::eval {

int deletion_capacity(std::span<const CapacityPoint> sweep, double baseline_acc,
                      double tolerance) {
  if (sweep.empty()) throw ConfigError("deletion capacity needs a non-empty sweep");
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (sweep[i].ratio <= sweep[i - 1].ratio) {
      throw ConfigError("deletion capacity sweep must be sorted by strictly increasing ratio");
    }
  }
  int capacity = 0;
  for (const CapacityPoint& p : sweep) {
    if (p.acc_test < baseline_acc - tolerance) break;
    capacity = p.ratio;
  }
  return capacity;
}

TransferResult transfer_eval(const nn::Model& original, const nn::Model& unlearned,
                             const nn::Tensor& shifted_x, std::span<const int> labels) {
  return {accuracy(original, shifted_x, labels), accuracy(unlearned, shifted_x, labels)};
}

std::vector<ScalingPoint> scaling_curve(const unlearn::Trace& trace) {
  std::vector<ScalingPoint> out;
  for (const unlearn::TraceRow& row : trace) {
    if (!row.acc_f) continue;
    if (!out.empty() && !(row.flos > out.back().flos)) continue;
    out.push_back({row.flos, *row.acc_f});
  }
  return out;
}

std::map<std::string, std::vector<ScalingPoint>> scaling_curves(
    const std::map<std::string, unlearn::Trace>& traces) {
  std::map<std::string, std::vector<ScalingPoint>> out;
  for (const auto& [name, trace] : traces) out[name] = scaling_curve(trace);
  return out;
}

std::optional<double> flos_to_reach(const std::vector<ScalingPoint>& curve, double target) {
  for (const ScalingPoint& p : curve) {
    if (p.acc_f <= target) return p.flos;
  }
  return std::nullopt;
}

}  // namespace ukit::eval
