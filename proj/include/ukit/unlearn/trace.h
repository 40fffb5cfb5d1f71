#ifndef UKIT_UNLEARN_TRACE_H_
#define UKIT_UNLEARN_TRACE_H_

#include <optional>
#include <string>
#include <vector>

namespace ukit::unlearn {

// Metrics after one epoch (or one SCRUB phase). Row 0 describes the starting
// model before any update. Accuracies are percentages.
struct TraceRow {
  int epoch = 0;
  std::string phase;  // "init", "train", "max", "min"
  std::optional<double> loss_f;
  double loss_r = 0.0;
  double acc_test = 0.0;
  std::optional<double> acc_f;
  double acc_r = 0.0;
  double flos = 0.0;
  double seconds = 0.0;

  bool operator==(const TraceRow&) const = default;
};

using Trace = std::vector<TraceRow>;

// Columns: epoch,loss_f,loss_r,acc_test,acc_f,acc_r,flos,seconds,phase.
// Undefined values are written as empty cells.
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& text);

}  // namespace ukit::unlearn

#endif  // UKIT_UNLEARN_TRACE_H_
