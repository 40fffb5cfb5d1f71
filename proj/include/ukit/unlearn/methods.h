#ifndef UKIT_UNLEARN_METHODS_H_
#define UKIT_UNLEARN_METHODS_H_

#include <functional>
#include <string>
#include <vector>

#include "ukit/data/dataset.h"
#include "ukit/errors.h"
#include "ukit/nn/model.h"
#include "ukit/unlearn/config.h"
#include "ukit/unlearn/taxonomy.h"
#include "ukit/unlearn/trace.h"

namespace ukit::unlearn {

// Optional instrumentation for a run.
struct RunHooks {
  // Receives every train index a training loader hands out.
  data::AccessLog* train_access = nullptr;
  // Called after each trace row with the current student.
  std::function<void(const TraceRow&, const nn::Model&)> on_epoch;
};

struct UnlearnRun {
  nn::Model original;
  nn::Model unlearned;
  UnlearnConfig config;
  TeacherSpec teacher;
  double seconds = 0.0;
  double flos = 0.0;
  std::size_t trainable_params = 0;
  Trace trace;
};

// Unlearning ran past the original training budget. Carries the trace up to
// the epoch where the budget ran out.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, Trace partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trace& partial_trace() const { return partial_; }

 private:
  Trace partial_;
};

struct TrainResult {
  nn::Model model;
  TrainingRecord record;
  Trace trace;
};

// Trains a freshly initialized model on the listed train indices with
// cross-entropy. The trace reports D_f/D_r metrics against `split`.
TrainResult train_model(const data::DatasetSplit& split, const std::vector<std::size_t>& indices,
                        const TrainConfig& config, const RunHooks& hooks = {});

struct MethodInfo {
  std::string name;
  TeacherSpec teacher;
};

// Every implemented method with its taxonomy cell.
const std::vector<MethodInfo>& registered_methods();
std::vector<std::string> method_names();
// Throws ConfigError listing the available methods for unknown names.
const MethodInfo& method_info(const std::string& name);
// The registered cell, with placement External when adapters are in use.
TeacherSpec effective_teacher(const UnlearnConfig& config);

// Dispatches on config.method. `original` is only read; the result's
// `unlearned` starts as a copy of it (exact_retrain starts fresh).
UnlearnRun unlearn(const nn::Model& original, const data::DatasetSplit& split,
                   const UnlearnConfig& config, const TrainingRecord& budget,
                   const RunHooks& hooks = {});

UnlearnRun exact_retrain(const nn::Model& original, const data::DatasetSplit& split,
                         const UnlearnConfig& config, const TrainingRecord& budget,
                         const RunHooks& hooks = {});
UnlearnRun neg_grad(const nn::Model& original, const data::DatasetSplit& split,
                    const UnlearnConfig& config, const TrainingRecord& budget,
                    const RunHooks& hooks = {});
UnlearnRun rand_label(const nn::Model& original, const data::DatasetSplit& split,
                      const UnlearnConfig& config, const TrainingRecord& budget,
                      const RunHooks& hooks = {});
UnlearnRun bad_t(const nn::Model& original, const data::DatasetSplit& split,
                 const UnlearnConfig& config, const TrainingRecord& budget,
                 const RunHooks& hooks = {});
UnlearnRun scrub(const nn::Model& original, const data::DatasetSplit& split,
                 const UnlearnConfig& config, const TrainingRecord& budget,
                 const RunHooks& hooks = {});
UnlearnRun salun(const nn::Model& original, const data::DatasetSplit& split,
                 const UnlearnConfig& config, const TrainingRecord& budget,
                 const RunHooks& hooks = {});
UnlearnRun l1_sparse_ft(const nn::Model& original, const data::DatasetSplit& split,
                        const UnlearnConfig& config, const TrainingRecord& budget,
                        const RunHooks& hooks = {});

// |d task-loss / d param| over D_f, evaluated at `model`.
std::vector<double> saliency(const nn::Model& model, const data::DatasetSplit& split);
// Selects the ceil(fraction * n) largest entries; ties go to lower indices.
// Throws ConfigError unless fraction lies in (0, 1].
nn::ParamMask top_fraction_mask(std::span<const double> scores, double fraction);

}  // namespace ukit::unlearn

#endif  // UKIT_UNLEARN_METHODS_H_
