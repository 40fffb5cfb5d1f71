#ifndef UKIT_SRC_UNLEARN_SESSION_H_
#define UKIT_SRC_UNLEARN_SESSION_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ukit/curriculum/superloss.h"
#include "ukit/data/dataset.h"
#include "ukit/nn/model.h"
#include "ukit/nn/optimizer.h"
#include "ukit/nn/rng.h"
#include "ukit/unlearn/config.h"
#include "ukit/unlearn/methods.h"

namespace ukit::unlearn::internal {

struct SessionOptions {
  std::uint64_t seed = 0;
  std::string shuffle_stream;
  nn::OptimizerConfig optimizer;
  int batch_size = 32;
  curriculum::CurriculumConfig curriculum;
  ClockKind clock = ClockKind::kVirtual;
  std::optional<double> budget_seconds;
  std::optional<nn::ParamMask> mask;
  std::size_t teacher_param_count = 0;
};

// Shared training loop state: student, optimizer, loss reduction, compute
// accounting and the metric trace.
class Session {
 public:
  using Objective = std::function<nn::Var(nn::ModelPass&)>;
  using GradientHook = std::function<void(std::span<double> grad, const nn::Model& student)>;

  Session(nn::Model start, const data::DatasetSplit& split, SessionOptions options,
          const RunHooks& hooks);

  nn::Model& student() { return student_; }
  Rng& rng() { return rng_; }
  curriculum::LossReducer& reducer() { return reducer_; }
  std::size_t batch_size() const { return static_cast<std::size_t>(options_.batch_size); }
  const nn::ParamMask* mask() const { return mask_ ? &*mask_ : nullptr; }

  // Training loader over train rows; reports to the access log.
  data::SampleView loader(std::vector<std::size_t> indices) const;
  data::SampleView loader(std::vector<std::size_t> indices, std::span<const int> labels) const;

  // Shuffled positions [0, n) cut into batches.
  std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n);

  // One optimizer step. `student_samples` rows go forward and backward
  // through the student; `teacher_samples` rows go forward through a frozen
  // teacher.
  void step(const Objective& objective, std::size_t student_samples,
            std::size_t teacher_samples, const GradientHook& hook = {});
  void add_flos(double flos) { flos_ += flos; }

  // Evaluates the student, appends a trace row, fires the hook and enforces
  // the budget.
  void record(int epoch, const std::string& phase);

  double flos() const { return flos_; }
  double seconds() const;
  Trace& trace() { return trace_; }

 private:
  nn::Model student_;
  const data::DatasetSplit& split_;
  SessionOptions options_;
  const RunHooks& hooks_;
  nn::Optimizer optimizer_;
  curriculum::LossReducer reducer_;
  Rng rng_;
  std::optional<nn::ParamMask> mask_;
  double flos_ = 0.0;
  double wall_seconds_ = 0.0;
  long step_index_ = 0;
  Trace trace_;
  std::vector<std::size_t> retain_;
};

}  // namespace ukit::unlearn::internal

#endif  // UKIT_SRC_UNLEARN_SESSION_H_
