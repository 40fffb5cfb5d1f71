#include "session.h"

#include <chrono>
#include <cmath>
#include <sstream>

#include "ukit/errors.h"
#include "ukit/eval/metrics.h"

namespace ukit::unlearn::internal {

Session::Session(nn::Model start, const data::DatasetSplit& split, SessionOptions options,
                 const RunHooks& hooks)
    : student_(std::move(start)),
      split_(split),
      options_(std::move(options)),
      hooks_(hooks),
      optimizer_(options_.optimizer, student_.param_count()),
      reducer_(options_.curriculum),
      rng_(Rng::stream(options_.seed, options_.shuffle_stream)),
      retain_(split.retain_indices()) {
  if (options_.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (options_.mask) {
    mask_ = *options_.mask;
    if (mask_->size() != student_.param_count()) throw ShapeError("mask length mismatch");
  }
  if (!student_.adapters().empty()) {
    mask_ = mask_ ? (*mask_ & student_.trainable_mask()) : student_.trainable_mask();
  }
}

data::SampleView Session::loader(std::vector<std::size_t> indices) const {
  return data::train_view(split_, std::move(indices), hooks_.train_access);
}

data::SampleView Session::loader(std::vector<std::size_t> indices,
                                 std::span<const int> labels) const {
  return data::SampleView(split_.train_x, labels, std::move(indices), hooks_.train_access);
}

std::vector<std::vector<std::size_t>> Session::shuffled_batches(std::size_t n) {
  const auto order = rng_.permutation(n);
  std::vector<std::vector<std::size_t>> out;
  const std::size_t b = batch_size();
  for (std::size_t start = 0; start < n; start += b) {
    out.emplace_back(order.begin() + start, order.begin() + std::min(n, start + b));
  }
  return out;
}

void Session::step(const Objective& objective, std::size_t student_samples,
                   std::size_t teacher_samples, const GradientHook& hook) {
  const auto started = std::chrono::steady_clock::now();
  nn::ModelPass pass(student_);
  nn::Var loss = objective(pass);
  const double value = loss.value()[0];
  if (!std::isfinite(value)) throw NumericError("non-finite loss", step_index_);
  std::vector<double> grad = pass.backward(loss);
  if (hook) hook(grad, student_);
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient", step_index_);
  }
  optimizer_.step(student_, grad, mask());
  for (double p : student_.params()) {
    if (!std::isfinite(p)) throw NumericError("parameters diverged", step_index_);
  }
  flos_ += nn::count_flos(student_.param_count(), student_samples, 1) +
           nn::count_forward_flos(options_.teacher_param_count, teacher_samples);
  ++step_index_;
  wall_seconds_ +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

double Session::seconds() const {
  return options_.clock == ClockKind::kWall ? wall_seconds_ : flos_ / kVirtualFlosPerSecond;
}

void Session::record(int epoch, const std::string& phase) {
  TraceRow row;
  row.epoch = epoch;
  row.phase = phase;
  if (!split_.test_y.empty()) row.acc_test = eval::accuracy(student_, split_.test_x, split_.test_y);
  if (!retain_.empty()) {
    const auto view = data::train_view(split_, retain_);
    row.acc_r = eval::accuracy(student_, view);
    row.loss_r = eval::mean_loss(student_, view);
  }
  if (!split_.del_indices.empty()) {
    const auto view = data::train_view(split_, split_.del_indices);
    row.acc_f = eval::accuracy(student_, view);
    row.loss_f = eval::mean_loss(student_, view);
  }
  row.flos = flos_;
  row.seconds = seconds();
  trace_.push_back(row);
  if (hooks_.on_epoch) hooks_.on_epoch(row, student_);
  if (options_.budget_seconds && row.seconds > *options_.budget_seconds) {
    std::ostringstream msg;
    msg << "unlearning used " << row.seconds << " s, more than the original training budget of "
        << *options_.budget_seconds << " s (epoch " << epoch << ")";
    throw BudgetError(msg.str(), trace_);
  }
}

}  // namespace ukit::unlearn::internal
