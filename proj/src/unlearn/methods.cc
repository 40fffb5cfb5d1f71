#include "ukit/unlearn/methods.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "session.h"
#include "ukit/data/synth.h"
#include "ukit/nn/adapter.h"
#include "ukit/nn/ops.h"

namespace ukit::unlearn {

using internal::Session;
using internal::SessionOptions;

namespace {

void require_data(const data::DatasetSplit& split) {
  if (split.train_size() == 0) throw ConfigError("empty training set");
  if (split.train_x.cols() == 0) throw ConfigError("training set has no features");
}

void validate(const UnlearnConfig& config) {
  if (config.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(config.kl_temperature > 0.0)) throw ConfigError("kl_temperature must be positive");
  if (config.adapter_rank < 0) throw ConfigError("adapter_rank must be non-negative");
}

std::vector<std::size_t> adapter_targets(const nn::Model& model, const std::string& spec) {
  const auto linear = model.linear_layer_indices();
  std::vector<std::size_t> out;
  if (spec == "hidden") {
    out.assign(linear.begin(), linear.end() - 1);
    if (out.empty()) throw ConfigError("adapter_layers=hidden but the model has no hidden layer");
  } else if (spec == "all") {
    out = linear;
  } else {
    std::stringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
      std::size_t pos = 0;
      unsigned long ordinal = 0;
      try {
        ordinal = std::stoul(item, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != item.size()) {
        throw ConfigError("adapter_layers must be hidden, all, or linear layer ordinals; got '" +
                          spec + "'");
      }
      if (ordinal >= linear.size()) {
        throw ConfigError("adapter layer ordinal " + item + " out of range (model has " +
                          std::to_string(linear.size()) + " linear layers)");
      }
      out.push_back(linear[ordinal]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.empty()) throw ConfigError("adapter_layers is empty");
  }
  return out;
}

nn::Model student_start(const nn::Model& original, const UnlearnConfig& config) {
  if (config.adapter_rank == 0) return original;
  nn::Model m = original;
  for (std::size_t li : adapter_targets(original, config.adapter_layers)) {
    m = nn::attach_adapter(m, li, static_cast<std::size_t>(config.adapter_rank),
                           config.adapter_scale, config.seed);
  }
  return m;
}

SessionOptions options_for(const UnlearnConfig& config, const TrainingRecord& budget) {
  SessionOptions o;
  o.seed = config.seed;
  o.shuffle_stream = "unlearn/shuffle";
  o.optimizer.kind = config.optimizer;
  o.optimizer.learning_rate = config.learning_rate;
  o.batch_size = config.batch_size;
  o.curriculum = config.curriculum;
  o.clock = config.clock;
  if (config.enforce_budget) o.budget_seconds = budget.seconds;
  return o;
}

UnlearnRun finish(const nn::Model& original, const UnlearnConfig& config, Session& session) {
  UnlearnRun run;
  run.original = original;
  const nn::Model& student = session.student();
  run.trainable_params = session.mask() ? session.mask()->count() : student.param_count();
  run.unlearned = student.adapters().empty() ? student : nn::merge_adapters(student);
  run.config = config;
  run.teacher = effective_teacher(config);
  run.seconds = session.seconds();
  run.flos = session.flos();
  run.trace = session.trace();
  return run;
}

void require_forget(const data::DatasetSplit& split, const std::string& method) {
  if (split.del_indices.empty()) throw ConfigError(method + " needs a non-empty deletion set");
}

void require_retain(const std::vector<std::size_t>& retain, const std::string& method) {
  if (retain.empty()) throw ConfigError(method + " needs a non-empty remaining set");
}

void reject_adapters(const UnlearnConfig& config, const std::string& method) {
  if (config.adapter_rank > 0) throw ConfigError(method + " does not support adapters");
}

// Fine-tunes on `view` with per-sample cross-entropy; shared by rand_label,
// salun and l1_sparse_ft.
void fine_tune(Session& session, const data::SampleView& view, int epochs,
               const Session::GradientHook& hook = {}) {
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (const auto& batch : session.shuffled_batches(view.size())) {
      const nn::Tensor x = view.features(batch);
      const std::vector<int> y = view.labels(batch);
      session.step(
          [&](nn::ModelPass& pass) {
            auto out = pass.forward(x);
            return session.reducer().reduce(nn::cross_entropy_per_sample(out.logits, y));
          },
          batch.size(), 0, hook);
    }
    session.record(epoch, "train");
  }
}

UnlearnRun rand_label_with_mask(const nn::Model& original, const data::DatasetSplit& split,
                                const UnlearnConfig& config, const TrainingRecord& budget,
                                const RunHooks& hooks, std::optional<nn::ParamMask> mask,
                                double extra_flos) {
  std::vector<int> labels = split.train_y;
  const std::vector<int> corrupted = data::corrupt_labels(split, split.del_indices, config.seed);
  for (std::size_t i = 0; i < split.del_indices.size(); ++i) {
    labels[split.del_indices[i]] = corrupted[i];
  }
  SessionOptions options = options_for(config, budget);
  options.mask = std::move(mask);
  Session session(student_start(original, config), split, std::move(options), hooks);
  session.add_flos(extra_flos);
  session.record(0, "init");
  const data::SampleView view = session.loader(split.all_train_indices(), labels);
  fine_tune(session, view, config.epochs);
  return finish(original, config, session);
}

}  // namespace

TrainResult train_model(const data::DatasetSplit& split, const std::vector<std::size_t>& indices,
                        const TrainConfig& config, const RunHooks& hooks) {
  require_data(split);
  if (indices.empty()) throw ConfigError("cannot train on an empty index set");
  if (config.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (config.arch.input_dim != split.train_x.cols()) {
    throw ConfigError("model input width " + std::to_string(config.arch.input_dim) +
                      " does not match data dimension " + std::to_string(split.train_x.cols()));
  }
  if (config.arch.num_classes != static_cast<std::size_t>(split.num_classes)) {
    throw ConfigError("model has " + std::to_string(config.arch.num_classes) +
                      " outputs but the data has " + std::to_string(split.num_classes) +
                      " classes");
  }
  SessionOptions o;
  o.seed = config.seed;
  o.shuffle_stream = "train/shuffle";
  o.optimizer.kind = config.optimizer;
  o.optimizer.learning_rate = config.learning_rate;
  o.batch_size = config.batch_size;
  o.curriculum = config.curriculum;
  o.clock = config.clock;
  Session session(nn::Model::mlp(config.arch, config.seed), split, std::move(o), hooks);
  session.record(0, "init");
  fine_tune(session, session.loader(indices), config.epochs);
  TrainResult result;
  result.model = session.student();
  result.record = TrainingRecord{config, session.seconds(), session.flos()};
  result.trace = session.trace();
  return result;
}

const std::vector<MethodInfo>& registered_methods() {
  using M = Measure;
  static const std::vector<MethodInfo> methods = {
      {"exact_retrain", {M::kNone, Corruption::kNone, M::kLoss, Retention::kOriginal,
                         Density::kDense, Placement::kInternal}},
      {"neg_grad", {M::kLoss, Corruption::kGrad, M::kNone, Retention::kNone, Density::kDense,
                    Placement::kInternal}},
      {"rand_label", {M::kLoss, Corruption::kData, M::kLoss, Retention::kOriginal,
                      Density::kDense, Placement::kInternal}},
      {"bad_t", {M::kLogit, Corruption::kModel, M::kLogit, Retention::kOriginal, Density::kDense,
                 Placement::kInternal}},
      {"scrub", {M::kLoss, Corruption::kGrad, M::kLoss | M::kRep, Retention::kOriginal,
                 Density::kDense, Placement::kInternal}},
      {"salun", {M::kLoss, Corruption::kData, M::kLoss, Retention::kOriginal, Density::kSparse,
                 Placement::kInternal}},
      {"l1_sparse_ft", {M::kNone, Corruption::kNone, M::kLoss, Retention::kOriginal,
                        Density::kSparse, Placement::kInternal}},
  };
  return methods;
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (const auto& m : registered_methods()) out.push_back(m.name);
  return out;
}

const MethodInfo& method_info(const std::string& name) {
  for (const auto& m : registered_methods()) {
    if (m.name == name) return m;
  }
  std::string list;
  for (const auto& n : method_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown unlearning method '" + name + "'; available: " + list);
}

TeacherSpec effective_teacher(const UnlearnConfig& config) {
  TeacherSpec spec = method_info(config.method).teacher;
  if (config.adapter_rank > 0) spec.placement = Placement::kExternal;
  return spec;
}

UnlearnRun unlearn(const nn::Model& original, const data::DatasetSplit& split,
                   const UnlearnConfig& config, const TrainingRecord& budget,
                   const RunHooks& hooks) {
  const std::string& m = method_info(config.method).name;
  if (m == "exact_retrain") return exact_retrain(original, split, config, budget, hooks);
  if (m == "neg_grad") return neg_grad(original, split, config, budget, hooks);
  if (m == "rand_label") return rand_label(original, split, config, budget, hooks);
  if (m == "bad_t") return bad_t(original, split, config, budget, hooks);
  if (m == "scrub") return scrub(original, split, config, budget, hooks);
  if (m == "salun") return salun(original, split, config, budget, hooks);
  return l1_sparse_ft(original, split, config, budget, hooks);
}

UnlearnRun exact_retrain(const nn::Model& original, const data::DatasetSplit& split,
                         const UnlearnConfig& config, const TrainingRecord& budget,
                         const RunHooks& hooks) {
  validate(config);
  reject_adapters(config, "exact_retrain");
  require_data(split);
  const auto retain = split.retain_indices();
  require_retain(retain, "exact_retrain");
  TrainConfig recipe = budget.recipe;
  recipe.clock = config.clock;
  TrainResult trained = train_model(split, retain, recipe, hooks);
  if (config.enforce_budget && trained.record.seconds > budget.seconds) {
    throw BudgetError("retraining used " + std::to_string(trained.record.seconds) +
                          " s, more than the original budget of " +
                          std::to_string(budget.seconds) + " s",
                      trained.trace);
  }
  UnlearnRun run;
  run.original = original;
  run.unlearned = std::move(trained.model);
  run.config = config;
  run.teacher = effective_teacher(config);
  run.seconds = trained.record.seconds;
  run.flos = trained.record.flos;
  run.trainable_params = run.unlearned.param_count();
  run.trace = std::move(trained.trace);
  return run;
}

UnlearnRun neg_grad(const nn::Model& original, const data::DatasetSplit& split,
                    const UnlearnConfig& config, const TrainingRecord& budget,
                    const RunHooks& hooks) {
  validate(config);
  require_data(split);
  require_forget(split, "neg_grad");
  Session session(student_start(original, config), split, options_for(config, budget), hooks);
  session.record(0, "init");
  const data::SampleView forget = session.loader(split.del_indices);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (const auto& batch : session.shuffled_batches(forget.size())) {
      const nn::Tensor x = forget.features(batch);
      const std::vector<int> y = forget.labels(batch);
      session.step(
          [&](nn::ModelPass& pass) {
            auto out = pass.forward(x);
            return nn::scale(
                session.reducer().reduce(nn::cross_entropy_per_sample(out.logits, y)), -1.0);
          },
          batch.size(), 0);
    }
    session.record(epoch, "train");
  }
  return finish(original, config, session);
}

UnlearnRun rand_label(const nn::Model& original, const data::DatasetSplit& split,
                      const UnlearnConfig& config, const TrainingRecord& budget,
                      const RunHooks& hooks) {
  validate(config);
  require_data(split);
  require_forget(split, "rand_label");
  return rand_label_with_mask(original, split, config, budget, hooks, std::nullopt, 0.0);
}

UnlearnRun bad_t(const nn::Model& original, const data::DatasetSplit& split,
                 const UnlearnConfig& config, const TrainingRecord& budget,
                 const RunHooks& hooks) {
  validate(config);
  require_data(split);
  require_forget(split, "bad_t");
  const auto retain_idx = split.retain_indices();
  require_retain(retain_idx, "bad_t");
  const nn::Model bad_teacher = nn::Model::fresh_like(original, config.bad_teacher_seed);

  SessionOptions options = options_for(config, budget);
  options.teacher_param_count = original.param_count();
  Session session(student_start(original, config), split, std::move(options), hooks);
  session.record(0, "init");
  const data::SampleView forget = session.loader(split.del_indices);
  const data::SampleView retain = session.loader(retain_idx);
  const double t = config.kl_temperature;

  // D_f batches cycle independently of the D_r epoch, reshuffling on wrap.
  std::vector<std::vector<std::size_t>> forget_batches;
  std::size_t next_forget = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (const auto& rb : session.shuffled_batches(retain.size())) {
      if (next_forget == forget_batches.size()) {
        forget_batches = session.shuffled_batches(forget.size());
        next_forget = 0;
      }
      const auto& fb = forget_batches[next_forget++];
      const nn::Tensor xr = retain.features(rb);
      const nn::Tensor xf = forget.features(fb);
      const nn::Tensor good = original.predict(xr);
      const nn::Tensor bad = bad_teacher.predict(xf);
      session.step(
          [&](nn::ModelPass& pass) {
            auto out_f = pass.forward(xf);
            auto out_r = pass.forward(xr);
            nn::Var lf = session.reducer().reduce(nn::kl_per_sample(out_f.logits, bad, t));
            nn::Var lr = session.reducer().reduce(nn::kl_per_sample(out_r.logits, good, t));
            return nn::add(lf, lr);
          },
          rb.size() + fb.size(), rb.size() + fb.size());
    }
    session.record(epoch, "train");
  }
  return finish(original, config, session);
}

UnlearnRun scrub(const nn::Model& original, const data::DatasetSplit& split,
                 const UnlearnConfig& config, const TrainingRecord& budget,
                 const RunHooks& hooks) {
  validate(config);
  require_data(split);
  require_forget(split, "scrub");
  if (config.scrub_max_steps < 0 || config.scrub_min_steps < 0) {
    throw ConfigError("SCRUB step counts must be non-negative");
  }
  const auto retain_idx = split.retain_indices();
  if (config.scrub_min_steps > 0) require_retain(retain_idx, "scrub");

  SessionOptions options = options_for(config, budget);
  options.teacher_param_count = original.param_count();
  Session session(student_start(original, config), split, std::move(options), hooks);
  session.record(0, "init");
  const data::SampleView forget = session.loader(split.del_indices);
  const data::SampleView retain = session.loader(retain_idx);
  const double t = config.kl_temperature;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.scrub_max_steps > 0) {
      for (int pass_i = 0; pass_i < config.scrub_max_steps; ++pass_i) {
        for (const auto& batch : session.shuffled_batches(forget.size())) {
          const nn::Tensor x = forget.features(batch);
          const std::vector<int> y = forget.labels(batch);
          const nn::Tensor teacher = original.predict(x);
          session.step(
              [&](nn::ModelPass& pass) {
                auto out = pass.forward(x);
                nn::Var per = nn::add(
                    nn::kl_per_sample(out.logits, teacher, t),
                    nn::scale(nn::cross_entropy_per_sample(out.logits, y),
                              config.scrub_ascent_task_weight));
                return nn::scale(session.reducer().reduce(per), -1.0);
              },
              batch.size(), batch.size());
        }
      }
      session.record(epoch, "max");
    }
    if (config.scrub_min_steps > 0) {
      for (int pass_i = 0; pass_i < config.scrub_min_steps; ++pass_i) {
        for (const auto& batch : session.shuffled_batches(retain.size())) {
          const nn::Tensor x = retain.features(batch);
          const std::vector<int> y = retain.labels(batch);
          const nn::Tensor teacher = original.predict(x);
          session.step(
              [&](nn::ModelPass& pass) {
                auto out = pass.forward(x);
                nn::Var per = nn::add(
                    nn::cross_entropy_per_sample(out.logits, y),
                    nn::scale(nn::kl_per_sample(out.logits, teacher, t), config.scrub_alpha));
                return session.reducer().reduce(per);
              },
              batch.size(), batch.size());
        }
      }
      session.record(epoch, "min");
    }
  }
  return finish(original, config, session);
}

std::vector<double> saliency(const nn::Model& model, const data::DatasetSplit& split) {
  if (split.del_indices.empty()) throw ConfigError("saliency needs a non-empty deletion set");
  const data::SampleView forget = data::train_view(split, split.del_indices);
  nn::ModelPass pass(model);
  auto out = pass.forward(forget.all_features());
  const std::vector<int> y = forget.all_labels();
  std::vector<double> grad = pass.backward(nn::cross_entropy(out.logits, y));
  for (double& g : grad) g = std::abs(g);
  return grad;
}

nn::ParamMask top_fraction_mask(std::span<const double> scores, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("sparsity fraction must lie in (0, 1]");
  }
  const std::size_t n = scores.size();
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  nn::ParamMask mask(n);
  for (std::size_t i = 0; i < std::min(k, n); ++i) mask.set(order[i], true);
  return mask;
}

UnlearnRun salun(const nn::Model& original, const data::DatasetSplit& split,
                 const UnlearnConfig& config, const TrainingRecord& budget,
                 const RunHooks& hooks) {
  validate(config);
  reject_adapters(config, "salun");
  require_data(split);
  require_forget(split, "salun");
  if (hooks.train_access) hooks.train_access->record(split.del_indices);
  nn::ParamMask mask = top_fraction_mask(saliency(original, split), config.salun_sparsity);
  const double saliency_flos =
      nn::count_flos(original.param_count(), split.del_indices.size(), 1);
  return rand_label_with_mask(original, split, config, budget, hooks, std::move(mask),
                              saliency_flos);
}

UnlearnRun l1_sparse_ft(const nn::Model& original, const data::DatasetSplit& split,
                        const UnlearnConfig& config, const TrainingRecord& budget,
                        const RunHooks& hooks) {
  validate(config);
  require_data(split);
  if (config.l1_lambda < 0.0) throw ConfigError("l1_lambda must be non-negative");
  const auto retain_idx = split.retain_indices();
  require_retain(retain_idx, "l1_sparse_ft");
  Session session(student_start(original, config), split, options_for(config, budget), hooks);
  session.record(0, "init");
  const double lambda = config.l1_lambda;
  Session::GradientHook penalty;
  if (lambda > 0.0) {
    penalty = [lambda](std::span<double> grad, const nn::Model& student) {
      const auto p = student.params();
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (p[i] > 0.0) grad[i] += lambda;
        else if (p[i] < 0.0) grad[i] -= lambda;
      }
    };
  }
  fine_tune(session, session.loader(retain_idx), config.epochs, penalty);
  return finish(original, config, session);
}

}  // namespace ukit::unlearn
