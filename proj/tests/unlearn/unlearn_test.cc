#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ukit/data/synth.h"
#include "ukit/errors.h"
#include "ukit/eval/metrics.h"
#include "ukit/nn/adapter.h"
#include "ukit/unlearn/methods.h"
#include "ukit/unlearn/taxonomy.h"
#include "ukit/unlearn/trace.h"

using namespace ukit;
using namespace ukit::unlearn;

namespace {

struct Fixture {
  data::DatasetSplit split;
  TrainResult trained;
};

TrainConfig small_recipe() {
  TrainConfig c;
  c.arch = nn::MlpSpec{2, {16, 16}, 3, nn::Activation::kRelu};
  c.epochs = 20;
  c.learning_rate = 0.01;
  c.batch_size = 16;
  c.seed = 0;
  return c;
}

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.split = data::generate({data::Generator::kGaussianBlobs, 3, 50, 0.1, 2, 0});
    out.trained = train_model(out.split, out.split.all_train_indices(), small_recipe());
    out.split = data::with_deletion(out.split, 10, 0);
    return out;
  }();
  return f;
}

UnlearnConfig config_for(const std::string& method, int epochs = 2) {
  UnlearnConfig c;
  c.method = method;
  c.epochs = epochs;
  c.learning_rate = 0.01;
  c.batch_size = 16;
  c.del_ratio = 10;
  return c;
}

bool bit_equal(const nn::Model& a, const nn::Model& b) {
  return a.param_count() == b.param_count() &&
         std::memcmp(a.params().data(), b.params().data(), a.param_count() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("taxonomy cells of the registered methods") {
  CHECK(method_names() == std::vector<std::string>{"exact_retrain", "neg_grad", "rand_label", "bad_t",
                                                   "scrub", "salun", "l1_sparse_ft"});
  CHECK(describe(method_info("neg_grad").teacher) == "D_f: Loss/Grad; D_r: -/-; Dense, Internal");
  CHECK(describe(method_info("rand_label").teacher) ==
        "D_f: Loss/Data; D_r: Loss/f; Dense, Internal");
  CHECK(describe(method_info("bad_t").teacher) ==
        "D_f: Logit/Model; D_r: Logit/f; Dense, Internal");
  CHECK(describe(method_info("scrub").teacher) ==
        "D_f: Loss/Grad; D_r: Loss+Rep/f; Dense, Internal");
  CHECK(describe(method_info("salun").teacher) ==
        "D_f: Loss/Data; D_r: Loss/f; Sparse, Internal");
  CHECK(method_info("l1_sparse_ft").teacher.density == Density::kSparse);
  CHECK(method_info("exact_retrain").teacher.forget_measure == Measure::kNone);
  CHECK_THROWS_WITH_AS(method_info("fisher"), doctest::Contains("rand_label"), ConfigError);

  UnlearnConfig c = config_for("rand_label");
  c.adapter_rank = 2;
  CHECK(effective_teacher(c).placement == Placement::kExternal);
}

TEST_CASE("training reaches high accuracy and records a trace") {
  const Fixture& f = fixture();
  CHECK(f.trained.trace.size() == 21);
  CHECK(f.trained.trace.front().phase == "init");
  CHECK(f.trained.trace.front().flos == 0.0);
  CHECK(f.trained.record.flos == doctest::Approx(nn::count_flos(f.trained.model, 120, 20)));
  CHECK(f.trained.record.seconds == doctest::Approx(f.trained.record.flos / kVirtualFlosPerSecond));
  CHECK(eval::evaluate(f.trained.model, f.split).acc_test >= 95.0);
}

TEST_CASE("zero epochs leave the model unchanged") {
  const Fixture& f = fixture();
  for (const std::string& m : {"neg_grad", "rand_label", "bad_t", "scrub", "l1_sparse_ft"}) {
    const UnlearnRun run = unlearn::unlearn(f.trained.model, f.split, config_for(m, 0), f.trained.record);
    INFO(m);
    CHECK(bit_equal(run.unlearned, f.trained.model));
    CHECK(run.trace.size() == 1);
  }
}

TEST_CASE("unlearning is deterministic and leaves the original untouched") {
  const Fixture& f = fixture();
  for (const std::string& m : method_names()) {
    if (m == "exact_retrain") continue;
    const nn::Model before = f.trained.model;
    const UnlearnRun a = unlearn::unlearn(f.trained.model, f.split, config_for(m), f.trained.record);
    const UnlearnRun b = unlearn::unlearn(f.trained.model, f.split, config_for(m), f.trained.record);
    INFO(m);
    CHECK(bit_equal(a.unlearned, b.unlearned));
    CHECK(a.trace == b.trace);
    CHECK(bit_equal(f.trained.model, before));
    CHECK(bit_equal(a.original, before));
    CHECK_FALSE(bit_equal(a.unlearned, before));
    CHECK(a.flos > 0.0);
    CHECK(a.trace.back().flos == a.flos);
  }
}

TEST_CASE("a run past the training budget raises with a partial trace") {
  const Fixture& f = fixture();
  TrainingRecord tiny = f.trained.record;
  tiny.seconds = 1e-9;
  try {
    unlearn::unlearn(f.trained.model, f.split, config_for("rand_label", 5), tiny);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.partial_trace().size() >= 2);
    CHECK(e.partial_trace().front().epoch == 0);
  }
  UnlearnConfig lax = config_for("rand_label", 5);
  lax.enforce_budget = false;
  CHECK_NOTHROW(unlearn::unlearn(f.trained.model, f.split, lax, tiny));
  CHECK_THROWS_AS(exact_retrain(f.trained.model, f.split, config_for("exact_retrain"), tiny),
                  BudgetError);
}

TEST_CASE("configuration errors") {
  const Fixture& f = fixture();
  UnlearnConfig c = config_for("rand_label");
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(unlearn::unlearn(f.trained.model, f.split, c, f.trained.record), ConfigError);
  c = config_for("rand_label");
  c.batch_size = 0;
  CHECK_THROWS_AS(unlearn::unlearn(f.trained.model, f.split, c, f.trained.record), ConfigError);
  c = config_for("salun");
  c.salun_sparsity = 0.0;
  CHECK_THROWS_AS(unlearn::unlearn(f.trained.model, f.split, c, f.trained.record), ConfigError);
  c = config_for("salun");
  c.adapter_rank = 2;
  CHECK_THROWS_AS(unlearn::unlearn(f.trained.model, f.split, c, f.trained.record), ConfigError);
  data::DatasetSplit no_forget = f.split;
  no_forget.del_indices.clear();
  CHECK_THROWS_AS(unlearn::unlearn(f.trained.model, no_forget, config_for("neg_grad"), f.trained.record),
                  ConfigError);
}

TEST_CASE("salun with full sparsity matches rand_label") {
  const Fixture& f = fixture();
  UnlearnConfig s = config_for("salun", 3);
  s.salun_sparsity = 1.0;
  const UnlearnRun a = unlearn::unlearn(f.trained.model, f.split, s, f.trained.record);
  const UnlearnRun b = unlearn::unlearn(f.trained.model, f.split, config_for("rand_label", 3), f.trained.record);
  CHECK(bit_equal(a.unlearned, b.unlearned));
  CHECK(a.flos == doctest::Approx(b.flos + nn::count_flos(f.trained.model, f.split.del_indices.size(), 1)));
}

TEST_CASE("salun only moves salient parameters") {
  const Fixture& f = fixture();
  for (double sparsity : {0.1, 0.3, 0.7}) {
    UnlearnConfig s = config_for("salun", 3);
    s.salun_sparsity = sparsity;
    const UnlearnRun run = unlearn::unlearn(f.trained.model, f.split, s, f.trained.record);
    const auto mask = top_fraction_mask(saliency(f.trained.model, f.split), sparsity);
    CHECK(run.trainable_params == mask.count());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) CHECK(run.unlearned.params()[i] == f.trained.model.params()[i]);
    }
  }
}

TEST_CASE("top fraction mask") {
  const std::vector<double> scores = {0.1, 5.0, 3.0, 5.0, 0.0};
  const auto m = top_fraction_mask(scores, 0.4);
  CHECK(m.count() == 2);
  CHECK(m[1]);
  CHECK(m[3]);
  const auto tie = top_fraction_mask(scores, 0.2);
  CHECK(tie[1]);
  CHECK_FALSE(tie[3]);
  CHECK(top_fraction_mask(scores, 0.5).count() == 3);
  CHECK(top_fraction_mask(scores, 1.0).count() == 5);
  CHECK_THROWS_AS(top_fraction_mask(scores, 1.5), ConfigError);
}

TEST_CASE("exact retraining with an empty deletion set reproduces training") {
  const Fixture& f = fixture();
  data::DatasetSplit full = f.split;
  full.del_indices.clear();
  const UnlearnRun run = exact_retrain(f.trained.model, full, config_for("exact_retrain"), f.trained.record);
  CHECK(bit_equal(run.unlearned, f.trained.model));
}

TEST_CASE("training loaders read only the sets each method uses") {
  const Fixture& f = fixture();
  const auto retain = f.split.retain_indices();
  auto seen_set = [&](const std::string& m) {
    data::AccessLog log;
    RunHooks hooks;
    hooks.train_access = &log;
    unlearn::unlearn(f.trained.model, f.split, config_for(m), f.trained.record, hooks);
    return log;
  };
  const auto retrain = seen_set("exact_retrain");
  CHECK_FALSE(retrain.touched_any(f.split.del_indices));
  CHECK(retrain.seen().size() == retain.size());

  const auto neg = seen_set("neg_grad");
  CHECK(std::vector<std::size_t>(neg.seen().begin(), neg.seen().end()) == f.split.del_indices);

  const auto l1 = seen_set("l1_sparse_ft");
  CHECK_FALSE(l1.touched_any(f.split.del_indices));

  for (const std::string& m : {"rand_label", "bad_t", "scrub", "salun"}) {
    INFO(m);
    CHECK(seen_set(m).touched_any(f.split.del_indices));
  }
}

TEST_CASE("a stronger l1 penalty shrinks the weights more") {
  const Fixture& f = fixture();
  double previous = INFINITY;
  for (double lambda : {0.0, 1e-3, 1e-2, 5e-2}) {
    UnlearnConfig c = config_for("l1_sparse_ft", 3);
    c.l1_lambda = lambda;
    const UnlearnRun run = unlearn::unlearn(f.trained.model, f.split, c, f.trained.record);
    double norm = 0.0;
    for (double p : run.unlearned.params()) norm += std::abs(p);
    CHECK(norm < previous);
    previous = norm;
  }
}

TEST_CASE("scrub records a max and a min phase per epoch") {
  const Fixture& f = fixture();
  const UnlearnRun run = unlearn::unlearn(f.trained.model, f.split, config_for("scrub", 3), f.trained.record);
  REQUIRE(run.trace.size() == 7);
  CHECK(run.trace[0].phase == "init");
  for (int e = 1; e <= 3; ++e) {
    CHECK(run.trace[2 * e - 1].phase == "max");
    CHECK(run.trace[2 * e].phase == "min");
    CHECK(run.trace[2 * e - 1].epoch == e);
    CHECK(run.trace[2 * e].epoch == e);
  }
  for (std::size_t i = 1; i < run.trace.size(); ++i) CHECK(run.trace[i].flos > run.trace[i - 1].flos);

  UnlearnConfig only_max = config_for("scrub", 3);
  only_max.scrub_min_steps = 0;
  const UnlearnRun m = unlearn::unlearn(f.trained.model, f.split, only_max, f.trained.record);
  CHECK(m.trace.size() == 4);
  for (std::size_t i = 1; i < m.trace.size(); ++i) CHECK(m.trace[i].phase == "max");
}

TEST_CASE("adapters train only the adapter and merge back") {
  const Fixture& f = fixture();
  UnlearnConfig c = config_for("rand_label", 3);
  c.adapter_rank = 2;
  const UnlearnRun run = unlearn::unlearn(f.trained.model, f.split, c, f.trained.record);
  CHECK(run.unlearned.adapters().empty());
  CHECK(run.unlearned.param_count() == f.trained.model.param_count());
  // Two hidden layers: 2x16 and 16x16 at rank 2.
  CHECK(run.trainable_params == 2 * (2 + 16) + 2 * (16 + 16));
  CHECK(run.teacher.placement == Placement::kExternal);
  // Biases and the output layer are frozen.
  const auto& out = f.trained.model.linear(f.trained.model.linear_layer_indices().back());
  for (std::size_t i = out.offset; i < out.offset + out.param_count(); ++i) {
    CHECK(run.unlearned.params()[i] == f.trained.model.params()[i]);
  }
}

TEST_CASE("curriculum reweighting changes the trajectory") {
  const Fixture& f = fixture();
  UnlearnConfig c = config_for("rand_label", 3);
  c.curriculum.enabled = true;
  const UnlearnRun a = unlearn::unlearn(f.trained.model, f.split, c, f.trained.record);
  const UnlearnRun b = unlearn::unlearn(f.trained.model, f.split, config_for("rand_label", 3), f.trained.record);
  CHECK_FALSE(bit_equal(a.unlearned, b.unlearned));
  CHECK(a.flos == b.flos);
}

TEST_CASE("trace csv round trip keeps empty cells") {
  Trace t(2);
  t[0].phase = "init";
  t[0].loss_r = 0.25;
  t[0].acc_test = 98.5;
  t[1] = {1, "train", 1.5, 0.1, 97.0, 33.3333333333333, 99.0, 1234.0, 1.234e-6};
  const std::string csv = trace_to_csv(t);
  CHECK(csv.rfind("epoch,loss_f,loss_r,acc_test,acc_f,acc_r,flos,seconds,phase\n", 0) == 0);
  CHECK(trace_from_csv(csv) == t);
}
