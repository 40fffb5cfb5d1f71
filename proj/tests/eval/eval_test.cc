#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support/oracles.h"
#include "ukit/data/synth.h"
#include "ukit/errors.h"
#include "ukit/eval/analysis.h"
#include "ukit/eval/metrics.h"
#include "ukit/eval/mia.h"
#include "ukit/eval/report.h"
#include "ukit/nn/rng.h"

using namespace ukit;
using namespace ukit::eval;

namespace {

// Always predicts class 0 through its output bias.
nn::Model constant_class_model(std::size_t input_dim, std::size_t classes) {
  nn::Model m(input_dim, {nn::LinearLayer{input_dim, classes, 0}});
  m.params()[input_dim * classes] = 1.0;
  return m;
}

// Balanced accuracy of a threshold, computed directly.
double balanced_accuracy(double t, const std::vector<double>& in, const std::vector<double>& out) {
  const double tpr = std::count_if(in.begin(), in.end(), [&](double l) { return l < t; }) /
                     static_cast<double>(in.size());
  const double tnr = std::count_if(out.begin(), out.end(), [&](double l) { return l >= t; }) /
                     static_cast<double>(out.size());
  return 50.0 * (tpr + tnr);
}

data::DatasetSplit blobs(int spc = 50) {
  return data::with_deletion(data::generate({data::Generator::kGaussianBlobs, 4, spc, 0.1, 2, 0}), 10, 0);
}

}  // namespace

TEST_CASE("a constant-class model scores chance on balanced labels") {
  const nn::Model m = constant_class_model(2, 4);
  const nn::Tensor x = nn::Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}});
  const std::vector<int> y = {0, 1, 2, 3};
  CHECK(accuracy(m, x, y) == 25.0);
  CHECK(chance_level(4) == 25.0);
  CHECK(chance_level(3) == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("accuracy agrees with an argmax oracle") {
  Rng rng(6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const nn::Model m = nn::Model::mlp({3, {6}, 4, nn::Activation::kTanh}, seed);
    nn::Tensor x({50, 3});
    for (double& v : x.values()) v = rng.normal();
    std::vector<int> y(50);
    for (int& v : y) v = static_cast<int>(rng.below(4));
    const auto predicted = oracle::argmax(oracle::forward(m, oracle::to_matrix(x)).logits);
    int correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += predicted[i] == y[i];
    CHECK(accuracy(m, x, y) == doctest::Approx(2.0 * correct));
  }
}

TEST_CASE("evaluate leaves acc_f empty without a deletion set") {
  data::DatasetSplit s = blobs();
  const nn::Model m = constant_class_model(2, 4);
  CHECK(evaluate(m, s).acc_f.has_value());
  s.del_indices.clear();
  const Accuracies a = evaluate(m, s);
  CHECK_FALSE(a.acc_f.has_value());
  CHECK(a.acc_test == 25.0);
  CHECK(a.acc_r == 25.0);
}

TEST_CASE("separable losses give a perfect attack") {
  std::vector<double> members, nonmembers;
  for (int i = 0; i < 40; ++i) members.push_back(0.01 + 0.001 * i);
  for (int i = 0; i < 40; ++i) nonmembers.push_back(2.0 + 0.01 * i);
  const MiaAttack a = calibrate_from_losses(members, nonmembers);
  CHECK(a.separable);
  CHECK(a.calibration_accuracy == 100.0);
  CHECK(attack_success(a, members) == 100.0);
  CHECK(attack_success(a, nonmembers) == 0.0);
}

TEST_CASE("identical loss distributions fall back to the median") {
  Rng rng(2);
  std::vector<double> members, nonmembers;
  for (int i = 0; i < 200; ++i) members.push_back(rng.uniform());
  for (int i = 0; i < 200; ++i) nonmembers.push_back(rng.uniform());
  const MiaAttack a = calibrate_from_losses(members, nonmembers);
  CHECK_FALSE(a.separable);
  std::vector<double> pooled = members;
  pooled.insert(pooled.end(), nonmembers.begin(), nonmembers.end());
  std::sort(pooled.begin(), pooled.end());
  CHECK(a.threshold == doctest::Approx(0.5 * (pooled[199] + pooled[200])));
  CHECK(attack_success(a, pooled) == 50.0);
}

TEST_CASE("the calibrated threshold maximizes balanced accuracy") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> members, nonmembers;
    const std::size_t n = 10 + rng.below(40), m = 10 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) members.push_back(std::abs(rng.normal()) * 0.5);
    for (std::size_t i = 0; i < m; ++i) nonmembers.push_back(std::abs(rng.normal()) * 2.0);
    const MiaAttack a = calibrate_from_losses(members, nonmembers);
    if (!a.separable) continue;
    std::vector<double> pooled = members;
    pooled.insert(pooled.end(), nonmembers.begin(), nonmembers.end());
    std::sort(pooled.begin(), pooled.end());
    double best = 50.0;
    for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
      best = std::max(best, balanced_accuracy(0.5 * (pooled[i] + pooled[i + 1]), members, nonmembers));
    }
    CHECK(a.calibration_accuracy == doctest::Approx(best));
    CHECK(balanced_accuracy(a.threshold, members, nonmembers) == doctest::Approx(best));
  }
}

TEST_CASE("calibration needs ten test rows and never reads the deletion set") {
  const data::DatasetSplit s = blobs();
  const nn::Model m = nn::Model::mlp({2, {8}, 4, nn::Activation::kRelu}, 0);
  data::AccessLog log;
  calibrate(m, s, &log);
  CHECK_FALSE(log.touched_any(s.del_indices));
  CHECK(log.seen().size() == s.retain_indices().size());

  data::DatasetSplit small = s;
  small.test_x = s.test_x.gather_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
  small.test_y.resize(9);
  CHECK_THROWS_AS(calibrate(m, small), InsufficientDataError);

  data::DatasetSplit no_forget = s;
  no_forget.del_indices.clear();
  CHECK_THROWS_AS(mia_success(m, no_forget), ConfigError);
  const double success = mia_success(m, s);
  CHECK(success >= 0.0);
  CHECK(success <= 100.0);
}

TEST_CASE("deletion capacity examples") {
  const std::vector<CapacityPoint> sweep = {{1, 90.0}, {2, 89.5}, {3, 88.0}, {4, 90.0}};
  CHECK(deletion_capacity(sweep, 90.0, 1.0) == 2);
  CHECK(deletion_capacity(sweep, 90.0, 2.0) == 4);
  CHECK(deletion_capacity(sweep, 95.0, 1.0) == 0);
  CHECK_THROWS_AS(deletion_capacity(std::vector<CapacityPoint>{}, 90.0, 1.0), ConfigError);
  const std::vector<CapacityPoint> unsorted = {{2, 90.0}, {1, 90.0}};
  CHECK_THROWS_AS(deletion_capacity(unsorted, 90.0, 1.0), ConfigError);
}

TEST_CASE("deletion capacity agrees with a brute-force scan") {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<CapacityPoint> sweep;
    std::vector<oracle::SweepPoint> scan;
    for (int r = 1; r <= 10; ++r) {
      if (rng.uniform() < 0.2) continue;
      const double acc = 85.0 + 10.0 * rng.uniform();
      sweep.push_back({r, acc});
      scan.push_back({r, acc});
    }
    if (sweep.empty()) continue;
    const double baseline = 90.0 + 5.0 * rng.uniform();
    const double tol = 3.0 * rng.uniform();
    CHECK(deletion_capacity(sweep, baseline, tol) == oracle::deletion_capacity_scan(scan, baseline, tol));
  }
}

TEST_CASE("transfer evaluation scores both models on the same inputs") {
  const data::DatasetSplit s = blobs();
  const nn::Model f = constant_class_model(2, 4);
  const nn::Model g = nn::Model::mlp({2, {8}, 4, nn::Activation::kRelu}, 1);
  const auto shifted = data::shift_testset(s, data::ShiftKind::kNoise, 0.5, 0);
  const TransferResult r = transfer_eval(f, g, shifted, s.test_y);
  CHECK(r.original == 25.0);
  CHECK(r.unlearned == accuracy(g, shifted, s.test_y));
  CHECK(transfer_eval(g, g, shifted, s.test_y).original == r.unlearned);
}

TEST_CASE("scaling curves skip undefined and stalled rows") {
  unlearn::Trace t(5);
  t[0].flos = 0.0, t[0].acc_f = 100.0;
  t[1].flos = 10.0, t[1].acc_f = 80.0;
  t[2].flos = 10.0, t[2].acc_f = 70.0;
  t[3].flos = 20.0;
  t[4].flos = 30.0, t[4].acc_f = 30.0;
  const auto curve = scaling_curve(t);
  CHECK(curve == std::vector<ScalingPoint>{{0.0, 100.0}, {10.0, 80.0}, {30.0, 30.0}});
  CHECK(flos_to_reach(curve, 50.0).value() == 30.0);
  CHECK(flos_to_reach(curve, 80.0).value() == 10.0);
  CHECK_FALSE(flos_to_reach(curve, 10.0).has_value());
  const auto curves = scaling_curves({{"a", t}, {"b", {}}});
  CHECK(curves.at("a").size() == 3);
  CHECK(curves.at("b").empty());
}

TEST_CASE("report json marks undefined metrics as null") {
  data::DatasetSplit s = blobs();
  s.del_indices.clear();
  const nn::Model m = nn::Model::mlp({2, {8}, 4, nn::Activation::kRelu}, 1);
  const EvalReport r = make_report(m, s, {1.5, 2e9, std::nullopt, "abc", 3});
  CHECK_FALSE(r.acc_f.has_value());
  CHECK_FALSE(r.mia_success.has_value());
  CHECK_FALSE(r.transfer_acc.has_value());
  const auto j = to_json(r);
  CHECK(j.at("acc_f").is_null());
  CHECK(j.at("mia_success").is_null());
  CHECK(j.at("transfer_acc").is_null());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"acc_test", "acc_f", "acc_r", "seconds", "flos", "mia_success",
                                         "transfer_acc", "config_hash", "seed"});
  CHECK(report_from_json(j) == r);
  CHECK(serialize_report(r).back() == '\n');

  const data::DatasetSplit full = blobs();
  const EvalReport with = make_report(m, full, {1.5, 2e9, data::shift_testset(full, data::ShiftKind::kScale, 0.1, 0), "abc", 3});
  CHECK(with.acc_f.has_value());
  CHECK(with.mia_success.has_value());
  CHECK(with.transfer_acc.has_value());
  CHECK(report_from_json(to_json(with)) == with);
}
