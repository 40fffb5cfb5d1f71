#include "ukit/eval/mia.h"

#include <algorithm>
#include <cmath>

#include "ukit/errors.h"
#include "ukit/nn/ops.h"

namespace ukit::eval {

namespace {

constexpr double kAlpha = 0.05;
constexpr std::size_t kMinNonMembers = 10;

std::vector<double> losses_of(const nn::Model& model, const data::SampleView& view) {
  const auto labels = view.all_labels();
  return nn::cross_entropy_values(model.predict(view.all_features()), labels);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

MiaAttack calibrate_from_losses(std::span<const double> member_losses,
                                std::span<const double> nonmember_losses) {
  if (member_losses.empty() || nonmember_losses.empty()) {
    throw InsufficientDataError("attack calibration needs members and non-members");
  }
  struct Point {
    double loss;
    bool member;
  };
  std::vector<Point> pooled;
  pooled.reserve(member_losses.size() + nonmember_losses.size());
  for (double l : member_losses) pooled.push_back({l, true});
  for (double l : nonmember_losses) pooled.push_back({l, false});
  std::sort(pooled.begin(), pooled.end(),
            [](const Point& a, const Point& b) { return a.loss < b.loss; });

  const double n = static_cast<double>(member_losses.size());
  const double m = static_cast<double>(nonmember_losses.size());
  // Threshold below everything: no member detected, every non-member correct.
  double best_bacc = 0.5;
  double best_threshold = pooled.front().loss - 1.0;
  std::size_t members_below = 0, nonmembers_below = 0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    (pooled[i].member ? members_below : nonmembers_below) += 1;
    if (i + 1 < pooled.size() && pooled[i + 1].loss == pooled[i].loss) continue;
    const double threshold =
        i + 1 < pooled.size() ? 0.5 * (pooled[i].loss + pooled[i + 1].loss) : pooled[i].loss + 1.0;
    const double tpr = static_cast<double>(members_below) / n;
    const double tnr = 1.0 - static_cast<double>(nonmembers_below) / m;
    const double bacc = 0.5 * (tpr + tnr);
    if (bacc > best_bacc) {
      best_bacc = bacc;
      best_threshold = threshold;
    }
  }

  MiaAttack attack;
  attack.calibration_accuracy = 100.0 * best_bacc;
  const double advantage = 2.0 * best_bacc - 1.0;
  const double critical = std::sqrt(-std::log(kAlpha / 2.0) / 2.0) * std::sqrt((n + m) / (n * m));
  attack.separable = advantage > critical;
  if (attack.separable) {
    attack.threshold = best_threshold;
  } else {
    std::vector<double> all;
    all.reserve(pooled.size());
    for (const Point& p : pooled) all.push_back(p.loss);
    attack.threshold = median(std::move(all));
  }
  return attack;
}

double attack_success(const MiaAttack& attack, std::span<const double> losses) {
  if (losses.empty()) throw ConfigError("attack success on an empty set");
  std::size_t hits = 0;
  for (double l : losses) hits += l < attack.threshold ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(losses.size());
}

MiaAttack calibrate(const nn::Model& model, const data::DatasetSplit& split,
                    data::AccessLog* log) {
  if (split.test_y.size() < kMinNonMembers) {
    throw InsufficientDataError("membership attack needs at least 10 test samples, got " +
                                std::to_string(split.test_y.size()));
  }
  const auto retain = split.retain_indices();
  if (retain.empty()) throw ConfigError("membership attack needs a non-empty D_r");
  const auto members = losses_of(model, data::train_view(split, retain, log));
  const auto nonmembers = nn::cross_entropy_values(model.predict(split.test_x), split.test_y);
  return calibrate_from_losses(members, nonmembers);
}

double mia_success(const nn::Model& model, const data::DatasetSplit& split,
                   const MiaAttack& attack) {
  if (split.del_indices.empty()) throw ConfigError("membership attack needs a non-empty D_f");
  return attack_success(attack, losses_of(model, data::train_view(split, split.del_indices)));
}

double mia_success(const nn::Model& model, const data::DatasetSplit& split) {
  return mia_success(model, split, calibrate(model, split));
}

}  // namespace ukit::eval
