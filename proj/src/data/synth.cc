#include "ukit/data/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ukit/errors.h"
#include "ukit/nn/rng.h"

namespace ukit::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const SynthSpec& spec) {
  if (spec.num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (spec.samples_per_class < 10) throw ConfigError("samples_per_class must be at least 10");
  if (spec.dimension < 2) throw ConfigError("dimension must be at least 2");
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw ConfigError("noise must be a finite non-negative number");
  }
}

// Noise-free position of sample `i` of `n` in class `k`, first two coords.
void base_point(const SynthSpec& spec, int k, int i, int n, double phase, Rng& rng,
                double& a, double& b) {
  const double c = spec.num_classes;
  switch (spec.generator) {
    case Generator::kGaussianBlobs: {
      const double theta = kTwoPi * k / c + phase;
      a = std::cos(theta);
      b = std::sin(theta);
      return;
    }
    case Generator::kSpiral: {
      const double t = (i + 0.5) / n;
      const double theta = kTwoPi * k / c + 2.0 * t + phase;
      a = t * std::cos(theta);
      b = t * std::sin(theta);
      return;
    }
    case Generator::kRing: {
      const double radius = (k + 1.0) / c;
      const double theta = rng.uniform(0.0, kTwoPi);
      a = radius * std::cos(theta);
      b = radius * std::sin(theta);
      return;
    }
  }
}

}  // namespace

DatasetSplit generate(const SynthSpec& spec) {
  validate(spec);
  const int c = spec.num_classes;
  const int n = spec.samples_per_class;
  const std::size_t d = static_cast<std::size_t>(spec.dimension);
  Rng rng = Rng::stream(spec.seed, "data/points");
  Rng split_rng = Rng::stream(spec.seed, "data/split");
  const double phase = rng.uniform(0.0, kTwoPi);

  const int train_per_class = static_cast<int>(std::lround(0.8 * n));
  std::vector<std::vector<double>> train_rows, test_rows;
  std::vector<int> train_labels, test_labels;
  for (int k = 0; k < c; ++k) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d, 0.0));
    for (int i = 0; i < n; ++i) {
      double a = 0.0, b = 0.0;
      base_point(spec, k, i, n, phase, rng, a, b);
      rows[i][0] = a;
      rows[i][1] = b;
      for (std::size_t j = 0; j < d; ++j) rows[i][j] += spec.noise * rng.normal();
    }
    auto order = split_rng.permutation(n);
    for (int i = 0; i < n; ++i) {
      auto& row = rows[order[i]];
      if (i < train_per_class) {
        train_rows.push_back(std::move(row));
        train_labels.push_back(k);
      } else {
        test_rows.push_back(std::move(row));
        test_labels.push_back(k);
      }
    }
  }

  auto pack = [&](std::vector<std::vector<double>>& rows, std::vector<int>& labels,
                  nn::Tensor& x, std::vector<int>& y) {
    auto order = split_rng.permutation(rows.size());
    std::vector<double> values;
    values.reserve(rows.size() * d);
    y.clear();
    for (std::size_t p : order) {
      values.insert(values.end(), rows[p].begin(), rows[p].end());
      y.push_back(labels[p]);
    }
    x = nn::Tensor({rows.size(), d}, std::move(values));
  };

  DatasetSplit split;
  pack(train_rows, train_labels, split.train_x, split.train_y);
  pack(test_rows, test_labels, split.test_x, split.test_y);
  split.num_classes = c;
  split.seed = spec.seed;
  split.spec = spec;
  return split;
}

std::vector<std::size_t> sample_deletion_set(const DatasetSplit& split, int del_ratio,
                                             std::uint64_t seed) {
  if (del_ratio < 1 || del_ratio > 10) {
    throw ConfigError("del_ratio must be an integer percentage in 1..10, got " +
                      std::to_string(del_ratio));
  }
  auto perm = Rng::stream(seed, "data/deletion").permutation(split.train_size());
  perm.resize(deletion_count(split.train_size(), del_ratio));
  std::sort(perm.begin(), perm.end());
  return perm;
}

DatasetSplit with_deletion(DatasetSplit split, int del_ratio, std::uint64_t seed) {
  split.del_indices = sample_deletion_set(split, del_ratio, seed);
  split.del_ratio = del_ratio;
  return split;
}

ShiftKind shift_kind_from_string(const std::string& name) {
  if (name == "noise") return ShiftKind::kNoise;
  if (name == "rotate") return ShiftKind::kRotate;
  if (name == "scale") return ShiftKind::kScale;
  throw ConfigError("unknown shift kind '" + name + "' (expected noise, rotate or scale)");
}

std::string to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::kNoise:
      return "noise";
    case ShiftKind::kRotate:
      return "rotate";
    case ShiftKind::kScale:
      return "scale";
  }
  return "noise";
}

nn::Tensor shift_testset(const DatasetSplit& split, ShiftKind kind, double magnitude,
                         std::uint64_t seed) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw ConfigError("shift magnitude must be a finite non-negative number");
  }
  nn::Tensor x = split.test_x;
  if (magnitude == 0.0) return x;
  switch (kind) {
    case ShiftKind::kNoise: {
      Rng rng = Rng::stream(seed, "data/shift");
      for (double& v : x.values()) v += magnitude * rng.normal();
      break;
    }
    case ShiftKind::kRotate: {
      if (x.cols() < 2) throw ConfigError("rotation needs at least two coordinates");
      const double c = std::cos(magnitude), s = std::sin(magnitude);
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const double a = x.at(r, 0), b = x.at(r, 1);
        x.at(r, 0) = c * a - s * b;
        x.at(r, 1) = s * a + c * b;
      }
      break;
    }
    case ShiftKind::kScale:
      for (double& v : x.values()) v *= 1.0 + magnitude;
      break;
  }
  return x;
}

std::vector<int> corrupt_label_values(std::span<const int> labels, int num_classes,
                                      std::uint64_t seed) {
  if (num_classes < 2) throw ConfigError("label corruption needs at least two classes");
  Rng rng = Rng::stream(seed, "data/corrupt");
  std::vector<int> out;
  out.reserve(labels.size());
  for (int y : labels) {
    const int r = static_cast<int>(rng.below(static_cast<std::size_t>(num_classes - 1)));
    out.push_back(r < y ? r : r + 1);
  }
  return out;
}

std::vector<int> corrupt_labels(const DatasetSplit& split, std::span<const std::size_t> indices,
                                std::uint64_t seed) {
  std::vector<int> original;
  original.reserve(indices.size());
  for (std::size_t i : indices) original.push_back(split.train_y.at(i));
  return corrupt_label_values(original, split.num_classes, seed);
}

}  // namespace ukit::data
