#include "ukit/data/dataset.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "ukit/errors.h"

namespace ukit::data {

Generator generator_from_string(const std::string& name) {
  if (name == "gaussian_blobs" || name == "blobs") return Generator::kGaussianBlobs;
  if (name == "spiral") return Generator::kSpiral;
  if (name == "ring") return Generator::kRing;
  throw ConfigError("unknown generator '" + name + "' (expected gaussian_blobs, spiral or ring)");
}

std::string to_string(Generator g) {
  switch (g) {
    case Generator::kGaussianBlobs:
      return "gaussian_blobs";
    case Generator::kSpiral:
      return "spiral";
    case Generator::kRing:
      return "ring";
  }
  return "gaussian_blobs";
}

std::vector<std::size_t> DatasetSplit::retain_indices() const {
  std::vector<std::size_t> out;
  out.reserve(train_size() - del_indices.size());
  std::size_t d = 0;
  for (std::size_t i = 0; i < train_size(); ++i) {
    if (d < del_indices.size() && del_indices[d] == i) {
      ++d;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> DatasetSplit::all_train_indices() const {
  std::vector<std::size_t> out(train_size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

bool AccessLog::touched_any(std::span<const std::size_t> indices) const {
  return std::any_of(indices.begin(), indices.end(),
                     [this](std::size_t i) { return seen_.count(i) > 0; });
}

SampleView::SampleView(const nn::Tensor& x, std::span<const int> y,
                       std::vector<std::size_t> indices, AccessLog* log)
    : x_(&x), y_(y), indices_(std::move(indices)), log_(log) {
  for (std::size_t i : indices_) {
    if (i >= y_.size()) throw ShapeError("sample index out of range");
  }
}

void SampleView::log(std::span<const std::size_t> positions) const {
  if (!log_) return;
  std::vector<std::size_t> global;
  global.reserve(positions.size());
  for (std::size_t p : positions) global.push_back(indices_[p]);
  log_->record(global);
}

nn::Tensor SampleView::features(std::span<const std::size_t> positions) const {
  log(positions);
  std::vector<std::size_t> rows;
  rows.reserve(positions.size());
  for (std::size_t p : positions) rows.push_back(indices_.at(p));
  return x_->gather_rows(rows);
}

std::vector<int> SampleView::labels(std::span<const std::size_t> positions) const {
  std::vector<int> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(y_[indices_.at(p)]);
  return out;
}

nn::Tensor SampleView::all_features() const {
  std::vector<std::size_t> pos(size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  return features(pos);
}

std::vector<int> SampleView::all_labels() const {
  std::vector<int> out;
  out.reserve(size());
  for (std::size_t i : indices_) out.push_back(y_[i]);
  return out;
}

SampleView train_view(const DatasetSplit& split, std::vector<std::size_t> indices, AccessLog* log) {
  return SampleView(split.train_x, split.train_y, std::move(indices), log);
}

SampleView test_view(const DatasetSplit& split) {
  std::vector<std::size_t> idx(split.test_y.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return SampleView(split.test_x, split.test_y, std::move(idx));
}

std::size_t deletion_count(std::size_t train_size, int del_ratio) {
  if (del_ratio < 0 || del_ratio > 100) {
    throw ConfigError("deletion ratio must lie in 0..100, got " + std::to_string(del_ratio));
  }
  return (train_size * static_cast<std::size_t>(del_ratio) + 50) / 100;
}

}  // namespace ukit::data
