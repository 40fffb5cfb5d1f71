#ifndef UKIT_DATA_DATASET_H_
#define UKIT_DATA_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ukit/nn/tensor.h"

namespace ukit::data {

enum class Generator { kGaussianBlobs, kSpiral, kRing };

Generator generator_from_string(const std::string& name);
std::string to_string(Generator g);

struct SynthSpec {
  Generator generator = Generator::kGaussianBlobs;
  int num_classes = 3;
  int samples_per_class = 100;
  double noise = 0.1;
  int dimension = 2;
  std::uint64_t seed = 0;

  bool operator==(const SynthSpec&) const = default;
};

// Train/test tensors plus the deletion set D_f. D_r is every train index not
// in `del_indices`.
struct DatasetSplit {
  nn::Tensor train_x;
  std::vector<int> train_y;
  nn::Tensor test_x;
  std::vector<int> test_y;
  std::vector<std::size_t> del_indices;  // sorted, unique
  int num_classes = 0;
  int del_ratio = 0;  // percent; 0 means no deletion set drawn
  std::uint64_t seed = 0;
  SynthSpec spec;

  std::size_t train_size() const { return train_y.size(); }
  std::vector<std::size_t> forget_indices() const { return del_indices; }
  std::vector<std::size_t> retain_indices() const;
  std::vector<std::size_t> all_train_indices() const;

  bool operator==(const DatasetSplit&) const = default;
};

// Records every train index a loader hands out.
class AccessLog {
 public:
  void record(std::span<const std::size_t> indices) {
    seen_.insert(indices.begin(), indices.end());
  }
  const std::set<std::size_t>& seen() const { return seen_; }
  bool touched_any(std::span<const std::size_t> indices) const;

 private:
  std::set<std::size_t> seen_;
};

// Ordered subset of a feature/label table. Batches are materialized on
// demand and reported to the optional access log.
class SampleView {
 public:
  SampleView(const nn::Tensor& x, std::span<const int> y, std::vector<std::size_t> indices,
             AccessLog* log = nullptr);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const std::vector<std::size_t>& indices() const { return indices_; }

  // Rows `order[begin, begin+count)` where `order` indexes into this view.
  nn::Tensor features(std::span<const std::size_t> positions) const;
  std::vector<int> labels(std::span<const std::size_t> positions) const;
  nn::Tensor all_features() const;
  std::vector<int> all_labels() const;

 private:
  void log(std::span<const std::size_t> positions) const;

  const nn::Tensor* x_;
  std::span<const int> y_;
  std::vector<std::size_t> indices_;
  AccessLog* log_;
};

SampleView train_view(const DatasetSplit& split, std::vector<std::size_t> indices,
                      AccessLog* log = nullptr);
SampleView test_view(const DatasetSplit& split);

// round(n * ratio / 100), half away from zero.
std::size_t deletion_count(std::size_t train_size, int del_ratio);

}  // namespace ukit::data

#endif  // UKIT_DATA_DATASET_H_
