#ifndef UKIT_DATA_SYNTH_H_
#define UKIT_DATA_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ukit/data/dataset.h"

namespace ukit::data {

// Deterministic synthetic classification data with a stratified 80/20
// train/test split. The result carries no deletion set.
//   gaussian_blobs: class centers evenly spaced on the unit circle of the
//                   first two coordinates (random phase), isotropic noise.
//   spiral:         one arm per class, two radians of sweep.
//   ring:           concentric rings, class k at radius (k+1)/C.
// Coordinates beyond the first two carry noise only.
DatasetSplit generate(const SynthSpec& spec);

// Prefix of a seed-determined permutation of the train indices, sorted, of
// size round(|train| * del_ratio / 100). Prefixes nest across ratios.
std::vector<std::size_t> sample_deletion_set(const DatasetSplit& split, int del_ratio,
                                             std::uint64_t seed);

// Copy of `split` with its deletion set drawn.
DatasetSplit with_deletion(DatasetSplit split, int del_ratio, std::uint64_t seed);

enum class ShiftKind { kNoise, kRotate, kScale };
ShiftKind shift_kind_from_string(const std::string& name);
std::string to_string(ShiftKind kind);

// Shifted copy of the test features; labels are unchanged.
//   noise:  + N(0, magnitude^2) per coordinate
//   rotate: rotate the first two coordinates by `magnitude` radians
//   scale:  multiply every coordinate by (1 + magnitude)
nn::Tensor shift_testset(const DatasetSplit& split, ShiftKind kind, double magnitude,
                         std::uint64_t seed);

// Replacement labels for the listed train indices, each drawn uniformly from
// the other C-1 classes.
std::vector<int> corrupt_labels(const DatasetSplit& split, std::span<const std::size_t> indices,
                                std::uint64_t seed);
std::vector<int> corrupt_label_values(std::span<const int> labels, int num_classes,
                                      std::uint64_t seed);

}  // namespace ukit::data

#endif  // UKIT_DATA_SYNTH_H_
