#ifndef UKIT_DATA_SPLIT_IO_H_
#define UKIT_DATA_SPLIT_IO_H_

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ukit/data/dataset.h"

namespace ukit::data {

nlohmann::ordered_json spec_to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const nlohmann::ordered_json& j);

// Writes `dir/train.csv`, `dir/test.csv` (columns x0..x{d-1}, label,
// is_deleted) and the sidecar `dir/split.json` (seed, del_ratio, spec).
// Values are written with round-trip precision.
void export_split(const DatasetSplit& split, const std::filesystem::path& dir);
// Inverse of export_split. Throws ResolutionError when files are missing and
// ConfigError when they disagree with the sidecar.
DatasetSplit import_split(const std::filesystem::path& dir);

}  // namespace ukit::data

#endif  // UKIT_DATA_SPLIT_IO_H_
