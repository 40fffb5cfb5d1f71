#include "ukit/data/split_io.h"

#include <charconv>
#include <sstream>
#include <string>

#include "ukit/errors.h"
#include "ukit/io.h"

namespace ukit::data {

using nlohmann::ordered_json;

ordered_json spec_to_json(const SynthSpec& spec) {
  return ordered_json{{"generator", to_string(spec.generator)},
                      {"num_classes", spec.num_classes},
                      {"samples_per_class", spec.samples_per_class},
                      {"noise", spec.noise},
                      {"dimension", spec.dimension},
                      {"seed", spec.seed}};
}

SynthSpec spec_from_json(const ordered_json& j) {
  SynthSpec s;
  s.generator = generator_from_string(j.at("generator").get<std::string>());
  s.num_classes = j.at("num_classes").get<int>();
  s.samples_per_class = j.at("samples_per_class").get<int>();
  s.noise = j.at("noise").get<double>();
  s.dimension = j.at("dimension").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

namespace {

std::string table_csv(const nn::Tensor& x, const std::vector<int>& y,
                      const std::vector<std::size_t>& deleted) {
  std::string out;
  for (std::size_t j = 0; j < x.cols(); ++j) out += "x" + std::to_string(j) + ",";
  out += "label,is_deleted\n";
  std::size_t d = 0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    for (double v : x.row(r)) out += format_double(v) + ",";
    const bool del = d < deleted.size() && deleted[d] == r;
    if (del) ++d;
    out += std::to_string(y[r]) + (del ? ",1\n" : ",0\n");
  }
  return out;
}

double parse_double(const std::string& cell) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ConfigError("bad numeric cell '" + cell + "'");
  }
  return v;
}

struct Table {
  nn::Tensor x;
  std::vector<int> y;
  std::vector<std::size_t> deleted;
};

Table read_table(const std::filesystem::path& path, std::size_t dim) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + " is empty");
  Table t;
  std::vector<double> values;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != dim + 2) throw ConfigError(path.string() + ": wrong column count");
    for (std::size_t j = 0; j < dim; ++j) values.push_back(parse_double(cells[j]));
    t.y.push_back(std::stoi(cells[dim]));
    if (cells[dim + 1] == "1") t.deleted.push_back(r);
    ++r;
  }
  if (r == 0) throw ConfigError(path.string() + " has no rows");
  t.x = nn::Tensor({r, dim}, std::move(values));
  return t;
}

}  // namespace

void export_split(const DatasetSplit& split, const std::filesystem::path& dir) {
  write_file_atomic(dir / "train.csv", table_csv(split.train_x, split.train_y, split.del_indices));
  write_file_atomic(dir / "test.csv", table_csv(split.test_x, split.test_y, {}));
  ordered_json side{{"seed", split.seed},
                    {"del_ratio", split.del_ratio},
                    {"num_classes", split.num_classes},
                    {"num_deleted", split.del_indices.size()},
                    {"spec", spec_to_json(split.spec)}};
  write_file_atomic(dir / "split.json", side.dump(1) + "\n");
}

DatasetSplit import_split(const std::filesystem::path& dir) {
  const auto sidecar = dir / "split.json";
  if (!std::filesystem::exists(sidecar)) throw ResolutionError("split sidecar not found: " + sidecar.string());
  ordered_json side;
  try {
    side = ordered_json::parse(read_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("split sidecar is not valid JSON: " + std::string(e.what()));
  }
  DatasetSplit split;
  split.spec = spec_from_json(side.at("spec"));
  split.seed = side.at("seed").get<std::uint64_t>();
  split.del_ratio = side.at("del_ratio").get<int>();
  split.num_classes = side.at("num_classes").get<int>();
  const std::size_t dim = static_cast<std::size_t>(split.spec.dimension);
  Table train = read_table(dir / "train.csv", dim);
  Table test = read_table(dir / "test.csv", dim);
  split.train_x = std::move(train.x);
  split.train_y = std::move(train.y);
  split.del_indices = std::move(train.deleted);
  split.test_x = std::move(test.x);
  split.test_y = std::move(test.y);
  if (split.del_indices.size() != side.at("num_deleted").get<std::size_t>()) {
    throw ConfigError("deleted-row count disagrees with the split sidecar");
  }
  if (split.del_ratio > 0 &&
      split.del_indices.size() != deletion_count(split.train_size(), split.del_ratio)) {
    throw ConfigError("deleted-row count does not match del_ratio");
  }
  return split;
}

}  // namespace ukit::data
