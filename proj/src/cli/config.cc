#include "ukit/cli/config.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "ukit/errors.h"
#include "ukit/io.h"
#include "ukit/nn/checkpoint.h"
#include "ukit/nn/rng.h"
#include "ukit/unlearn/methods.h"

namespace ukit::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

const KeyInfo* find_key(const std::string& name) {
  for (const KeyInfo& k : config_keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

void check_known(const std::string& key) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
}

class Reader {
 public:
  explicit Reader(const ConfigMap& settings) : settings_(settings) {}

  std::string text(const std::string& key) const {
    auto it = settings_.find(key);
    if (it != settings_.end()) return it->second;
    return find_key(key)->default_value;
  }

  long long integer(const std::string& key, long long lo, long long hi) const {
    const std::string v = text(key);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key + " must be an integer, got '" + v + "'");
    }
    if (out < lo || out > hi) {
      throw ConfigError(fmt::format("{} must lie in [{}, {}], got {}", key, lo, hi, out));
    }
    return out;
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const std::string v = text(key);
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw ConfigError(key + " must be a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  double real(const std::string& key) const {
    const std::string v = text(key);
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
      throw ConfigError(key + " must be a finite number, got '" + v + "'");
    }
    return out;
  }

  double positive(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0)) throw ConfigError(key + " must be positive");
    return v;
  }

  double non_negative(const std::string& key) const {
    const double v = real(key);
    if (v < 0.0) throw ConfigError(key + " must be non-negative");
    return v;
  }

  bool boolean(const std::string& key) const {
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ConfigError(key + " must be true or false, got '" + v + "'");
  }

  template <typename F>
  auto parsed(const std::string& key, F&& parse) const {
    try {
      return parse(text(key));
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }

 private:
  const ConfigMap& settings_;
};

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string hash_of(const ConfigMap& map) {
  return fmt::format("{:016x}", fnv1a64(canonical_text(map)));
}

}  // namespace

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"data_name", "blobs", "synthetic generator: blobs, spiral or ring", true},
      {"num_classes", "3", "number of classes", true},
      {"samples_per_class", "125", "points per class before the 80/20 split", true},
      {"noise", "0.1", "generator noise scale", true},
      {"dimension", "2", "feature dimension", true},
      {"seed", "0", "seed for data, deletion set, training and unlearning", true},
      {"backbone", "mlp-32-32", "mlp-<width>-<width>... hidden layer widths", true},
      {"activation", "relu", "relu, tanh or identity", true},
      {"train_epochs", "60", "epochs for the original model", true},
      {"train_learning_rate", "0.01", "learning rate for the original model", true},
      {"train_batch_size", "32", "batch size for the original model", true},
      {"train_optimizer", "adam", "sgd or adam for the original model", true},
      {"clock", "virtual", "virtual (FLOs at 1e9/s) or wall", true},
      {"unlearn_method", "rand_label", "unlearning method", false},
      {"del_ratio", "5", "percent of the training set to delete, 1..10", false},
      {"epochs", "10", "unlearning epochs", false},
      {"learning_rate", "0.001", "unlearning learning rate", false},
      {"batch_size", "32", "unlearning batch size", false},
      {"optimizer", "adam", "unlearning optimizer: sgd or adam", false},
      {"bad_teacher_seed", "7", "initialization seed of the Bad-T teacher", false},
      {"kl_temperature", "1", "softmax temperature of KL terms", false},
      {"scrub_max_steps", "1", "SCRUB passes over D_f per epoch", false},
      {"scrub_min_steps", "1", "SCRUB passes over D_r per epoch", false},
      {"scrub_alpha", "1", "SCRUB weight of the retain KL term", false},
      {"scrub_ascent_task_weight", "1", "SCRUB task-loss weight in the max phase", false},
      {"salun_sparsity", "0.5", "fraction of parameters SalUn updates", false},
      {"l1_lambda", "0", "l1 penalty strength", false},
      {"curriculum", "false", "SuperLoss curriculum weighting", false},
      {"curriculum_lambda", "1", "SuperLoss regularization weight", false},
      {"curriculum_decay", "0.9", "EMA decay of the SuperLoss baseline", false},
      {"adapter_rank", "0", "low-rank adapter rank; 0 trains the full model", false},
      {"adapter_scale", "1", "low-rank adapter scale", false},
      {"adapter_layers", "hidden", "hidden, all, or comma-separated linear layer ordinals",
       false},
      {"enforce_budget", "true", "fail runs that exceed the original training cost", false},
      {"shift_kind", "none", "transfer shift: none, noise, rotate or scale", false},
      {"shift_magnitude", "0", "transfer shift magnitude", false},
  };
  return keys;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected key = value", number));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    check_known(key);
    if (!out.emplace(key, value).second) {
      throw ConfigError(fmt::format("line {}: key '{}' set twice", number, key));
    }
  }
  return out;
}

ConfigMap parse_overrides(const std::vector<std::string>& tokens) {
  ConfigMap out;
  for (std::string token : tokens) {
    if (token.rfind("--", 0) == 0) token.erase(0, 2);
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("expected --key=value, got '" + token + "'");
    }
    std::string key = token.substr(0, eq);
    for (char& c : key) c = c == '-' ? '_' : c;
    check_known(key);
    out[key] = token.substr(eq + 1);
  }
  return out;
}

ConfigMap merge(ConfigMap base, const ConfigMap& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

std::vector<std::size_t> parse_backbone(const std::string& text) {
  if (text.rfind("mlp", 0) != 0) throw ConfigError("backbone must look like mlp-32-32");
  std::vector<std::size_t> hidden;
  std::string rest = text.substr(3);
  while (!rest.empty()) {
    if (rest[0] != '-') throw ConfigError("backbone must look like mlp-32-32");
    rest.erase(0, 1);
    std::size_t width = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), width);
    if (ec != std::errc() || width == 0) {
      throw ConfigError("backbone widths must be positive integers");
    }
    hidden.push_back(width);
    rest.erase(0, static_cast<std::size_t>(ptr - rest.data()));
  }
  return hidden;
}

std::string backbone_name(const std::vector<std::size_t>& hidden) {
  std::string out = "mlp";
  for (std::size_t h : hidden) out += "-" + std::to_string(h);
  return out;
}

RunConfig resolve(const ConfigMap& settings) {
  for (const auto& [k, v] : settings) check_known(k);
  const Reader r(settings);
  RunConfig c;
  c.data.generator = r.parsed("data_name", data::generator_from_string);
  c.data.num_classes = static_cast<int>(r.integer("num_classes", 2, 1000));
  c.data.samples_per_class = static_cast<int>(r.integer("samples_per_class", 10, 1000000));
  c.data.noise = r.non_negative("noise");
  c.data.dimension = static_cast<int>(r.integer("dimension", 2, 100000));
  const std::uint64_t seed = r.unsigned_integer("seed");
  c.data.seed = seed;

  c.train.arch.input_dim = static_cast<std::size_t>(c.data.dimension);
  c.train.arch.hidden = r.parsed("backbone", parse_backbone);
  c.train.arch.num_classes = static_cast<std::size_t>(c.data.num_classes);
  c.train.arch.activation = r.parsed("activation", nn::activation_from_string);
  c.train.epochs = static_cast<int>(r.integer("train_epochs", 0, 1000000));
  c.train.learning_rate = r.positive("train_learning_rate");
  c.train.batch_size = static_cast<int>(r.integer("train_batch_size", 1, 1000000));
  c.train.optimizer = r.parsed("train_optimizer", nn::optimizer_kind_from_string);
  c.train.seed = seed;
  c.train.clock = r.parsed("clock", unlearn::clock_kind_from_string);

  unlearn::UnlearnConfig& u = c.unlearn;
  u.method = r.parsed("unlearn_method", [](const std::string& name) {
    return unlearn::method_info(name).name;
  });
  u.del_ratio = static_cast<int>(r.integer("del_ratio", 1, 10));
  u.seed = seed;
  u.epochs = static_cast<int>(r.integer("epochs", 0, 1000000));
  u.learning_rate = r.positive("learning_rate");
  u.batch_size = static_cast<int>(r.integer("batch_size", 1, 1000000));
  u.optimizer = r.parsed("optimizer", nn::optimizer_kind_from_string);
  u.bad_teacher_seed = r.unsigned_integer("bad_teacher_seed");
  u.kl_temperature = r.positive("kl_temperature");
  u.scrub_max_steps = static_cast<int>(r.integer("scrub_max_steps", 0, 1000000));
  u.scrub_min_steps = static_cast<int>(r.integer("scrub_min_steps", 0, 1000000));
  u.scrub_alpha = r.non_negative("scrub_alpha");
  u.scrub_ascent_task_weight = r.non_negative("scrub_ascent_task_weight");
  u.salun_sparsity = r.real("salun_sparsity");
  if (!(u.salun_sparsity > 0.0 && u.salun_sparsity <= 1.0)) {
    throw ConfigError("salun_sparsity must lie in (0, 1]");
  }
  u.l1_lambda = r.non_negative("l1_lambda");
  u.curriculum.enabled = r.boolean("curriculum");
  u.curriculum.lam = r.positive("curriculum_lambda");
  u.curriculum.decay = r.real("curriculum_decay");
  if (!(u.curriculum.decay >= 0.0 && u.curriculum.decay < 1.0)) {
    throw ConfigError("curriculum_decay must lie in [0, 1)");
  }
  u.adapter_rank = static_cast<int>(r.integer("adapter_rank", 0, 1000000));
  u.adapter_scale = r.real("adapter_scale");
  u.adapter_layers = r.text("adapter_layers");
  u.clock = c.train.clock;
  u.enforce_budget = r.boolean("enforce_budget");

  const std::string shift = r.text("shift_kind");
  if (shift != "none") {
    c.shift = r.parsed("shift_kind", data::shift_kind_from_string);
  }
  c.shift_magnitude = r.non_negative("shift_magnitude");
  return c;
}

ConfigMap canonical(const RunConfig& c) {
  const unlearn::UnlearnConfig& u = c.unlearn;
  return ConfigMap{
      {"data_name", data::to_string(c.data.generator)},
      {"num_classes", std::to_string(c.data.num_classes)},
      {"samples_per_class", std::to_string(c.data.samples_per_class)},
      {"noise", format_double(c.data.noise)},
      {"dimension", std::to_string(c.data.dimension)},
      {"seed", std::to_string(c.data.seed)},
      {"backbone", backbone_name(c.train.arch.hidden)},
      {"activation", nn::activation_name(c.train.arch.activation)},
      {"train_epochs", std::to_string(c.train.epochs)},
      {"train_learning_rate", format_double(c.train.learning_rate)},
      {"train_batch_size", std::to_string(c.train.batch_size)},
      {"train_optimizer", nn::to_string(c.train.optimizer)},
      {"clock", unlearn::to_string(c.train.clock)},
      {"unlearn_method", u.method},
      {"del_ratio", std::to_string(u.del_ratio)},
      {"epochs", std::to_string(u.epochs)},
      {"learning_rate", format_double(u.learning_rate)},
      {"batch_size", std::to_string(u.batch_size)},
      {"optimizer", nn::to_string(u.optimizer)},
      {"bad_teacher_seed", std::to_string(u.bad_teacher_seed)},
      {"kl_temperature", format_double(u.kl_temperature)},
      {"scrub_max_steps", std::to_string(u.scrub_max_steps)},
      {"scrub_min_steps", std::to_string(u.scrub_min_steps)},
      {"scrub_alpha", format_double(u.scrub_alpha)},
      {"scrub_ascent_task_weight", format_double(u.scrub_ascent_task_weight)},
      {"salun_sparsity", format_double(u.salun_sparsity)},
      {"l1_lambda", format_double(u.l1_lambda)},
      {"curriculum", fmt_bool(u.curriculum.enabled)},
      {"curriculum_lambda", format_double(u.curriculum.lam)},
      {"curriculum_decay", format_double(u.curriculum.decay)},
      {"adapter_rank", std::to_string(u.adapter_rank)},
      {"adapter_scale", format_double(u.adapter_scale)},
      {"adapter_layers", u.adapter_layers},
      {"enforce_budget", fmt_bool(u.enforce_budget)},
      {"shift_kind", c.shift ? data::to_string(*c.shift) : "none"},
      {"shift_magnitude", format_double(c.shift_magnitude)},
  };
}

std::string canonical_text(const ConfigMap& canonical_map) {
  std::string out;
  for (const auto& [k, v] : canonical_map) out += k + "=" + v + "\n";
  return out;
}

std::string config_hash(const RunConfig& config) { return hash_of(canonical(config)); }

std::string train_hash(const RunConfig& config) {
  ConfigMap subset;
  for (const auto& [k, v] : canonical(config)) {
    if (find_key(k)->affects_training) subset.emplace(k, v);
  }
  return hash_of(subset);
}

}  // namespace ukit::cli
