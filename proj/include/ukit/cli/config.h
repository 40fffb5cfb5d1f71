#ifndef UKIT_CLI_CONFIG_H_
#define UKIT_CLI_CONFIG_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ukit/data/dataset.h"
#include "ukit/data/synth.h"
#include "ukit/unlearn/config.h"

namespace ukit::cli {

// Flat key=value settings. Later sources win.
using ConfigMap = std::map<std::string, std::string>;

struct KeyInfo {
  std::string name;
  std::string default_value;
  std::string help;
  bool affects_training;  // part of the original model's identity
};

// Every recognized key, in documentation order.
const std::vector<KeyInfo>& config_keys();

// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
// Throws ConfigError on malformed lines, unknown keys or repeated keys.
ConfigMap parse_config_text(const std::string& text);
// Parses `--key=value` / `key=value` tokens. Throws ConfigError on anything
// else.
ConfigMap parse_overrides(const std::vector<std::string>& tokens);
// `overrides` wins over `base`.
ConfigMap merge(ConfigMap base, const ConfigMap& overrides);

struct RunConfig {
  data::SynthSpec data;
  unlearn::TrainConfig train;
  unlearn::UnlearnConfig unlearn;
  std::optional<data::ShiftKind> shift;
  double shift_magnitude = 0.0;
};

// Fills defaults and validates every value. Throws ConfigError naming the
// key on bad input.
RunConfig resolve(const ConfigMap& settings);

// All keys with fully resolved values, formatted canonically.
ConfigMap canonical(const RunConfig& config);
std::string canonical_text(const ConfigMap& canonical_map);

// 16 hex digits of FNV-1a over the canonical text of every key.
std::string config_hash(const RunConfig& config);
// Same over the keys that determine the original model and its split.
std::string train_hash(const RunConfig& config);

// "mlp-32-32" <-> {32, 32}. "mlp" alone is a linear classifier.
std::vector<std::size_t> parse_backbone(const std::string& text);
std::string backbone_name(const std::vector<std::size_t>& hidden);

}  // namespace ukit::cli

#endif  // UKIT_CLI_CONFIG_H_
