#ifndef UKIT_CLI_COMMANDS_H_
#define UKIT_CLI_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ukit/cli/config.h"
#include "ukit/cli/manifest.h"
#include "ukit/eval/report.h"
#include "ukit/unlearn/config.h"

namespace ukit::cli {

inline constexpr const char* kArtifactRootEnv = "UKIT_ARTIFACT_ROOT";

// --root flag, else $UKIT_ARTIFACT_ROOT, else ./ukit-artifacts.
std::filesystem::path artifact_root(const std::optional<std::string>& flag);

// Shared state for one CLI invocation. Messages from parallel sweep workers
// are serialized through `log_mutex`.
class Context {
 public:
  Context(std::filesystem::path root, std::ostream& out, std::ostream& err);

  const std::filesystem::path& root() const { return root_; }
  Manifest& manifest() { return *manifest_; }
  void info(const std::string& message);
  void warn(const std::string& message);

  std::filesystem::path model_dir(const std::string& train_hash) const;
  std::filesystem::path run_dir(const std::string& config_hash) const;

 private:
  std::filesystem::path root_;
  std::ostream& out_;
  std::ostream& err_;
  std::mutex log_mutex_;
  std::unique_ptr<Manifest> manifest_;
};

struct TrainOutcome {
  bool trained = false;  // false when an existing checkpoint was reused
  std::filesystem::path model_dir;
  unlearn::TrainingRecord record;
};

// Generates the data, trains f on all of D_train and stores
// models/<train_hash>/{model.json, trace.csv, split/}. The checkpoint
// metadata carries the training record that bounds unlearning cost.
TrainOutcome cmd_train(Context& ctx, const RunConfig& config, bool force = false);

struct UnlearnOutcome {
  bool executed = false;  // false when a completed run was reused
  std::string config_hash;
  std::filesystem::path run_dir;
  eval::EvalReport report;
};

// Unlearns the stored original and writes runs/<config_hash>/{config.json,
// model.json, trace.csv, report.json, split/}. A completed run is left alone
// unless `force`. Throws ResolutionError when the original is missing.
UnlearnOutcome cmd_unlearn(Context& ctx, const RunConfig& config, bool force = false);

// Recomputes the report of a run directory from its stored config, model and
// split.
eval::EvalReport cmd_evaluate(Context& ctx, const std::filesystem::path& run_dir);

struct SweepGrid {
  std::vector<std::string> methods;
  std::vector<int> ratios;
  std::vector<std::uint64_t> seeds;
};

// "1-10", "1,3,5" or a mix such as "1-3,7".
std::vector<long long> parse_int_list(const std::string& text);

// Expands the grid over `base`. Entries that resolve to the same config hash
// are dropped with a message in `warnings`. Throws ConfigError on an empty
// grid.
std::vector<RunConfig> plan_sweep(const SweepGrid& grid, const ConfigMap& base,
                                  std::vector<std::string>* warnings = nullptr);

struct SweepSummary {
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already complete in the manifest
  std::size_t failed = 0;
};

// Trains the originals the grid needs, then runs every planned unlearning
// job on `jobs` worker threads. A failing run is recorded and does not stop
// the others; completed runs are skipped, so an interrupted sweep resumes.
SweepSummary cmd_sweep(Context& ctx, const SweepGrid& grid, const ConfigMap& base, int jobs);

struct ReportSummary {
  std::size_t runs = 0;
  std::vector<std::string> warnings;
  std::filesystem::path markdown;
  std::filesystem::path csv;
  std::filesystem::path curves;
  std::filesystem::path scaling;
};

// Aggregates completed runs (every done run in the manifest when `run_dirs`
// is empty) into leaderboard.md, leaderboard.csv, curves.csv and
// scaling.csv under `out_dir`.
ReportSummary cmd_report(Context& ctx, std::vector<std::filesystem::path> run_dirs,
                         const std::filesystem::path& out_dir);

// Composite ranking score of one run: the mean of acc_test, acc_r,
// 100 - |acc_f - chance| and 100 - mia_success. Empty if any term is.
std::optional<double> composite_score(const eval::EvalReport& report, int num_classes);

}  // namespace ukit::cli

#endif  // UKIT_CLI_COMMANDS_H_
