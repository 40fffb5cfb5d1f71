#include "ukit/cli/commands.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "ukit/data/split_io.h"
#include "ukit/data/synth.h"
#include "ukit/errors.h"
#include "ukit/eval/analysis.h"
#include "ukit/eval/metrics.h"
#include "ukit/io.h"
#include "ukit/nn/checkpoint.h"
#include "ukit/unlearn/methods.h"
#include "ukit/unlearn/taxonomy.h"
#include "ukit/unlearn/trace.h"

namespace ukit::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

fs::path artifact_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kArtifactRootEnv); env && *env) return env;
  return "ukit-artifacts";
}

Context::Context(fs::path root, std::ostream& out, std::ostream& err)
    : root_(std::move(root)), out_(out), err_(err), manifest_(std::make_unique<Manifest>(root_)) {}

void Context::info(const std::string& message) {
  std::lock_guard lock(log_mutex_);
  out_ << message << "\n";
}

void Context::warn(const std::string& message) {
  std::lock_guard lock(log_mutex_);
  err_ << "warning: " << message << "\n";
}

fs::path Context::model_dir(const std::string& train_hash) const {
  return root_ / "models" / train_hash;
}

fs::path Context::run_dir(const std::string& config_hash) const {
  return root_ / "runs" / config_hash;
}

namespace {

std::string relative(const Context& ctx, const fs::path& p) {
  return fs::relative(p, ctx.root()).generic_string();
}

ordered_json config_record(const RunConfig& config) {
  ordered_json settings = ordered_json::object();
  for (const auto& [k, v] : canonical(config)) settings[k] = v;
  return ordered_json{{"config_hash", config_hash(config)},
                      {"train_hash", train_hash(config)},
                      {"settings", settings}};
}

RunConfig load_run_config(const fs::path& run_dir) {
  const fs::path file = run_dir / "config.json";
  if (!fs::exists(file)) throw ResolutionError("no run config at " + file.string());
  try {
    const auto j = ordered_json::parse(read_file(file));
    ConfigMap settings;
    for (const auto& [k, v] : j.at("settings").items()) settings[k] = v.get<std::string>();
    return resolve(settings);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed run config " + file.string() + ": " + e.what());
  }
}

unlearn::TrainingRecord record_of(const nn::Checkpoint& checkpoint, const fs::path& path) {
  if (!checkpoint.metadata.contains("training")) {
    throw ResolutionError(path.string() + " carries no training record");
  }
  return unlearn::training_record_from_json(checkpoint.metadata.at("training"));
}

std::optional<nn::Tensor> shifted_test(const RunConfig& config, const data::DatasetSplit& split) {
  if (!config.shift) return std::nullopt;
  return data::shift_testset(split, *config.shift, config.shift_magnitude, config.data.seed);
}

eval::EvalReport report_for(const RunConfig& config, const nn::Model& model,
                            const data::DatasetSplit& split, double seconds, double flos) {
  eval::ReportInputs inputs;
  inputs.seconds = seconds;
  inputs.flos = flos;
  inputs.shifted_test_x = shifted_test(config, split);
  inputs.config_hash = config_hash(config);
  inputs.seed = config.unlearn.seed;
  return eval::make_report(model, split, inputs);
}

}  // namespace

TrainOutcome cmd_train(Context& ctx, const RunConfig& config, bool force) {
  const std::string hash = train_hash(config);
  const fs::path dir = ctx.model_dir(hash);
  const fs::path model_file = dir / "model.json";
  const auto existing = ctx.manifest().model(hash);
  if (!force && existing && existing->status == RunStatus::kDone && fs::exists(model_file)) {
    const auto checkpoint = nn::load_checkpoint(model_file);
    ctx.info("original " + hash + " already trained: " + model_file.string());
    return TrainOutcome{false, dir, record_of(checkpoint, model_file)};
  }
  if (existing && existing->status == RunStatus::kDone) {
    ctx.warn("overwriting trained original " + hash + " (--force)");
  }

  ManifestEntry entry;
  entry.status = RunStatus::kPending;
  entry.path = relative(ctx, dir);
  entry.started = utc_timestamp();
  entry.info = {{"backbone", backbone_name(config.train.arch.hidden)},
                {"data_name", data::to_string(config.data.generator)},
                {"seed", config.data.seed}};
  ctx.manifest().put_model(hash, entry);

  unlearn::Trace partial;
  unlearn::RunHooks hooks;
  hooks.on_epoch = [&partial](const unlearn::TraceRow& row, const nn::Model&) {
    partial.push_back(row);
  };
  try {
    const data::DatasetSplit split = data::generate(config.data);
    unlearn::TrainResult trained =
        unlearn::train_model(split, split.all_train_indices(), config.train, hooks);
    nn::Checkpoint checkpoint{trained.model, ordered_json::object()};
    checkpoint.metadata["train_hash"] = hash;
    checkpoint.metadata["training"] = unlearn::to_json(trained.record);
    checkpoint.metadata["data"] = data::spec_to_json(config.data);
    data::export_split(split, dir / "split");
    write_file_atomic(dir / "trace.csv", unlearn::trace_to_csv(trained.trace));
    nn::save_checkpoint(model_file, checkpoint);

    entry.status = RunStatus::kDone;
    entry.finished = utc_timestamp();
    ctx.manifest().put_model(hash, entry);
    ctx.info(fmt::format("trained original {}: acc_test {:.1f}, {} s (virtual clock: {}) -> {}",
                         hash, trained.trace.back().acc_test, format_double(trained.record.seconds),
                         config.train.clock == unlearn::ClockKind::kVirtual ? "yes" : "no",
                         model_file.string()));
    return TrainOutcome{true, dir, trained.record};
  } catch (const std::exception& e) {
    if (!partial.empty()) {
      write_file_atomic(dir / "trace.csv", unlearn::trace_to_csv(partial));
      ctx.warn("training aborted; partial trace in " + (dir / "trace.csv").string());
    }
    entry.status = RunStatus::kFailed;
    entry.finished = utc_timestamp();
    entry.error = e.what();
    ctx.manifest().put_model(hash, entry);
    throw;
  }
}

UnlearnOutcome cmd_unlearn(Context& ctx, const RunConfig& config, bool force) {
  const std::string hash = config_hash(config);
  const std::string thash = train_hash(config);
  const fs::path dir = ctx.run_dir(hash);
  const auto existing = ctx.manifest().run(hash);
  if (!force && existing && existing->status == RunStatus::kDone &&
      fs::exists(dir / "report.json")) {
    ctx.info("run " + hash + " already complete (use --force to redo): " + dir.string());
    const auto report =
        eval::report_from_json(ordered_json::parse(read_file(dir / "report.json")));
    return UnlearnOutcome{false, hash, dir, report};
  }

  const fs::path model_dir = ctx.model_dir(thash);
  const fs::path model_file = model_dir / "model.json";
  if (!fs::exists(model_file) || !fs::exists(model_dir / "split" / "split.json")) {
    throw ResolutionError("no original model for these data/backbone settings (train hash " +
                          thash + ") under " + model_dir.string() +
                          "; run `ukit train` with the same settings first");
  }
  if (existing && existing->status == RunStatus::kDone) {
    ctx.warn("overwriting completed run " + hash + " (--force)");
  }
  const nn::Checkpoint original = nn::load_checkpoint(model_file);
  const unlearn::TrainingRecord budget = record_of(original, model_file);
  const data::DatasetSplit split = data::with_deletion(data::import_split(model_dir / "split"),
                                                       config.unlearn.del_ratio, config.data.seed);

  ManifestEntry entry;
  entry.status = RunStatus::kPending;
  entry.path = relative(ctx, dir);
  entry.started = utc_timestamp();
  entry.info = {{"unlearn_method", config.unlearn.method},
                {"del_ratio", config.unlearn.del_ratio},
                {"seed", config.unlearn.seed},
                {"train_hash", thash}};
  ctx.manifest().put_run(hash, entry);

  try {
    write_file_atomic(dir / "config.json", config_record(config).dump(2) + "\n");
    data::export_split(split, dir / "split");
    unlearn::UnlearnRun run;
    try {
      run = unlearn::unlearn(original.model, split, config.unlearn, budget);
    } catch (const unlearn::BudgetError& e) {
      write_file_atomic(dir / "trace.csv", unlearn::trace_to_csv(e.partial_trace()));
      throw;
    }
    nn::Checkpoint result{run.unlearned, ordered_json::object()};
    result.metadata["config_hash"] = hash;
    result.metadata["unlearn_method"] = config.unlearn.method;
    result.metadata["teacher"] = unlearn::describe(run.teacher);
    result.metadata["trainable_params"] = run.trainable_params;
    nn::save_checkpoint(dir / "model.json", result);
    write_file_atomic(dir / "trace.csv", unlearn::trace_to_csv(run.trace));
    const eval::EvalReport report = report_for(config, run.unlearned, split, run.seconds, run.flos);
    write_file_atomic(dir / "report.json", eval::serialize_report(report));

    entry.status = RunStatus::kDone;
    entry.finished = utc_timestamp();
    ctx.manifest().put_run(hash, entry);
    ctx.info(fmt::format("{} del_ratio={} seed={}: acc_test {:.1f}, acc_f {}, acc_r {:.1f} -> {}",
                         config.unlearn.method, config.unlearn.del_ratio, config.unlearn.seed,
                         report.acc_test,
                         report.acc_f ? fmt::format("{:.1f}", *report.acc_f) : "n/a",
                         report.acc_r, dir.string()));
    return UnlearnOutcome{true, hash, dir, report};
  } catch (const std::exception& e) {
    entry.status = RunStatus::kFailed;
    entry.finished = utc_timestamp();
    entry.error = e.what();
    ctx.manifest().put_run(hash, entry);
    throw;
  }
}

eval::EvalReport cmd_evaluate(Context&, const fs::path& run_dir) {
  const RunConfig config = load_run_config(run_dir);
  const nn::Checkpoint checkpoint = nn::load_checkpoint(run_dir / "model.json");
  const data::DatasetSplit split = data::import_split(run_dir / "split");
  const fs::path trace_file = run_dir / "trace.csv";
  if (!fs::exists(trace_file)) throw ResolutionError("no trace at " + trace_file.string());
  const unlearn::Trace trace = unlearn::trace_from_csv(read_file(trace_file));
  if (trace.empty()) throw ConfigError("empty trace in " + trace_file.string());
  return report_for(config, checkpoint.model, split, trace.back().seconds, trace.back().flos);
}

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> out;
  std::stringstream in(text);
  std::string item;
  auto number = [&](const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ConfigError("bad integer list '" + text + "'");
    }
    return v;
  };
  while (std::getline(in, item, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    const long long lo = number(item.substr(0, dash));
    const long long hi = number(item.substr(dash + 1));
    if (hi < lo) throw ConfigError("empty range '" + item + "'");
    for (long long v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::vector<RunConfig> plan_sweep(const SweepGrid& grid, const ConfigMap& base,
                                  std::vector<std::string>* warnings) {
  if (grid.methods.empty() || grid.ratios.empty() || grid.seeds.empty()) {
    throw ConfigError("sweep grid needs at least one method, ratio and seed");
  }
  std::vector<RunConfig> out;
  std::set<std::string> seen;
  for (const std::string& method : grid.methods) {
    for (int ratio : grid.ratios) {
      for (std::uint64_t seed : grid.seeds) {
        ConfigMap settings = base;
        settings["unlearn_method"] = method;
        settings["del_ratio"] = std::to_string(ratio);
        settings["seed"] = std::to_string(seed);
        RunConfig config = resolve(settings);
        if (!seen.insert(config_hash(config)).second) {
          if (warnings) {
            warnings->push_back(fmt::format("duplicate grid entry {} del_ratio={} seed={} skipped",
                                            method, ratio, seed));
          }
          continue;
        }
        out.push_back(std::move(config));
      }
    }
  }
  return out;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(jobs)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

SweepSummary cmd_sweep(Context& ctx, const SweepGrid& grid, const ConfigMap& base, int jobs) {
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  std::vector<std::string> warnings;
  const std::vector<RunConfig> plan = plan_sweep(grid, base, &warnings);
  for (const auto& w : warnings) ctx.warn(w);

  SweepSummary summary;
  summary.planned = plan.size();

  std::map<std::string, const RunConfig*> originals;
  for (const RunConfig& c : plan) originals.emplace(train_hash(c), &c);
  std::vector<const RunConfig*> to_train;
  for (const auto& [hash, c] : originals) to_train.push_back(c);
  std::set<std::string> failed_originals;
  std::mutex failed_mutex;
  parallel_for(to_train.size(), jobs, [&](std::size_t i) {
    try {
      cmd_train(ctx, *to_train[i]);
    } catch (const std::exception& e) {
      ctx.warn("training original " + train_hash(*to_train[i]) + " failed: " + e.what());
      std::lock_guard lock(failed_mutex);
      failed_originals.insert(train_hash(*to_train[i]));
    }
  });

  std::atomic<std::size_t> executed{0}, skipped{0}, failed{0};
  parallel_for(plan.size(), jobs, [&](std::size_t i) {
    const RunConfig& c = plan[i];
    if (failed_originals.count(train_hash(c))) {
      ++failed;
      return;
    }
    try {
      const UnlearnOutcome outcome = cmd_unlearn(ctx, c);
      ++(outcome.executed ? executed : skipped);
    } catch (const std::exception& e) {
      ++failed;
      ctx.warn(fmt::format("run {} ({} del_ratio={} seed={}) failed: {}", config_hash(c),
                           c.unlearn.method, c.unlearn.del_ratio, c.unlearn.seed, e.what()));
    }
  });
  summary.executed = executed;
  summary.skipped = skipped;
  summary.failed = failed;
  ctx.info(fmt::format("sweep: {} planned, {} executed, {} already complete, {} failed",
                       summary.planned, summary.executed, summary.skipped, summary.failed));
  return summary;
}

std::optional<double> composite_score(const eval::EvalReport& report, int num_classes) {
  if (!report.acc_f || !report.mia_success) return std::nullopt;
  const double chance = eval::chance_level(num_classes);
  return (report.acc_test + report.acc_r + (100.0 - std::abs(*report.acc_f - chance)) +
          (100.0 - *report.mia_success)) /
         4.0;
}

namespace {

struct LoadedRun {
  RunConfig config;
  eval::EvalReport report;
  unlearn::Trace trace;
  std::string data_signature;
};

std::string data_signature(const RunConfig& c) {
  return fmt::format("{}/C={}/n={}/noise={}/d={}/{}", data::to_string(c.data.generator),
                     c.data.num_classes, c.data.samples_per_class, format_double(c.data.noise),
                     c.data.dimension, backbone_name(c.train.arch.hidden));
}

LoadedRun load_run(const fs::path& dir) {
  LoadedRun run;
  run.config = load_run_config(dir);
  const fs::path report_file = dir / "report.json";
  if (!fs::exists(report_file)) throw ResolutionError("no report at " + report_file.string());
  run.report = eval::report_from_json(ordered_json::parse(read_file(report_file)));
  if (fs::exists(dir / "trace.csv")) run.trace = unlearn::trace_from_csv(read_file(dir / "trace.csv"));
  run.data_signature = data_signature(run.config);
  return run;
}

class Mean {
 public:
  void add(std::optional<double> v) {
    if (!v) return;
    sum_ += *v;
    ++n_;
  }
  std::optional<double> value() const {
    if (n_ == 0) return std::nullopt;
    return sum_ / static_cast<double>(n_);
  }

 private:
  double sum_ = 0.0;
  std::size_t n_ = 0;
};

struct Aggregate {
  std::size_t runs = 0;
  Mean acc_test, acc_f, acc_r, mia, seconds, flos, composite;

  void add(const LoadedRun& r) {
    ++runs;
    acc_test.add(r.report.acc_test);
    acc_f.add(r.report.acc_f);
    acc_r.add(r.report.acc_r);
    mia.add(r.report.mia_success);
    seconds.add(r.report.seconds);
    flos.add(r.report.flos);
    composite.add(composite_score(r.report, r.config.data.num_classes));
  }
};

std::string md(std::optional<double> v) { return v ? fmt::format("{:.1f}", *v) : "n/a"; }
std::string csv(std::optional<double> v) { return v ? format_double(*v) : ""; }

}  // namespace

ReportSummary cmd_report(Context& ctx, std::vector<fs::path> run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) {
    for (const auto& [hash, entry] : ctx.manifest().runs()) {
      if (entry.status == RunStatus::kDone) run_dirs.push_back(ctx.root() / entry.path);
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  if (run_dirs.empty()) throw ConfigError("no completed runs to report");

  std::vector<LoadedRun> runs;
  for (const fs::path& dir : run_dirs) runs.push_back(load_run(dir));

  ReportSummary summary;
  summary.runs = runs.size();
  std::set<std::string> signatures;
  for (const auto& r : runs) signatures.insert(r.data_signature);
  if (signatures.size() > 1) {
    std::string list;
    for (const auto& s : signatures) list += (list.empty() ? "" : ", ") + s;
    summary.warnings.push_back("runs mix dataset/backbone specs (" + list +
                               "); rows are grouped per spec and never averaged across them");
  }
  for (const auto& w : summary.warnings) ctx.warn(w);

  using Key = std::pair<std::string, std::string>;  // method, data signature
  std::map<Key, Aggregate> groups;
  std::map<std::tuple<std::string, std::string, int>, Aggregate> by_ratio;
  for (const auto& r : runs) {
    groups[{r.config.unlearn.method, r.data_signature}].add(r);
    by_ratio[{r.config.unlearn.method, r.data_signature, r.config.unlearn.del_ratio}].add(r);
  }

  std::vector<std::pair<Key, const Aggregate*>> ranked;
  for (const auto& [k, a] : groups) ranked.emplace_back(k, &a);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    const auto ca = a.second->composite.value(), cb = b.second->composite.value();
    if (ca.has_value() != cb.has_value()) return ca.has_value();
    return ca && *ca > *cb;
  });

  std::string markdown = "# Unlearning leaderboard\n\n";
  markdown +=
      "Composite score (higher is better): mean over runs of (acc_test + acc_r + "
      "(100 - |acc_f - chance|) + (100 - mia_success)) / 4, where chance = 100 / C. "
      "Accuracies and MIA success are percentages averaged over runs; n/a marks undefined "
      "values.\n\n";
  for (const auto& w : summary.warnings) markdown += "**Warning:** " + w + "\n\n";
  markdown +=
      "| Rank | Method | Data | Runs | acc_test (↑) | acc_f | acc_r (↑) | MIA success (↓) | "
      "Time (s) (↓) | Composite (↑) |\n"
      "|---|---|---|---|---|---|---|---|---|---|\n";
  std::string table_csv =
      "rank,method,data,runs,acc_test,acc_f,acc_r,mia_success,seconds,flos,composite\n";
  std::size_t rank = 0;
  for (const auto& [key, a] : ranked) {
    ++rank;
    markdown += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {:.3g} | {} |\n", rank,
                            key.first, key.second, a->runs, md(a->acc_test.value()),
                            md(a->acc_f.value()), md(a->acc_r.value()), md(a->mia.value()),
                            a->seconds.value().value_or(0.0),
                            md(a->composite.value()));
    table_csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", rank, key.first, key.second,
                             a->runs, csv(a->acc_test.value()), csv(a->acc_f.value()),
                             csv(a->acc_r.value()), csv(a->mia.value()),
                             csv(a->seconds.value()), csv(a->flos.value()),
                             csv(a->composite.value()));
  }

  markdown += "\n## Average unlearning time\n\n| Method | Unlearning time (hrs) (↓) |\n|---|---|\n";
  std::map<std::string, Mean> time_by_method;
  for (const auto& r : runs) time_by_method[r.config.unlearn.method].add(r.report.seconds / 3600.0);
  for (const auto& [method, mean] : time_by_method) {
    markdown += fmt::format("| {} | {:.3g} |\n", method, *mean.value());
  }

  std::string curves =
      "method,data,del_ratio,runs,acc_test,acc_f,acc_r,mia_success,seconds,flos\n";
  for (const auto& [key, a] : by_ratio) {
    const auto& [method, sig, ratio] = key;
    curves += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", method, sig, ratio, a.runs,
                          csv(a.acc_test.value()), csv(a.acc_f.value()), csv(a.acc_r.value()),
                          csv(a.mia.value()), csv(a.seconds.value()), csv(a.flos.value()));
  }

  std::string scaling = "method,data,del_ratio,seed,flos,acc_f\n";
  for (const auto& r : runs) {
    for (const auto& p : eval::scaling_curve(r.trace)) {
      scaling += fmt::format("{},{},{},{},{},{}\n", r.config.unlearn.method, r.data_signature,
                             r.config.unlearn.del_ratio, r.config.unlearn.seed,
                             format_double(p.flos), format_double(p.acc_f));
    }
  }

  summary.markdown = out_dir / "leaderboard.md";
  summary.csv = out_dir / "leaderboard.csv";
  summary.curves = out_dir / "curves.csv";
  summary.scaling = out_dir / "scaling.csv";
  write_file_atomic(summary.markdown, markdown);
  write_file_atomic(summary.csv, table_csv);
  write_file_atomic(summary.curves, curves);
  write_file_atomic(summary.scaling, scaling);
  ctx.info(fmt::format("report over {} runs written to {}", runs.size(), out_dir.string()));
  return summary;
}

}  // namespace ukit::cli
