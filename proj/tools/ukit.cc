// Command-line driver: train, unlearn, evaluate, sweep, report.
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ukit/cli/commands.h"
#include "ukit/cli/config.h"
#include "ukit/errors.h"
#include "ukit/io.h"
#include "ukit/unlearn/methods.h"

namespace {

namespace fs = std::filesystem;
using namespace ukit;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

cli::ConfigMap load_settings(const std::string& config_file, const std::vector<std::string>& extras) {
  cli::ConfigMap base;
  if (!config_file.empty()) base = cli::parse_config_text(read_file(config_file));
  return cli::merge(std::move(base), cli::parse_overrides(extras));
}

std::string keys_help() {
  std::string out = "\nConfig keys (file `key = value` or flag `--key=value`; flags win):\n";
  for (const auto& k : cli::config_keys()) {
    out += "  " + k.name + " (default " + k.default_value + "): " + k.help + "\n";
  }
  out += "Methods:";
  for (const auto& m : unlearn::method_names()) out += " " + m;
  out += "\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale machine unlearning toolkit"};
  app.require_subcommand(1);
  app.footer(keys_help());

  std::string root_flag;
  app.add_option("--root", root_flag, "artifact root (default $UKIT_ARTIFACT_ROOT or ./ukit-artifacts)");

  std::string config_file;
  bool force = false;

  auto* train = app.add_subcommand("train", "train the original model on all of D_train");
  train->allow_extras();
  train->add_option("-c,--config", config_file, "key=value config file");
  train->add_flag("--force", force, "retrain even if the checkpoint exists");

  auto* unlearn_cmd = app.add_subcommand("unlearn", "unlearn D_f from a trained original and evaluate");
  unlearn_cmd->allow_extras();
  unlearn_cmd->add_option("-c,--config", config_file, "key=value config file");
  unlearn_cmd->add_flag("--force", force, "redo a completed run");

  auto* evaluate = app.add_subcommand("evaluate", "recompute the report of a run");
  evaluate->allow_extras();
  std::string run_dir;
  evaluate->add_option("--run", run_dir, "run directory (default: the run for the given config)");
  evaluate->add_option("-c,--config", config_file, "key=value config file");

  auto* sweep = app.add_subcommand("sweep", "run a methods x ratios x seeds grid");
  sweep->allow_extras();
  sweep->add_option("-c,--config", config_file, "base key=value config file");
  std::string methods = "neg_grad,rand_label,bad_t,scrub,salun";
  std::string ratios = "1-10";
  std::string seeds = "0-4";
  int jobs = 1;
  sweep->add_option("--methods", methods, "comma-separated methods")->capture_default_str();
  sweep->add_option("--ratios", ratios, "deletion ratios, e.g. 1-10 or 1,5")->capture_default_str();
  sweep->add_option("--seeds", seeds, "seeds, e.g. 0-4")->capture_default_str();
  sweep->add_option("-j,--jobs", jobs, "worker threads")->capture_default_str();

  auto* report = app.add_subcommand("report", "aggregate runs into a leaderboard");
  std::vector<std::string> report_runs;
  std::string out_dir;
  report->add_option("runs", report_runs, "run directories (default: every completed run)");
  report->add_option("-o,--out", out_dir, "output directory (default <root>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cli::Context ctx(cli::artifact_root(root_flag.empty() ? std::nullopt
                                                          : std::optional<std::string>(root_flag)),
                     std::clog, std::cerr);
    if (*train) {
      const auto config = cli::resolve(load_settings(config_file, train->remaining()));
      cli::cmd_train(ctx, config, force);
    } else if (*unlearn_cmd) {
      const auto config = cli::resolve(load_settings(config_file, unlearn_cmd->remaining()));
      const auto outcome = cli::cmd_unlearn(ctx, config, force);
      std::cout << eval::serialize_report(outcome.report);
    } else if (*evaluate) {
      fs::path dir = run_dir;
      if (dir.empty()) {
        const auto config = cli::resolve(load_settings(config_file, evaluate->remaining()));
        dir = ctx.run_dir(cli::config_hash(config));
      }
      std::cout << eval::serialize_report(cli::cmd_evaluate(ctx, dir));
    } else if (*sweep) {
      cli::SweepGrid grid;
      std::stringstream in(methods);
      for (std::string m; std::getline(in, m, ',');) {
        if (!m.empty()) grid.methods.push_back(m);
      }
      for (long long r : cli::parse_int_list(ratios)) grid.ratios.push_back(static_cast<int>(r));
      for (long long s : cli::parse_int_list(seeds)) {
        if (s < 0) throw ConfigError("seeds must be non-negative");
        grid.seeds.push_back(static_cast<std::uint64_t>(s));
      }
      const auto summary =
          cli::cmd_sweep(ctx, grid, load_settings(config_file, sweep->remaining()), jobs);
      if (summary.failed > 0) return kExitRuntime;
    } else if (*report) {
      std::vector<fs::path> dirs(report_runs.begin(), report_runs.end());
      const fs::path out = out_dir.empty() ? ctx.root() / "report" : fs::path(out_dir);
      cli::cmd_report(ctx, dirs, out);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ResolutionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
