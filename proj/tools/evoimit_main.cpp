// evoimit command line: run, resume, export, eval.
// Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evoimit/runkit.hpp"

namespace {

int do_run(const std::string& config_path, const std::vector<std::string>& overrides,
           std::uint32_t workers) {
  evoimit::RunConfig config = evoimit::load_config_file(config_path);
  for (const std::string& keyval : overrides) {
    evoimit::apply_override(config, keyval);
  }
  evoimit::validate_config(config);
  evoimit::run(config, workers, &std::cout);
  return 0;
}

int do_resume(const std::string& checkpoint_path, std::uint32_t workers) {
  evoimit::resume(checkpoint_path, workers, &std::cout);
  return 0;
}

int do_export(const std::string& checkpoint_path, const std::string& out_dir) {
  evoimit::RunPaths paths = evoimit::export_figures_data(checkpoint_path, out_dir);
  std::cout << "wrote " << paths.scores_csv.string() << '\n';
  std::cout << "wrote " << paths.trajectories_csv.string() << '\n';
  return 0;
}

int do_eval(const std::string& checkpoint_path, std::uint32_t seeds) {
  evoimit::EvalSummary summary = evoimit::eval_checkpoint(checkpoint_path, seeds);
  char buf[64];
  std::cout << "generation " << summary.generation << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", summary.population_mean);
  std::cout << "population_mean " << buf << '\n';
  std::cout << "best_index " << summary.best_index << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", summary.best_score);
  std::cout << "best_score " << buf << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evoimit: adversarial neuroevolution on classic-control tasks"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_dir;
  std::vector<std::string> overrides;
  std::uint32_t workers = 0;
  std::uint32_t seeds = 10;

  CLI::App* cmd_run = app.add_subcommand("run", "start a run from a config file");
  cmd_run->add_option("--config", config_path, "config file path")->required();
  cmd_run->add_option("--override", overrides, "config override key=value");
  cmd_run->add_option("--workers", workers, "evaluation threads (0: all cores)");

  CLI::App* cmd_resume = app.add_subcommand("resume", "continue a run from a checkpoint");
  cmd_resume->add_option("--checkpoint", checkpoint_path, "checkpoint file path")->required();
  cmd_resume->add_option("--workers", workers, "evaluation threads (0: all cores)");

  CLI::App* cmd_export = app.add_subcommand("export", "write figure CSVs from a checkpoint");
  cmd_export->add_option("--checkpoint", checkpoint_path, "checkpoint file path")->required();
  cmd_export->add_option("--out", out_dir, "output directory")->required();

  CLI::App* cmd_eval = app.add_subcommand("eval", "score a checkpoint's population on fresh seeds");
  cmd_eval->add_option("--checkpoint", checkpoint_path, "checkpoint file path")->required();
  cmd_eval->add_option("--seeds", seeds, "number of fresh evaluation seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_run->parsed()) return do_run(config_path, overrides, workers);
    if (cmd_resume->parsed()) return do_resume(checkpoint_path, workers);
    if (cmd_export->parsed()) return do_export(checkpoint_path, out_dir);
    if (cmd_eval->parsed()) return do_eval(checkpoint_path, seeds);
  } catch (const evoimit::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
