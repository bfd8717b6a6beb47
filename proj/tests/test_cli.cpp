// Exercises the installed binary end to end: exit codes, artifacts, stdout.
// The ctest entry points EVOIMIT_BIN at the built executable.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "evoimit/checkpoint.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch_root() {
  static const fs::path root = [] {
    const fs::path p =
        fs::temp_directory_path() / ("evoimit_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string binary_path() {
  const char* bin = std::getenv("EVOIMIT_BIN");
  EXPECT_NE(bin, nullptr) << "EVOIMIT_BIN must point at the evoimit binary";
  return bin == nullptr ? std::string() : std::string(bin);
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int call_id = 0;
  const fs::path out_file = scratch_root() / ("stdout_" + std::to_string(call_id) + ".txt");
  const fs::path err_file = scratch_root() / ("stderr_" + std::to_string(call_id) + ".txt");
  ++call_id;
  const std::string command = binary_path() + " " + args + " > " + out_file.string() +
                              " 2> " + err_file.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

fs::path write_tiny_config(const std::string& name, const std::string& out_dir) {
  const fs::path path = scratch_root() / name;
  std::ofstream cfg(path);
  cfg << "env = cartpole\n"
      << "population_size = 4\n"
      << "generations = 2\n"
      << "sigma = 0.1\n"
      << "run_seed = 5\n"
      << "holdout_seeds = 2\n"
      << "eval_every = 1\n"
      << "checkpoint_every = 0\n"
      << "out_dir = " << out_dir << "\n";
  return path;
}

// One shared completed run most tests poke at.
const fs::path& completed_run_dir() {
  static const fs::path dir = [] {
    const fs::path out = scratch_root() / "base_run";
    const fs::path cfg = write_tiny_config("base.cfg", out.string());
    const CliResult r = run_cli("run --config " + cfg.string());
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return out;
  }();
  return dir;
}

TEST(Cli, HelpExitsZero) {
  const CliResult r = run_cli("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("run"), std::string::npos);
  EXPECT_NE(r.out.find("resume"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsUsageError) {
  EXPECT_EQ(run_cli("").exit_code, 1);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli("run --frobnicate").exit_code, 1);
}

TEST(Cli, RunWritesArtifacts) {
  const fs::path out = completed_run_dir();
  EXPECT_TRUE(fs::exists(out / "checkpoint_final.bin"));
  EXPECT_TRUE(fs::exists(out / "checkpoint_final.bin.sha256"));
  EXPECT_TRUE(fs::exists(out / "scores.csv"));
  EXPECT_TRUE(fs::exists(out / "trajectories.csv"));
}

TEST(Cli, OverridesApply) {
  const fs::path out = scratch_root() / "override_run";
  const fs::path cfg = write_tiny_config("override.cfg", (scratch_root() / "wrong").string());
  const CliResult r = run_cli("run --config " + cfg.string() + " --override sigma=0.2" +
                              " --override out_dir=" + out.string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const evoimit::Checkpoint ckpt = evoimit::load_checkpoint(out / "checkpoint_final.bin");
  EXPECT_EQ(ckpt.config.sigma, 0.2);
  EXPECT_FALSE(fs::exists(scratch_root() / "wrong"));
}

TEST(Cli, MissingConfigFileIsUsageError) {
  const CliResult r = run_cli("run --config " + (scratch_root() / "nope.cfg").string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("nope.cfg"), std::string::npos);
}

TEST(Cli, BadOverrideIsUsageError) {
  const fs::path cfg = write_tiny_config("badov.cfg", (scratch_root() / "badov").string());
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override sigma=banana").exit_code, 1);
  EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override nonsense").exit_code, 1);
}

TEST(Cli, InvalidConfigValueIsUsageError) {
  const fs::path cfg = write_tiny_config("badcfg.cfg", (scratch_root() / "badcfg").string());
  const CliResult r =
      run_cli("run --config " + cfg.string() + " --override population_size=3");
  EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, UnwritableOutDirIsRuntimeError) {
  const fs::path blocker = scratch_root() / "cli_blocker";
  std::ofstream(blocker) << "x";
  const fs::path cfg = write_tiny_config("blocked.cfg", (blocker / "sub").string());
  const CliResult r = run_cli("run --config " + cfg.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, ResumeMissingCheckpointIsRuntimeError) {
  const CliResult r =
      run_cli("resume --checkpoint " + (scratch_root() / "ghost.bin").string());
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, ResumeCorruptCheckpointIsRuntimeError) {
  const fs::path bad = scratch_root() / "garbage.bin";
  std::ofstream(bad, std::ios::binary) << "this is not a checkpoint";
  EXPECT_EQ(run_cli("resume --checkpoint " + bad.string()).exit_code, 2);
}

TEST(Cli, ResumeCompletedRunSucceeds) {
  const fs::path ckpt = completed_run_dir() / "checkpoint_final.bin";
  const CliResult r = run_cli("resume --checkpoint " + ckpt.string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("already complete"), std::string::npos);
}

TEST(Cli, ExportWritesCsvs) {
  const fs::path ckpt = completed_run_dir() / "checkpoint_final.bin";
  const fs::path out = scratch_root() / "cli_export";
  const CliResult r =
      run_cli("export --checkpoint " + ckpt.string() + " --out " + out.string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "scores.csv"));
  EXPECT_TRUE(fs::exists(out / "trajectories.csv"));
  EXPECT_NE(r.out.find("wrote "), std::string::npos);
}

TEST(Cli, ExportRequiresOutFlag) {
  const fs::path ckpt = completed_run_dir() / "checkpoint_final.bin";
  EXPECT_EQ(run_cli("export --checkpoint " + ckpt.string()).exit_code, 1);
}

TEST(Cli, EvalPrintsSummaryAndIsDeterministic) {
  const fs::path ckpt = completed_run_dir() / "checkpoint_final.bin";
  const CliResult first = run_cli("eval --checkpoint " + ckpt.string() + " --seeds 3");
  ASSERT_EQ(first.exit_code, 0) << first.err;

  std::istringstream lines(first.out);
  std::string line;
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(line, "generation 2");
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(line.rfind("population_mean ", 0), 0u);
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(line.rfind("best_index ", 0), 0u);
  ASSERT_TRUE(std::getline(lines, line));
  EXPECT_EQ(line.rfind("best_score ", 0), 0u);
  EXPECT_FALSE(std::getline(lines, line));

  const CliResult second = run_cli("eval --checkpoint " + ckpt.string() + " --seeds 3");
  EXPECT_EQ(second.exit_code, 0);
  EXPECT_EQ(second.out, first.out);
}

TEST(Cli, EvalZeroSeedsIsRuntimeError) {
  const fs::path ckpt = completed_run_dir() / "checkpoint_final.bin";
  EXPECT_EQ(run_cli("eval --checkpoint " + ckpt.string() + " --seeds 0").exit_code, 2);
}

}  // namespace
