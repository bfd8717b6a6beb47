#pragma once

// Run harness: drives the generation loop, emits score reports, captures
// trajectory elites, writes checkpoints and the two CSV outputs. A run is a
// pure function of (config, run_seed); workers and output location never
// change the numbers.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "evoimit/checkpoint.hpp"
#include "evoimit/coevo.hpp"
#include "evoimit/config.hpp"
#include "evoimit/metrics.hpp"

namespace evoimit {

class RunError : public std::runtime_error {
 public:
  explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

// EVOIMIT_OUT_ROOT, when set, anchors relative output directories.
inline std::filesystem::path resolve_out_dir(const RunConfig& config) {
  std::filesystem::path out(config.out_dir);
  if (const char* root = std::getenv("EVOIMIT_OUT_ROOT"); root != nullptr && *root != '\0') {
    if (out.is_relative()) out = std::filesystem::path(root) / out;
  }
  return out;
}

// Trajectory capture points: first generation, quarter marks, final.
inline std::vector<std::uint32_t> capture_generations(std::uint32_t total) {
  std::vector<std::uint32_t> gens{1};
  for (std::uint32_t k = 1; k <= 3; ++k) {
    gens.push_back(std::max(1u, (total * k + 2) / 4));
  }
  gens.push_back(total);
  for (std::uint32_t& g : gens) g = std::min(g, total);
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  return gens;
}

struct RunPaths {
  std::filesystem::path out_dir;
  std::filesystem::path final_checkpoint;
  std::filesystem::path scores_csv;
  std::filesystem::path trajectories_csv;
};

namespace detail {

inline std::string csv_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool is_report_generation(const RunConfig& c, std::uint32_t gen) {
  return gen % c.eval_every == 0 || gen == c.generations;
}

inline bool seed_consumed(const EvoState& s, std::uint64_t seed) {
  return std::find(s.holdout_seeds.begin(), s.holdout_seeds.end(), seed) !=
             s.holdout_seeds.end() ||
         std::find(s.match_seeds.begin(), s.match_seeds.end(), seed) != s.match_seeds.end();
}

// A seed the run has never touched: not a holdout instance, not a training
// instance.
inline std::uint64_t fresh_export_seed(const EvoState& s) {
  for (std::uint64_t retry = 0;; ++retry) {
    const std::uint64_t seed = derive_seed(s.params.run_seed, SeedDomain::Export, {retry});
    if (!seed_consumed(s, seed)) return seed;
  }
}

inline std::string scores_csv_text(const std::vector<ScoreReport>& history) {
  std::string text = "generation,elite_score,population_mean\n";
  for (const ScoreReport& report : history) {
    text += std::to_string(report.generation);
    text += ',';
    text += csv_real(report.elite_score);
    text += ',';
    text += csv_real(report.population_mean_score);
    text += '\n';
  }
  return text;
}

inline void append_trajectory(std::string& text, const Trajectory& t) {
  for (std::size_t i = 0; i < t.cumulative.size(); ++i) {
    text += t.label;
    text += ',';
    text += std::to_string(i + 1);
    text += ',';
    text += csv_real(t.cumulative[i]);
    text += '\n';
  }
}

inline std::string trajectories_csv_text(const Checkpoint& ckpt) {
  const EnvSpec spec = make_env_spec(ckpt.config.env);
  const std::uint64_t seed = fresh_export_seed(ckpt.state);
  std::string text = "agent_label,timestep,cumulative_reward\n";
  append_trajectory(text, score_trajectory(make_expert(ckpt.config.env), spec, seed, "expert"));
  for (const CapturedElite& cap : ckpt.captures) {
    append_trajectory(text, score_trajectory(cap.genome, spec, seed, cap.stats,
                                             "elite@" + std::to_string(cap.generation)));
  }
  return text;
}

inline void probe_writable(const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw RunError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  const std::filesystem::path probe = out_dir / ".write_probe";
  {
    std::ofstream f(probe, std::ios::binary | std::ios::trunc);
    if (!f) throw RunError("output directory not writable: " + out_dir.string());
    f << "probe";
    if (!f.flush()) throw RunError("output directory not writable: " + out_dir.string());
  }
  std::filesystem::remove(probe, ec);
}

inline std::filesystem::path checkpoint_name(std::uint32_t generation) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "checkpoint_%06u.bin", generation);
  return buf;
}

inline std::uint32_t effective_workers(std::uint32_t workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Continues ckpt to its configured generation count, writing artifacts into
// out_dir. Shared by run and resume, which is what makes the two paths
// byte-equivalent.
inline RunPaths drive(Checkpoint& ckpt, const std::filesystem::path& out_dir,
                      std::uint32_t workers, std::ostream* log) {
  const RunConfig& config = ckpt.config;
  const EnvSpec spec = make_env_spec(config.env);
  const std::vector<std::uint32_t> captures = capture_generations(config.generations);
  EvolveOptions opts;
  opts.workers = effective_workers(workers);

  while (ckpt.state.generation < config.generations) {
    const std::uint32_t gen = ckpt.state.generation + 1;
    opts.capture_population = is_report_generation(config, gen);
    GenerationOutcome outcome = evolve_generation(ckpt.state, opts);

    if (opts.capture_population) {
      ckpt.history.push_back(make_score_report(gen, outcome.generators_snapshot,
                                               outcome.elite_generator, spec, ckpt.state.stats,
                                               ckpt.state.holdout_seeds));
      if (log != nullptr) {
        const ScoreReport& r = ckpt.history.back();
        *log << "generation " << gen << ": elite " << r.elite_score << ", population mean "
             << r.population_mean_score << '\n';
      }
    }
    if (std::find(captures.begin(), captures.end(), gen) != captures.end()) {
      ckpt.captures.push_back(
          CapturedElite{gen, outcome.elite_generator_genome, ckpt.state.stats});
    }
    if (config.checkpoint_every > 0 && gen % config.checkpoint_every == 0 &&
        gen != config.generations) {
      write_checkpoint(ckpt, out_dir / checkpoint_name(gen));
    }
  }

  RunPaths paths;
  paths.out_dir = out_dir;
  paths.final_checkpoint = out_dir / "checkpoint_final.bin";
  paths.scores_csv = out_dir / "scores.csv";
  paths.trajectories_csv = out_dir / "trajectories.csv";
  write_checkpoint(ckpt, paths.final_checkpoint);
  write_file_atomic(paths.scores_csv, scores_csv_text(ckpt.history));
  write_file_atomic(paths.trajectories_csv, trajectories_csv_text(ckpt));
  if (log != nullptr) {
    *log << "run complete: " << paths.final_checkpoint.string() << '\n';
  }
  return paths;
}

}  // namespace detail

inline RunPaths run(const RunConfig& config, std::uint32_t workers = 0,
                    std::ostream* log = nullptr) {
  validate_config(config);
  const std::filesystem::path out_dir = resolve_out_dir(config);
  detail::probe_writable(out_dir);

  std::vector<std::uint64_t> holdout;
  holdout.reserve(config.holdout_seeds);
  for (std::uint64_t k = 0; k < config.holdout_seeds; ++k) {
    const std::uint64_t seed = derive_seed(config.run_seed, SeedDomain::Holdout, {k});
    contract(std::find(holdout.begin(), holdout.end(), seed) == holdout.end(),
             "run: holdout seed collision");
    holdout.push_back(seed);
  }

  EvoParams params;
  params.env = config.env;
  params.population_size = config.population_size;
  params.sigma = config.sigma;
  params.run_seed = config.run_seed;
  params.matches_per_agent = config.matches_per_agent;
  params.elite_unmutated = config.elite_unmutated;

  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.state = make_evo_state(params, std::move(holdout));
  return detail::drive(ckpt, out_dir, workers, log);
}

struct ResumeOutcome {
  bool already_complete = false;
  RunPaths paths;
};

// Continues next to the checkpoint file; a finished run is a no-op.
inline ResumeOutcome resume(const std::filesystem::path& checkpoint_path,
                            std::uint32_t workers = 0, std::ostream* log = nullptr) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const std::filesystem::path out_dir = checkpoint_path.has_parent_path()
                                            ? checkpoint_path.parent_path()
                                            : std::filesystem::path(".");
  ResumeOutcome outcome;
  outcome.paths.out_dir = out_dir;
  outcome.paths.final_checkpoint = out_dir / "checkpoint_final.bin";
  outcome.paths.scores_csv = out_dir / "scores.csv";
  outcome.paths.trajectories_csv = out_dir / "trajectories.csv";
  if (ckpt.state.generation >= ckpt.config.generations) {
    outcome.already_complete = true;
    if (log != nullptr) {
      *log << "run already complete at generation " << ckpt.state.generation << ", nothing to do\n";
    }
    return outcome;
  }
  detail::probe_writable(out_dir);
  outcome.paths = detail::drive(ckpt, out_dir, workers, log);
  return outcome;
}

// Rewrites scores.csv and trajectories.csv from a checkpoint alone.
inline RunPaths export_figures_data(const std::filesystem::path& checkpoint_path,
                                    const std::filesystem::path& out_dir) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (ckpt.history.empty()) {
    throw RunError("checkpoint has no metric history to export: " + checkpoint_path.string());
  }
  if (ckpt.captures.empty()) {
    throw RunError("checkpoint has no captured elites to export: " + checkpoint_path.string());
  }
  detail::probe_writable(out_dir);
  RunPaths paths;
  paths.out_dir = out_dir;
  paths.final_checkpoint = checkpoint_path;
  paths.scores_csv = out_dir / "scores.csv";
  paths.trajectories_csv = out_dir / "trajectories.csv";
  detail::write_file_atomic(paths.scores_csv, detail::scores_csv_text(ckpt.history));
  detail::write_file_atomic(paths.trajectories_csv, detail::trajectories_csv_text(ckpt));
  return paths;
}

struct EvalSummary {
  std::uint32_t generation = 0;
  double population_mean = 0.0;
  std::uint32_t best_index = 0;
  double best_score = 0.0;
  std::vector<double> member_scores;
  std::vector<std::uint64_t> seeds;
};

// Scores the checkpoint's current generator population on fresh seeds that
// the run has never consumed.
inline EvalSummary eval_checkpoint(const std::filesystem::path& checkpoint_path,
                                   std::uint32_t seed_count) {
  if (seed_count == 0) throw RunError("eval: seed count must be positive");
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const EnvSpec spec = make_env_spec(ckpt.config.env);

  EvalSummary summary;
  summary.generation = ckpt.state.generation;
  summary.seeds.reserve(seed_count);
  for (std::uint64_t k = 0; k < seed_count; ++k) {
    for (std::uint64_t retry = 0;; ++retry) {
      const std::uint64_t seed =
          derive_seed(ckpt.state.params.run_seed, SeedDomain::CliEval, {k, retry});
      if (!detail::seed_consumed(ckpt.state, seed) &&
          std::find(summary.seeds.begin(), summary.seeds.end(), seed) == summary.seeds.end()) {
        summary.seeds.push_back(seed);
        break;
      }
    }
  }

  double sum = 0.0;
  for (const Genome& member : ckpt.state.generators.members) {
    const double score = evaluate_score(member, spec, ckpt.state.stats, summary.seeds);
    summary.member_scores.push_back(score);
    sum += score;
  }
  summary.population_mean = sum / static_cast<double>(summary.member_scores.size());
  summary.best_index = 0;
  for (std::uint32_t i = 1; i < summary.member_scores.size(); ++i) {
    if (summary.member_scores[i] > summary.member_scores[summary.best_index]) {
      summary.best_index = i;
    }
  }
  summary.best_score = summary.member_scores[summary.best_index];
  return summary;
}

}  // namespace evoimit
