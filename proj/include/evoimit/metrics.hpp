#pragma once

// Held-out measurement: population score reports and per-step cumulative
// reward trajectories. Everything here is read-only over frozen genomes and
// standardizer snapshots; nothing feeds back into selection.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evoimit/contract.hpp"
#include "evoimit/envs.hpp"
#include "evoimit/experts.hpp"
#include "evoimit/net.hpp"
#include "evoimit/standardize.hpp"
#include "evoimit/trace.hpp"

namespace evoimit {

struct ScoreReport {
  std::uint32_t generation = 0;
  double elite_score = 0.0;
  double population_mean_score = 0.0;
  std::vector<double> member_scores;
  std::vector<std::uint64_t> holdout_seeds;
};

// Mean undiscounted return over the held-out instances, decoding exactly as
// in training.
inline double evaluate_score(const Genome& genome, const EnvSpec& spec,
                             const RunningStats& snapshot,
                             std::span<const std::uint64_t> holdout_seeds) {
  contract(!holdout_seeds.empty(), "evaluate_score: empty seed list");
  double sum = 0.0;
  for (std::uint64_t seed : holdout_seeds) {
    sum += rollout_generator(genome, spec, seed, snapshot).total_reward();
  }
  return sum / static_cast<double>(holdout_seeds.size());
}

inline double evaluate_expert_score(const ExpertPolicy& expert, const EnvSpec& spec,
                                    std::span<const std::uint64_t> holdout_seeds) {
  contract(!holdout_seeds.empty(), "evaluate_score: empty seed list");
  double sum = 0.0;
  for (std::uint64_t seed : holdout_seeds) {
    sum += expert_rollout(expert, spec, seed).total_reward();
  }
  return sum / static_cast<double>(holdout_seeds.size());
}

// Holdout scores for every member of the generation's evaluated population;
// the elite is the training-fitness argmax, measurement never selects.
inline ScoreReport make_score_report(std::uint32_t generation,
                                     std::span<const Genome> members,
                                     std::uint32_t elite_index, const EnvSpec& spec,
                                     const RunningStats& snapshot,
                                     std::span<const std::uint64_t> holdout_seeds) {
  contract(elite_index < members.size(), "make_score_report: elite index out of range");
  ScoreReport report;
  report.generation = generation;
  report.holdout_seeds.assign(holdout_seeds.begin(), holdout_seeds.end());
  report.member_scores.reserve(members.size());
  double sum = 0.0;
  for (const Genome& member : members) {
    const double score = evaluate_score(member, spec, snapshot, holdout_seeds);
    report.member_scores.push_back(score);
    sum += score;
  }
  report.population_mean_score = sum / static_cast<double>(members.size());
  report.elite_score = report.member_scores[elite_index];
  return report;
}

struct Trajectory {
  std::string label;                // "expert" or "elite@<generation>"
  std::vector<double> cumulative;   // entry t: return after step t+1
  std::uint64_t env_seed = 0;
};

namespace detail {

inline Trajectory cumulative_of(const EpisodeTrace& trace, std::string label) {
  Trajectory t;
  t.label = std::move(label);
  t.env_seed = trace.env_seed;
  t.cumulative.reserve(trace.rewards.size());
  double running = 0.0;
  for (double r : trace.rewards) {
    running += r;
    t.cumulative.push_back(running);
  }
  return t;
}

}  // namespace detail

inline Trajectory score_trajectory(const Genome& genome, const EnvSpec& spec,
                                   std::uint64_t seed, const RunningStats& snapshot,
                                   std::string label) {
  return detail::cumulative_of(rollout_generator(genome, spec, seed, snapshot),
                               std::move(label));
}

inline Trajectory score_trajectory(const ExpertPolicy& expert, const EnvSpec& spec,
                                   std::uint64_t seed, std::string label) {
  return detail::cumulative_of(expert_rollout(expert, spec, seed), std::move(label));
}

// Root-mean-square gap between two cumulative-reward curves; the shorter
// curve holds its final value until the longer one ends.
inline double trajectory_rmse(const Trajectory& a, const Trajectory& b) {
  const std::size_t n = std::max(a.cumulative.size(), b.cumulative.size());
  if (n == 0) return 0.0;
  auto at = [](const Trajectory& t, std::size_t i) {
    if (t.cumulative.empty()) return 0.0;
    return i < t.cumulative.size() ? t.cumulative[i] : t.cumulative.back();
  };
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = at(a, i) - at(b, i);
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(n));
}

}  // namespace evoimit
