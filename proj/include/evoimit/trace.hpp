#pragma once

// Episode traces: the time-ordered record of one rollout. Observations are
// stored raw (un-standardized); standardization happens at the consumer with
// an explicit stats snapshot, so a trace replays identically no matter when
// it is scored.

#include <cstdint>
#include <vector>

#include "evoimit/contract.hpp"
#include "evoimit/envs.hpp"
#include "evoimit/net.hpp"
#include "evoimit/standardize.hpp"

namespace evoimit {

struct EpisodeTrace {
  std::vector<std::vector<double>> observations;  // length = steps + 1
  std::vector<Action> actions;                    // length = steps
  std::vector<double> rewards;                    // length = steps
  bool terminated = false;
  bool truncated = false;
  std::uint64_t env_seed = 0;

  std::size_t steps() const { return actions.size(); }
  double total_reward() const {
    double sum = 0.0;
    for (double r : rewards) sum += r;
    return sum;
  }
};

// One generator episode. The network consumes standardized observations
// (against the frozen snapshot) with its hidden state reset at episode
// start; the trace records the raw ones.
inline EpisodeTrace rollout_generator(const Genome& genome, const EnvSpec& spec,
                                      std::uint64_t seed, const RunningStats& snapshot) {
  contract(genome.topology.input_dim == spec.obs_dim, "rollout: genome input dim mismatch");
  contract(genome.topology.output_dim == spec.action.arity(),
           "rollout: genome output dim mismatch");

  EpisodeTrace trace;
  trace.env_seed = seed;
  auto [state, obs] = env_reset(spec, seed);
  HiddenState hidden = make_reset_state(genome.topology);
  NetWorkspace ws;
  std::vector<double> std_obs(spec.obs_dim);
  std::vector<double> raw_out(genome.topology.output_dim);
  Action action;

  while (true) {
    trace.observations.push_back(obs);
    std_apply(snapshot, obs, std_obs);
    forward_into(genome, std_obs, hidden, raw_out, ws);
    action_decode(spec, raw_out, action);
    StepOutcome outcome = env_step(state, spec, action);
    trace.actions.push_back(action);
    trace.rewards.push_back(outcome.reward);
    obs = std::move(outcome.observation);
    if (outcome.terminated || outcome.truncated) {
      trace.terminated = outcome.terminated;
      trace.truncated = outcome.truncated;
      break;
    }
  }
  trace.observations.push_back(obs);
  return trace;
}

// Re-executes a stored trace against the environment: bit-identical
// observations and rewards are a structural invariant of the engine.
inline bool trace_replays_exactly(const EpisodeTrace& trace, const EnvSpec& spec) {
  auto [state, obs] = env_reset(spec, trace.env_seed);
  if (trace.observations.empty() || trace.observations.front() != obs) return false;
  for (std::size_t t = 0; t < trace.actions.size(); ++t) {
    StepOutcome outcome = env_step(state, spec, trace.actions[t]);
    if (outcome.reward != trace.rewards[t]) return false;
    if (outcome.observation != trace.observations[t + 1]) return false;
    const bool last = t + 1 == trace.actions.size();
    if ((outcome.terminated || outcome.truncated) != last) return false;
  }
  return true;
}

}  // namespace evoimit
