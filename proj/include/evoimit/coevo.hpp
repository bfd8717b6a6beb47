#pragma once

// Two-population adversarial loop: generators roll episodes that
// discriminators score against a scripted expert's episode in the same
// environment instance. Each generation runs variation, evaluation, and
// 50% truncation selection. Results are bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "evoimit/contract.hpp"
#include "evoimit/envs.hpp"
#include "evoimit/experts.hpp"
#include "evoimit/net.hpp"
#include "evoimit/rng.hpp"
#include "evoimit/standardize.hpp"
#include "evoimit/trace.hpp"

namespace evoimit {

enum class PopTag : std::uint32_t { Generator = 0, Discriminator = 1 };

struct Population {
  PopTag tag = PopTag::Generator;
  std::vector<Genome> members;

  std::uint32_t size() const { return static_cast<std::uint32_t>(members.size()); }
};

struct MatchResult {
  std::uint32_t generator_index = 0;
  std::uint32_t discriminator_index = 0;
  double d_of_xg = 0.0;
  double d_of_xt = 0.0;
  double fit_g = 0.0;  // = d_of_xg
  double fit_d = 0.0;  // = d_of_xt - d_of_xg
  EpisodeTrace generator_trace;
  EpisodeTrace expert_trace;
};

struct MatchEval {
  MatchResult result;
  RunningStats delta;  // observations of both traces, for the generation merge
};

// Uniformly random bijection generator index -> discriminator index.
inline std::vector<std::uint32_t> pair_populations(std::uint32_t size, std::uint64_t seed) {
  contract(size >= 2, "pair_populations: need at least two members");
  std::vector<std::uint32_t> perm(size);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(seed);
  for (std::uint32_t i = size - 1; i > 0; --i) {
    const std::uint64_t j = rng.next_below(static_cast<std::uint64_t>(i) + 1);
    std::swap(perm[i], perm[static_cast<std::uint32_t>(j)]);
  }
  return perm;
}

// Mean over the observation sequence of the per-step output clipped to
// [0, 1]. The hidden state starts from reset for every sequence judged.
inline double discriminate(const Genome& discriminator,
                           std::span<const std::vector<double>> observations,
                           const RunningStats& snapshot) {
  contract(discriminator.topology.output_dim == 1,
           "discriminate: discriminator must have one output");
  contract(!observations.empty(), "discriminate: empty trace");
  contract(discriminator.topology.input_dim == snapshot.dim(),
           "discriminate: input dim mismatch");

  HiddenState hidden = make_reset_state(discriminator.topology);
  NetWorkspace ws;
  std::vector<double> std_obs(snapshot.dim());
  std::vector<double> out(1);
  double sum = 0.0;
  for (const std::vector<double>& obs : observations) {
    std_apply(snapshot, obs, std_obs);
    forward_into(discriminator, std_obs, hidden, out, ws);
    sum += detail::clip(out[0], 0.0, 1.0);
  }
  return sum / static_cast<double>(observations.size());
}

// One generator-discriminator match against a precomputed expert episode.
// Both environment instances share match_seed; the delta accumulates every
// raw observation of both traces.
inline MatchEval run_match(const Genome& generator, const Genome& discriminator,
                           const EnvSpec& spec, std::uint64_t match_seed,
                           const RunningStats& snapshot, const EpisodeTrace& expert_trace) {
  MatchEval eval;
  eval.result.generator_trace = rollout_generator(generator, spec, match_seed, snapshot);
  eval.result.expert_trace = expert_trace;

  eval.result.d_of_xg = discriminate(discriminator, eval.result.generator_trace.observations, snapshot);
  eval.result.d_of_xt = discriminate(discriminator, expert_trace.observations, snapshot);
  eval.result.fit_g = eval.result.d_of_xg;
  eval.result.fit_d = eval.result.d_of_xt - eval.result.d_of_xg;

  eval.delta = RunningStats(spec.obs_dim);
  for (const std::vector<double>& obs : eval.result.generator_trace.observations) {
    std_update(eval.delta, obs);
  }
  for (const std::vector<double>& obs : expert_trace.observations) {
    std_update(eval.delta, obs);
  }
  return eval;
}

inline MatchEval run_match(const Genome& generator, const Genome& discriminator,
                           const ExpertPolicy& expert, const EnvSpec& spec,
                           std::uint64_t match_seed, const RunningStats& snapshot) {
  contract(expert.id == spec.id, "run_match: expert env mismatch");
  return run_match(generator, discriminator, spec, match_seed, snapshot,
                   expert_rollout(expert, spec, match_seed));
}

// Replacement map of 50% truncation selection: ranks descending by fitness
// (ties to the lower index); the rank-k survivor's copy lands in the slot of
// the rank-(n/2+k) member. Survivors keep their slots, map[i] == i.
inline std::vector<std::uint32_t> select_truncate(std::span<const double> fitnesses) {
  const std::size_t n = fitnesses.size();
  contract(n >= 2 && n % 2 == 0, "select_truncate: population size must be even");
  for (double f : fitnesses) {
    contract(std::isfinite(f), "select_truncate: non-finite fitness");
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (fitnesses[a] != fitnesses[b]) return fitnesses[a] > fitnesses[b];
    return a < b;
  });

  std::vector<std::uint32_t> map(n);
  std::iota(map.begin(), map.end(), 0u);
  for (std::size_t k = 0; k < n / 2; ++k) {
    map[order[n / 2 + k]] = order[k];
  }
  return map;
}

struct EvoParams {
  EnvId env = EnvId::CartPole;
  std::uint32_t population_size = 64;
  double sigma = 0.1;
  std::uint64_t run_seed = 0;
  std::uint32_t matches_per_agent = 1;
  bool elite_unmutated = false;
};

// Complete run state; everything downstream of the generation counter is a
// pure function of (params, holdout_seeds, generation).
struct EvoState {
  EvoParams params;
  Population generators;
  Population discriminators;
  RunningStats stats;                       // post-merge of the last generation
  std::uint32_t generation = 0;             // completed generations
  std::uint64_t next_lineage = 0;
  std::uint32_t prev_elite_generator = 0;   // valid once generation > 0
  std::uint32_t prev_elite_discriminator = 0;
  std::vector<std::uint64_t> holdout_seeds;  // frozen at run start, never trained on
  std::vector<std::uint64_t> match_seeds;    // one consumed per completed generation
};

inline EvoState make_evo_state(const EvoParams& params,
                               std::vector<std::uint64_t> holdout_seeds) {
  contract(params.population_size >= 2 && params.population_size % 2 == 0,
           "make_evo_state: population size must be even and at least 2");
  contract(params.sigma >= 0.0, "make_evo_state: sigma must be nonnegative");
  contract(params.matches_per_agent >= 1, "make_evo_state: need at least one match per agent");

  const EnvSpec spec = make_env_spec(params.env);
  EvoState state;
  state.params = params;
  state.holdout_seeds = std::move(holdout_seeds);
  state.generators.tag = PopTag::Generator;
  state.discriminators.tag = PopTag::Discriminator;

  const NetTopology gen_topo = standard_topology(spec.obs_dim, spec.action.arity());
  const NetTopology disc_topo = standard_topology(spec.obs_dim, 1);
  state.generators.members.reserve(params.population_size);
  state.discriminators.members.reserve(params.population_size);
  for (std::uint32_t i = 0; i < params.population_size; ++i) {
    state.generators.members.push_back(zero_genome(gen_topo, state.next_lineage++));
  }
  for (std::uint32_t i = 0; i < params.population_size; ++i) {
    state.discriminators.members.push_back(zero_genome(disc_topo, state.next_lineage++));
  }
  state.stats = RunningStats(spec.obs_dim);
  return state;
}

struct EvolveOptions {
  std::uint32_t workers = 1;        // <= 1 runs inline
  bool keep_traces = false;         // retain episode traces in the outcome
  bool capture_population = false;  // copy the evaluated generators into the outcome
};

struct GenerationOutcome {
  std::uint32_t generation = 0;  // index of the generation that just ran
  std::uint64_t match_seed = 0;
  std::vector<MatchResult> matches;
  std::vector<double> generator_fitness;
  std::vector<double> discriminator_fitness;
  std::uint32_t elite_generator = 0;
  std::uint32_t elite_discriminator = 0;
  Genome elite_generator_genome;            // evaluated (post-variation) elite
  std::vector<Genome> generators_snapshot;  // filled when capture_population set
};

namespace detail {

inline std::uint32_t argmax_fitness(std::span<const double> fitness) {
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < fitness.size(); ++i) {
    if (fitness[i] > fitness[best]) best = i;
  }
  return best;
}

// Bottom-half slots are overwritten in ascending slot order, each copy
// taking a fresh lineage id, so lineage assignment is order-independent.
inline void apply_selection(Population& population, std::span<const std::uint32_t> map,
                            std::uint64_t& next_lineage) {
  for (std::uint32_t i = 0; i < population.size(); ++i) {
    if (map[i] == i) continue;
    Genome copy = population.members[map[i]];
    copy.lineage_id = next_lineage++;
    population.members[i] = std::move(copy);
  }
}

}  // namespace detail

// One full generation: variation, evaluation, selection. Match evaluation
// may fan out over opts.workers threads; every result lands in a
// preassigned slot and stats deltas merge in ascending match index, so the
// outcome is independent of scheduling.
inline GenerationOutcome evolve_generation(EvoState& state, const EvolveOptions& opts) {
  const EvoParams& p = state.params;
  const std::uint32_t n = p.population_size;
  const std::uint32_t g = state.generation;
  const EnvSpec spec = make_env_spec(p.env);

  contract(state.generators.size() == n && state.discriminators.size() == n,
           "evolve_generation: population size drifted");

  // VARIATION: every member perturbed, except a prior elite when configured.
  for (Population* pop : {&state.generators, &state.discriminators}) {
    const std::uint32_t elite =
        pop->tag == PopTag::Generator ? state.prev_elite_generator : state.prev_elite_discriminator;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (p.elite_unmutated && g > 0 && i == elite) continue;
      const std::uint64_t seed = derive_seed(
          p.run_seed, SeedDomain::Variation, {g, static_cast<std::uint64_t>(pop->tag), i});
      pop->members[i] = mutate(pop->members[i], seed, p.sigma);
    }
  }

  // EVALUATION: one environment seed per generation, drawn to miss the
  // holdout set; one pairing per round.
  std::uint64_t match_seed = 0;
  for (std::uint64_t retry = 0;; ++retry) {
    match_seed = derive_seed(p.run_seed, SeedDomain::MatchEnv, {g, retry});
    if (std::find(state.holdout_seeds.begin(), state.holdout_seeds.end(), match_seed) ==
        state.holdout_seeds.end()) {
      break;
    }
  }
  state.match_seeds.push_back(match_seed);

  const std::uint32_t rounds = p.matches_per_agent;
  std::vector<std::vector<std::uint32_t>> pairings(rounds);
  for (std::uint32_t r = 0; r < rounds; ++r) {
    pairings[r] = pair_populations(n, derive_seed(p.run_seed, SeedDomain::Pairing, {g, r}));
  }

  const ExpertPolicy expert = make_expert(p.env);
  const EpisodeTrace expert_trace = expert_rollout(expert, spec, match_seed);
  const RunningStats snapshot = state.stats;  // frozen for the whole generation

  const std::uint32_t total = rounds * n;
  std::vector<MatchEval> evals(total);
  auto run_one = [&](std::uint32_t m) {
    const std::uint32_t r = m / n;
    const std::uint32_t gi = m % n;
    const std::uint32_t di = pairings[r][gi];
    evals[m] = run_match(state.generators.members[gi], state.discriminators.members[di],
                         spec, match_seed, snapshot, expert_trace);
    evals[m].result.generator_index = gi;
    evals[m].result.discriminator_index = di;
  };

  const std::uint32_t workers = std::min(std::max(opts.workers, 1u), total);
  if (workers <= 1) {
    for (std::uint32_t m = 0; m < total; ++m) run_one(m);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::uint32_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::uint32_t m = next.fetch_add(1); m < total; m = next.fetch_add(1)) {
          run_one(m);
        }
      });
    }
    for (std::thread& t : threads) t.join();
  }

  for (const MatchEval& eval : evals) {
    state.stats = std_merge(state.stats, eval.delta);
  }

  GenerationOutcome outcome;
  outcome.generation = g;
  outcome.match_seed = match_seed;
  outcome.generator_fitness.assign(n, 0.0);
  outcome.discriminator_fitness.assign(n, 0.0);
  for (const MatchEval& eval : evals) {
    outcome.generator_fitness[eval.result.generator_index] += eval.result.fit_g;
    outcome.discriminator_fitness[eval.result.discriminator_index] += eval.result.fit_d;
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    outcome.generator_fitness[i] /= rounds;
    outcome.discriminator_fitness[i] /= rounds;
  }

  outcome.elite_generator = detail::argmax_fitness(outcome.generator_fitness);
  outcome.elite_discriminator = detail::argmax_fitness(outcome.discriminator_fitness);
  outcome.elite_generator_genome = state.generators.members[outcome.elite_generator];
  state.prev_elite_generator = outcome.elite_generator;
  state.prev_elite_discriminator = outcome.elite_discriminator;

  if (opts.capture_population) {
    outcome.generators_snapshot = state.generators.members;
  }

  outcome.matches.reserve(total);
  for (MatchEval& eval : evals) {
    if (!opts.keep_traces) {
      eval.result.generator_trace = EpisodeTrace{};
      eval.result.expert_trace = EpisodeTrace{};
    }
    outcome.matches.push_back(std::move(eval.result));
  }

  // SELECTION: independently per population, generators first so lineage
  // ids are reproducible.
  detail::apply_selection(state.generators, select_truncate(outcome.generator_fitness),
                          state.next_lineage);
  detail::apply_selection(state.discriminators, select_truncate(outcome.discriminator_fitness),
                          state.next_lineage);
  state.generation = g + 1;
  return outcome;
}

}  // namespace evoimit
