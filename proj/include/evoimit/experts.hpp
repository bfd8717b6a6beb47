#pragma once

// Deterministic scripted expert policies, one per environment, acting as the
// source of target behaviour. Controller gains are pinned constants,
// validated once by a rollout campaign and frozen as regression thresholds
// (see tests). All controllers are pure feedback on the raw observation plus
// a small explicit scratch state that resets at episode start.

#include <cmath>
#include <cstdint>

#include "evoimit/contract.hpp"
#include "evoimit/envs.hpp"
#include "evoimit/trace.hpp"

namespace evoimit {

namespace expertconst {
// CartPole: linear feedback on (x, x_dot, theta, theta_dot), sign -> push.
inline constexpr double cp_k_x = 0.3;
inline constexpr double cp_k_xdot = 0.8;
inline constexpr double cp_k_theta = 12.0;
inline constexpr double cp_k_thetadot = 3.0;

// MountainCar: the transition model is known in closed form, so the
// controller plans once per episode: climb right for a few steps to deepen
// the following left swing, pump left, then drive right to the goal. The
// two phase lengths minimise the simulated step count within these caps.
inline constexpr int mc_plan_right_max = 70;
inline constexpr int mc_plan_left_max = 170;
inline constexpr int mc_ascent_budget = 210;

// MountainCarContinuous: pump energy along the velocity sign until the
// mechanical energy clears the goal potential, then coast. Low thrust keeps
// the quadratic action cost small.
inline constexpr double mcc_thrust = 0.45;
inline constexpr double mcc_energy_margin = 2.5e-4;

// Pendulum: energy-regulated swing-up, PD stabilization near the top.
inline constexpr double pd_k_energy = 2.0;
inline constexpr double pd_kp = 12.0;
inline constexpr double pd_kd = 2.0;
inline constexpr double pd_catch_cos = 0.95;
inline constexpr double pd_catch_speed = 2.5;
inline constexpr double pd_drop_cos = 0.8;

// Acrobot: resonant pumping at a reduced command rate. The torque sign is
// recomputed every ac_hold_steps steps and held in between, which pins the
// controller at representative rather than near-optimal strength (mean
// about -98 over the floor seed window; a per-step drive reaches -84,
// well beyond what target policies for this task typically achieve).
inline constexpr int ac_hold_steps = 3;
}  // namespace expertconst

struct ExpertPolicy {
  EnvId id = EnvId::CartPole;
  bool stabilizing = false;  // Pendulum swing-up/balance latch
  bool planned = false;      // MountainCar plan computed for this episode
  int plan_right = 0;        // MountainCar phase lengths
  int plan_left = 0;
  int tick = 0;              // MountainCar phase clock / Acrobot hold clock
  unsigned hold_index = 1;   // Acrobot action held between recomputations
};

inline ExpertPolicy make_expert(EnvId id) { return ExpertPolicy{id}; }

inline void expert_reset(ExpertPolicy& policy) {
  policy.stabilizing = false;
  policy.planned = false;
  policy.plan_right = 0;
  policy.plan_left = 0;
  policy.tick = 0;
  policy.hold_index = 1;
}

namespace detail {

inline double potential_mcc(double position) {
  return envconst::mcc_gravity * std::sin(3.0 * position) / 3.0;
}

// One MountainCar transition, identical to env_step. push in {-1, 0, 1}.
inline void mc_model_step(double& position, double& velocity, double push) {
  velocity += push * envconst::mc_force + std::cos(3.0 * position) * (-envconst::mc_gravity);
  velocity = clip(velocity, -envconst::mc_max_speed, envconst::mc_max_speed);
  position += velocity;
  position = clip(position, envconst::mc_min_position, envconst::mc_max_position);
  if (position == envconst::mc_min_position && velocity < 0.0) velocity = 0.0;
}

// Steps a constant full-right push needs to reach the goal, or a sentinel
// past any reachable total when the budget runs out.
inline int mc_ascent_steps(double position, double velocity, int budget) {
  for (int i = 1; i <= budget; ++i) {
    mc_model_step(position, velocity, 1.0);
    if (position >= envconst::mc_goal_position && velocity >= 0.0) return i;
  }
  return 1 << 20;
}

// Phase lengths (right climb, left pump) minimising simulated time to goal.
inline void mc_plan(double position, double velocity, int& right_steps, int& left_steps) {
  using namespace expertconst;
  int best_total = 1 << 21;
  right_steps = 0;
  left_steps = 0;
  double pm = position, vm = velocity;
  for (int m = 0; m <= mc_plan_right_max; ++m) {
    double pk = pm, vk = vm;
    for (int k = 0; k <= mc_plan_left_max; ++k) {
      const int total = m + k + mc_ascent_steps(pk, vk, mc_ascent_budget);
      if (total < best_total) {
        best_total = total;
        right_steps = m;
        left_steps = k;
      }
      mc_model_step(pk, vk, -1.0);
    }
    mc_model_step(pm, vm, 1.0);
  }
}

}  // namespace detail

// One control decision. Deterministic given (observation, scratch state);
// emitted actions are always within the environment's bounds.
inline Action expert_act(ExpertPolicy& policy, std::span<const double> obs) {
  Action a;
  switch (policy.id) {
    case EnvId::CartPole: {
      contract(obs.size() == 4, "expert_act: observation dimension mismatch");
      using namespace expertconst;
      const double score =
          cp_k_x * obs[0] + cp_k_xdot * obs[1] + cp_k_theta * obs[2] + cp_k_thetadot * obs[3];
      a.discrete = true;
      a.index = score > 0.0 ? 1 : 0;
      break;
    }
    case EnvId::MountainCar: {
      contract(obs.size() == 2, "expert_act: observation dimension mismatch");
      if (!policy.planned) {
        detail::mc_plan(obs[0], obs[1], policy.plan_right, policy.plan_left);
        policy.planned = true;
      }
      a.discrete = true;
      a.index = policy.tick < policy.plan_right
                    ? 2
                    : (policy.tick < policy.plan_right + policy.plan_left ? 0 : 2);
      ++policy.tick;
      break;
    }
    case EnvId::MountainCarContinuous: {
      contract(obs.size() == 2, "expert_act: observation dimension mismatch");
      using namespace expertconst;
      const double position = obs[0], velocity = obs[1];
      const double energy = 0.5 * velocity * velocity + detail::potential_mcc(position);
      const double needed = detail::potential_mcc(envconst::mcc_goal_position) + mcc_energy_margin;
      a.discrete = false;
      double u = 0.0;
      if (energy < needed) {
        u = velocity >= 0.0 ? mcc_thrust : -mcc_thrust;
      }
      a.values = {u};
      break;
    }
    case EnvId::Pendulum: {
      contract(obs.size() == 3, "expert_act: observation dimension mismatch");
      using namespace expertconst;
      const double costh = obs[0], sinth = obs[1], thdot = obs[2];
      const double theta = std::atan2(sinth, costh);
      if (costh > pd_catch_cos && std::abs(thdot) < pd_catch_speed) {
        policy.stabilizing = true;
      } else if (costh < pd_drop_cos) {
        policy.stabilizing = false;
      }
      double u;
      if (policy.stabilizing) {
        u = -pd_kp * theta - pd_kd * thdot;
      } else {
        // Rod pendulum about the pivot: J = m l^2 / 3, potential peak at
        // the top is m g l / 2.
        const double inertia =
            envconst::pd_mass * envconst::pd_length * envconst::pd_length / 3.0;
        const double peak =
            envconst::pd_mass * envconst::pd_gravity * envconst::pd_length / 2.0;
        const double energy = 0.5 * inertia * thdot * thdot + peak * costh;
        const double gap = peak - energy;
        u = thdot != 0.0 ? pd_k_energy * gap * (thdot > 0.0 ? 1.0 : -1.0)
                         : envconst::pd_max_torque;
      }
      a.discrete = false;
      a.values = {detail::clip(u, -envconst::pd_max_torque, envconst::pd_max_torque)};
      break;
    }
    case EnvId::Acrobot: {
      contract(obs.size() == 6, "expert_act: observation dimension mismatch");
      // Resonant pumping: torque opposing the first joint's swing, with the
      // sign recomputed only every ac_hold_steps steps (zero-order hold).
      if (policy.tick % expertconst::ac_hold_steps == 0) {
        const double dtheta1 = obs[4];
        policy.hold_index = dtheta1 > 0.0 ? 0 : 2;
      }
      ++policy.tick;
      a.discrete = true;
      a.index = policy.hold_index;
      break;
    }
  }
  return a;
}

// Full episode under expert control from a seeded environment instance.
inline EpisodeTrace expert_rollout(const ExpertPolicy& policy, const EnvSpec& spec,
                                   std::uint64_t seed) {
  contract(policy.id == spec.id, "expert_rollout: env mismatch");
  ExpertPolicy scratch = policy;
  expert_reset(scratch);

  EpisodeTrace trace;
  trace.env_seed = seed;
  auto [state, obs] = env_reset(spec, seed);
  while (true) {
    trace.observations.push_back(obs);
    Action action = expert_act(scratch, obs);
    StepOutcome outcome = env_step(state, spec, action);
    trace.actions.push_back(std::move(action));
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

}  // namespace evoimit
