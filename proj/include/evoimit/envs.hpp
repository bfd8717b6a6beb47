#pragma once

// Self-contained deterministic re-implementations of five classic-control
// environments with a uniform reset/step interface. Dynamics, constants,
// reward definitions and horizons follow the widely documented canonical
// specifications; everything runs in 64-bit floats.
//
//   env                     obs  actions          dt      horizon
//   CartPole                 4   discrete(2)      0.02    500
//   MountainCar              2   discrete(3)      1 tick  200
//   MountainCarContinuous    2   box [-1,1]       1 tick  999
//   Pendulum                 3   box [-2,2]       0.05    200
//   Acrobot                  6   discrete(3)      0.2/RK4 500
//
// Constants are namespaced below; changing any of them is a breaking format
// change for checkpoints produced by this engine.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "evoimit/contract.hpp"
#include "evoimit/rng.hpp"

namespace evoimit {

enum class EnvId : std::uint32_t {
  CartPole = 0,
  MountainCar = 1,
  MountainCarContinuous = 2,
  Pendulum = 3,
  Acrobot = 4,
};

inline const char* env_name(EnvId id) {
  switch (id) {
    case EnvId::CartPole: return "cartpole";
    case EnvId::MountainCar: return "mountaincar";
    case EnvId::MountainCarContinuous: return "mountaincarcontinuous";
    case EnvId::Pendulum: return "pendulum";
    case EnvId::Acrobot: return "acrobot";
  }
  throw ContractError("env_name: unknown env id");
}

inline bool env_from_name(const std::string& name, EnvId& out) {
  for (EnvId id : {EnvId::CartPole, EnvId::MountainCar, EnvId::MountainCarContinuous,
                   EnvId::Pendulum, EnvId::Acrobot}) {
    if (name == env_name(id)) {
      out = id;
      return true;
    }
  }
  return false;
}

struct ActionSpace {
  bool discrete = true;
  std::uint32_t n = 0;              // discrete action count
  std::vector<double> low, high;    // continuous bounds, elementwise low < high

  std::uint32_t arity() const {
    return discrete ? n : static_cast<std::uint32_t>(low.size());
  }
};

struct EnvSpec {
  EnvId id = EnvId::CartPole;
  std::uint32_t obs_dim = 0;
  ActionSpace action;
  std::uint32_t max_steps = 0;
};

// Decoded action: exactly one of the two representations is meaningful.
struct Action {
  bool discrete = true;
  std::uint32_t index = 0;
  std::vector<double> values;
};

struct StepOutcome {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;  // task-defined success/failure
  bool truncated = false;   // horizon reached
};

struct EnvState {
  EnvId id = EnvId::CartPole;
  std::array<double, 4> phys{};  // usage per env documented in reset/step below
  std::uint32_t step_count = 0;
  bool finished = false;
  std::uint64_t seed = 0;  // reset seed, kept for trace replay
};

namespace envconst {
// CartPole
inline constexpr double cp_gravity = 9.8;
inline constexpr double cp_masscart = 1.0;
inline constexpr double cp_masspole = 0.1;
inline constexpr double cp_total_mass = cp_masscart + cp_masspole;
inline constexpr double cp_length = 0.5;  // half the pole length
inline constexpr double cp_polemass_length = cp_masspole * cp_length;
inline constexpr double cp_force_mag = 10.0;
inline constexpr double cp_tau = 0.02;
inline constexpr double cp_theta_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
inline constexpr double cp_x_threshold = 2.4;
inline constexpr double cp_init_range = 0.05;

// MountainCar (discrete)
inline constexpr double mc_min_position = -1.2;
inline constexpr double mc_max_position = 0.6;
inline constexpr double mc_max_speed = 0.07;
inline constexpr double mc_goal_position = 0.5;
inline constexpr double mc_force = 0.001;
inline constexpr double mc_gravity = 0.0025;

// MountainCarContinuous
inline constexpr double mcc_min_position = -1.2;
inline constexpr double mcc_max_position = 0.6;
inline constexpr double mcc_max_speed = 0.07;
inline constexpr double mcc_goal_position = 0.45;
inline constexpr double mcc_power = 0.0015;
inline constexpr double mcc_gravity = 0.0025;
inline constexpr double mcc_goal_reward = 100.0;
inline constexpr double mcc_action_cost = 0.1;

// Pendulum
inline constexpr double pd_max_speed = 8.0;
inline constexpr double pd_max_torque = 2.0;
inline constexpr double pd_dt = 0.05;
inline constexpr double pd_gravity = 10.0;
inline constexpr double pd_mass = 1.0;
inline constexpr double pd_length = 1.0;

// Acrobot
inline constexpr double ab_dt = 0.2;
inline constexpr double ab_link_length_1 = 1.0;
inline constexpr double ab_link_mass_1 = 1.0;
inline constexpr double ab_link_mass_2 = 1.0;
inline constexpr double ab_link_com_1 = 0.5;
inline constexpr double ab_link_com_2 = 0.5;
inline constexpr double ab_link_moi = 1.0;
inline constexpr double ab_gravity = 9.8;
inline constexpr double ab_max_vel_1 = 4.0 * std::numbers::pi;
inline constexpr double ab_max_vel_2 = 9.0 * std::numbers::pi;
inline constexpr double ab_init_range = 0.1;
}  // namespace envconst

inline EnvSpec make_env_spec(EnvId id) {
  switch (id) {
    case EnvId::CartPole:
      return EnvSpec{id, 4, ActionSpace{true, 2, {}, {}}, 500};
    case EnvId::MountainCar:
      return EnvSpec{id, 2, ActionSpace{true, 3, {}, {}}, 200};
    case EnvId::MountainCarContinuous:
      return EnvSpec{id, 2, ActionSpace{false, 0, {-1.0}, {1.0}}, 999};
    case EnvId::Pendulum:
      return EnvSpec{id, 3, ActionSpace{false, 0, {-envconst::pd_max_torque}, {envconst::pd_max_torque}}, 200};
    case EnvId::Acrobot:
      return EnvSpec{id, 6, ActionSpace{true, 3, {}, {}}, 500};
  }
  throw ContractError("make_env_spec: unknown env id");
}

namespace detail {

// x wrapped into [-pi, pi).
inline double wrap_pi(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return x - two_pi * std::floor((x + std::numbers::pi) / two_pi);
}

inline double clip(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace detail

inline void observe(const EnvState& s, std::span<double> out) {
  switch (s.id) {
    case EnvId::CartPole:
    case EnvId::MountainCar:
    case EnvId::MountainCarContinuous: {
      const std::size_t n = s.id == EnvId::CartPole ? 4 : 2;
      for (std::size_t i = 0; i < n; ++i) out[i] = s.phys[i];
      break;
    }
    case EnvId::Pendulum:
      out[0] = std::cos(s.phys[0]);
      out[1] = std::sin(s.phys[0]);
      out[2] = s.phys[1];
      break;
    case EnvId::Acrobot:
      out[0] = std::cos(s.phys[0]);
      out[1] = std::sin(s.phys[0]);
      out[2] = std::cos(s.phys[1]);
      out[3] = std::sin(s.phys[1]);
      out[4] = s.phys[2];
      out[5] = s.phys[3];
      break;
  }
}

inline std::vector<double> observe(const EnvState& s, const EnvSpec& spec) {
  std::vector<double> out(spec.obs_dim);
  observe(s, out);
  return out;
}

// Initial state drawn from the environment's canonical small uniform ranges,
// fully determined by the seed. Draw order per env:
//   CartPole: x, x_dot, theta, theta_dot ~ U(-0.05, 0.05)
//   MountainCar('s): position ~ U(-0.6, -0.4), velocity = 0
//   Pendulum: theta ~ U(-pi, pi), theta_dot ~ U(-1, 1)
//   Acrobot: theta1, theta2, dtheta1, dtheta2 ~ U(-0.1, 0.1)
inline std::pair<EnvState, std::vector<double>> env_reset(const EnvSpec& spec,
                                                          std::uint64_t seed) {
  EnvState s;
  s.id = spec.id;
  s.seed = seed;
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(spec.id)}));
  switch (spec.id) {
    case EnvId::CartPole:
      for (int i = 0; i < 4; ++i) {
        s.phys[i] = rng.next_uniform(-envconst::cp_init_range, envconst::cp_init_range);
      }
      break;
    case EnvId::MountainCar:
    case EnvId::MountainCarContinuous:
      s.phys[0] = rng.next_uniform(-0.6, -0.4);
      s.phys[1] = 0.0;
      break;
    case EnvId::Pendulum:
      s.phys[0] = rng.next_uniform(-std::numbers::pi, std::numbers::pi);
      s.phys[1] = rng.next_uniform(-1.0, 1.0);
      break;
    case EnvId::Acrobot:
      for (int i = 0; i < 4; ++i) {
        s.phys[i] = rng.next_uniform(-envconst::ab_init_range, envconst::ab_init_range);
      }
      break;
  }
  return {s, observe(s, spec)};
}

namespace detail {

// Acrobot equations of motion ("book" variant), torque held constant over
// the integration step.
inline std::array<double, 4> acrobot_dsdt(const std::array<double, 4>& s, double torque) {
  using namespace envconst;
  const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
  const double m1 = ab_link_mass_1, m2 = ab_link_mass_2;
  const double l1 = ab_link_length_1;
  const double lc1 = ab_link_com_1, lc2 = ab_link_com_2;
  const double i1 = ab_link_moi, i2 = ab_link_moi;
  const double g = ab_gravity;

  const double d1 =
      m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - std::numbers::pi / 2.0);
  const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                      2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - std::numbers::pi / 2.0) + phi2;
  const double ddtheta2 =
      (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
  return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

inline std::array<double, 4> acrobot_rk4(const std::array<double, 4>& y0, double torque) {
  const double h = envconst::ab_dt;
  const auto k1 = acrobot_dsdt(y0, torque);
  std::array<double, 4> y1;
  for (int i = 0; i < 4; ++i) y1[i] = y0[i] + 0.5 * h * k1[i];
  const auto k2 = acrobot_dsdt(y1, torque);
  std::array<double, 4> y2;
  for (int i = 0; i < 4; ++i) y2[i] = y0[i] + 0.5 * h * k2[i];
  const auto k3 = acrobot_dsdt(y2, torque);
  std::array<double, 4> y3;
  for (int i = 0; i < 4; ++i) y3[i] = y0[i] + h * k3[i];
  const auto k4 = acrobot_dsdt(y3, torque);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace detail

// Advances the physics by one step. Throws on a finished episode or an
// out-of-bounds action; callers are expected to decode first.
inline StepOutcome env_step(EnvState& s, const EnvSpec& spec, const Action& action) {
  using namespace envconst;
  contract(!s.finished, "env_step: episode already finished");
  contract(action.discrete == spec.action.discrete, "env_step: action kind mismatch");
  if (spec.action.discrete) {
    contract(action.index < spec.action.n, "env_step: discrete action out of range");
  } else {
    contract(action.values.size() == spec.action.low.size(),
             "env_step: continuous action arity mismatch");
    for (std::size_t i = 0; i < action.values.size(); ++i) {
      contract(action.values[i] >= spec.action.low[i] && action.values[i] <= spec.action.high[i],
               "env_step: continuous action out of bounds");
    }
  }

  StepOutcome out;
  switch (spec.id) {
    case EnvId::CartPole: {
      double x = s.phys[0], x_dot = s.phys[1], theta = s.phys[2], theta_dot = s.phys[3];
      const double force = action.index == 1 ? cp_force_mag : -cp_force_mag;
      const double costheta = std::cos(theta);
      const double sintheta = std::sin(theta);
      const double temp =
          (force + cp_polemass_length * theta_dot * theta_dot * sintheta) / cp_total_mass;
      const double thetaacc =
          (cp_gravity * sintheta - costheta * temp) /
          (cp_length * (4.0 / 3.0 - cp_masspole * costheta * costheta / cp_total_mass));
      const double xacc = temp - cp_polemass_length * thetaacc * costheta / cp_total_mass;
      x += cp_tau * x_dot;
      x_dot += cp_tau * xacc;
      theta += cp_tau * theta_dot;
      theta_dot += cp_tau * thetaacc;
      s.phys = {x, x_dot, theta, theta_dot};
      out.terminated = x < -cp_x_threshold || x > cp_x_threshold ||
                       theta < -cp_theta_threshold || theta > cp_theta_threshold;
      out.reward = 1.0;
      break;
    }
    case EnvId::MountainCar: {
      double position = s.phys[0], velocity = s.phys[1];
      velocity += (static_cast<double>(action.index) - 1.0) * mc_force +
                  std::cos(3.0 * position) * (-mc_gravity);
      velocity = detail::clip(velocity, -mc_max_speed, mc_max_speed);
      position += velocity;
      position = detail::clip(position, mc_min_position, mc_max_position);
      if (position == mc_min_position && velocity < 0.0) velocity = 0.0;
      s.phys = {position, velocity, 0.0, 0.0};
      out.terminated = position >= mc_goal_position && velocity >= 0.0;
      out.reward = -1.0;
      break;
    }
    case EnvId::MountainCarContinuous: {
      double position = s.phys[0], velocity = s.phys[1];
      const double force = action.values[0];
      velocity += force * mcc_power - mcc_gravity * std::cos(3.0 * position);
      velocity = detail::clip(velocity, -mcc_max_speed, mcc_max_speed);
      position += velocity;
      position = detail::clip(position, mcc_min_position, mcc_max_position);
      if (position == mcc_min_position && velocity < 0.0) velocity = 0.0;
      s.phys = {position, velocity, 0.0, 0.0};
      out.terminated = position >= mcc_goal_position && velocity >= 0.0;
      out.reward = (out.terminated ? mcc_goal_reward : 0.0) - mcc_action_cost * force * force;
      break;
    }
    case EnvId::Pendulum: {
      const double th = s.phys[0], thdot = s.phys[1];
      const double u = action.values[0];
      const double norm_th = detail::wrap_pi(th);
      const double costs = norm_th * norm_th + 0.1 * thdot * thdot + 0.001 * u * u;
      double newthdot =
          thdot + (3.0 * pd_gravity / (2.0 * pd_length) * std::sin(th) +
                   3.0 / (pd_mass * pd_length * pd_length) * u) *
                      pd_dt;
      newthdot = detail::clip(newthdot, -pd_max_speed, pd_max_speed);
      const double newth = th + newthdot * pd_dt;
      s.phys = {newth, newthdot, 0.0, 0.0};
      out.terminated = false;
      out.reward = -costs;
      break;
    }
    case EnvId::Acrobot: {
      const double torque = static_cast<double>(action.index) - 1.0;
      std::array<double, 4> ns = detail::acrobot_rk4({s.phys[0], s.phys[1], s.phys[2], s.phys[3]}, torque);
      ns[0] = detail::wrap_pi(ns[0]);
      ns[1] = detail::wrap_pi(ns[1]);
      ns[2] = detail::clip(ns[2], -ab_max_vel_1, ab_max_vel_1);
      ns[3] = detail::clip(ns[3], -ab_max_vel_2, ab_max_vel_2);
      s.phys = ns;
      out.terminated = -std::cos(ns[0]) - std::cos(ns[1] + ns[0]) > 1.0;
      out.reward = out.terminated ? 0.0 : -1.0;
      break;
    }
  }

  s.step_count += 1;
  out.truncated = !out.terminated && s.step_count >= spec.max_steps;
  s.finished = out.terminated || out.truncated;
  out.observation = observe(s, spec);
  return out;
}

// Network output -> environment action. Continuous: per-dimension clip to
// [0,1] followed by an affine map onto [low, high]. Discrete: argmax, ties
// broken by the lowest index (zero-initialized networks emit all-zero
// outputs, which must still decode deterministically).
inline void action_decode(const EnvSpec& spec, std::span<const double> raw, Action& out) {
  for (double v : raw) {
    contract(std::isfinite(v), "action_decode: non-finite network output");
  }
  out.discrete = spec.action.discrete;
  if (spec.action.discrete) {
    contract(raw.size() == spec.action.n, "action_decode: output arity mismatch");
    std::uint32_t best = 0;
    for (std::uint32_t i = 1; i < raw.size(); ++i) {
      if (raw[i] > raw[best]) best = i;
    }
    out.index = best;
    out.values.clear();
  } else {
    contract(raw.size() == spec.action.low.size(), "action_decode: output arity mismatch");
    out.index = 0;
    out.values.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double unit = detail::clip(raw[i], 0.0, 1.0);
      out.values[i] = spec.action.low[i] + unit * (spec.action.high[i] - spec.action.low[i]);
    }
  }
}

inline Action action_decode(const EnvSpec& spec, std::span<const double> raw) {
  Action a;
  action_decode(spec, raw, a);
  return a;
}

}  // namespace evoimit
