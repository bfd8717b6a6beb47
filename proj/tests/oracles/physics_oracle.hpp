#pragma once

// Equations-only re-implementations of the five transition functions,
// written directly from the published dynamics as an independent
// cross-check of the engine. Structured differently on purpose: generic
// integrators, explicit intermediate quantities, no shared helpers.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

struct Transition {
  std::array<double, 4> state{};
  double reward = 0.0;
  bool terminated = false;
};

inline double angle_normalize(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double m = std::fmod(x + std::numbers::pi, two_pi);
  if (m < 0.0) m += two_pi;
  return m - std::numbers::pi;
}

inline double bound(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Cart-pole with a pole pivoting on a cart, explicit Euler at dt = 0.02.
// Accelerations follow Florian's correction of the Barto-Sutton-Anderson
// equations, the form the canonical implementation uses.
inline Transition cartpole(const std::array<double, 4>& s, int action) {
  const double gravity = 9.8;
  const double mass_cart = 1.0, mass_pole = 0.1;
  const double total = mass_cart + mass_pole;
  const double half_len = 0.5;
  const double pole_ml = mass_pole * half_len;
  const double dt = 0.02;
  const double x = s[0], xd = s[1], th = s[2], thd = s[3];

  const double f = action == 1 ? 10.0 : -10.0;
  const double sin_th = std::sin(th), cos_th = std::cos(th);
  const double temp = (f + pole_ml * thd * thd * sin_th) / total;
  const double th_acc = (gravity * sin_th - cos_th * temp) /
                        (half_len * (4.0 / 3.0 - mass_pole * cos_th * cos_th / total));
  const double x_acc = temp - pole_ml * th_acc * cos_th / total;

  Transition t;
  t.state = {x + dt * xd, xd + dt * x_acc, th + dt * thd, thd + dt * th_acc};
  const double th_lim = 12.0 * std::numbers::pi / 180.0;
  t.terminated = std::abs(t.state[0]) > 2.4 || std::abs(t.state[2]) > th_lim;
  t.reward = 1.0;
  return t;
}

// Mountain car on a cos-shaped hill, discrete thrust in {-1, 0, +1} units.
inline Transition mountaincar(const std::array<double, 4>& s, int action) {
  double pos = s[0], vel = s[1];
  vel = vel + 0.001 * (action - 1) - 0.0025 * std::cos(3.0 * pos);
  vel = bound(vel, -0.07, 0.07);
  pos = pos + vel;
  pos = bound(pos, -1.2, 0.6);
  if (pos <= -1.2 && vel < 0.0) vel = 0.0;

  Transition t;
  t.state = {pos, vel, 0.0, 0.0};
  t.terminated = pos >= 0.5 && vel >= 0.0;
  t.reward = -1.0;
  return t;
}

// Continuous-thrust variant: power 0.0015, quadratic action cost, +100 at
// the goal.
inline Transition mountaincar_continuous(const std::array<double, 4>& s, double u) {
  double pos = s[0], vel = s[1];
  vel = vel + u * 0.0015 - 0.0025 * std::cos(3.0 * pos);
  vel = bound(vel, -0.07, 0.07);
  pos = pos + vel;
  pos = bound(pos, -1.2, 0.6);
  if (pos <= -1.2 && vel < 0.0) vel = 0.0;

  Transition t;
  t.state = {pos, vel, 0.0, 0.0};
  t.terminated = pos >= 0.45 && vel >= 0.0;
  t.reward = -0.1 * u * u + (t.terminated ? 100.0 : 0.0);
  return t;
}

// Torque-limited pendulum, semi-implicit Euler at dt = 0.05; the cost uses
// the wrapped angle of the PRE-step state.
inline Transition pendulum(const std::array<double, 4>& s, double u) {
  const double g = 10.0, m = 1.0, l = 1.0, dt = 0.05;
  const double th = s[0], thd = s[1];

  const double wrapped = angle_normalize(th);
  const double cost = wrapped * wrapped + 0.1 * thd * thd + 0.001 * u * u;

  double thd_next = thd + dt * (3.0 * g / (2.0 * l) * std::sin(th) + 3.0 / (m * l * l) * u);
  thd_next = bound(thd_next, -8.0, 8.0);
  const double th_next = th + dt * thd_next;

  Transition t;
  t.state = {th_next, thd_next, 0.0, 0.0};
  t.terminated = false;
  t.reward = -cost;
  return t;
}

namespace detail {

// Acrobot equations of motion in the textbook ("book") formulation.
inline std::array<double, 4> acrobot_rates(const std::array<double, 4>& y, double tau) {
  const double m1 = 1.0, m2 = 1.0, l1 = 1.0, lc1 = 0.5, lc2 = 0.5, i1 = 1.0, i2 = 1.0, g = 9.8;
  const double q1 = y[0], q2 = y[1], q1d = y[2], q2d = y[3];
  const double half_pi = std::numbers::pi / 2.0;

  const double d1 = m1 * lc1 * lc1 +
                    m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(q2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(q2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(q1 + q2 - half_pi);
  const double phi1 = -m2 * l1 * lc2 * q2d * q2d * std::sin(q2) -
                      2.0 * m2 * l1 * lc2 * q2d * q1d * std::sin(q2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(q1 - half_pi) + phi2;
  const double q2dd = (tau + (d2 / d1) * phi1 - m2 * l1 * lc2 * q1d * q1d * std::sin(q2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double q1dd = -(d2 * q2dd + phi1) / d1;
  return {q1d, q2d, q1dd, q2dd};
}

using Deriv = std::function<std::array<double, 4>(const std::array<double, 4>&)>;

// Generic classical Runge-Kutta step.
inline std::array<double, 4> rk4_step(const Deriv& f, const std::array<double, 4>& y,
                                      double h) {
  auto axpy = [](const std::array<double, 4>& base, double a, const std::array<double, 4>& d) {
    std::array<double, 4> r;
    for (int i = 0; i < 4; ++i) r[i] = base[i] + a * d[i];
    return r;
  };
  const auto k1 = f(y);
  const auto k2 = f(axpy(y, h / 2.0, k1));
  const auto k3 = f(axpy(y, h / 2.0, k2));
  const auto k4 = f(axpy(y, h, k3));
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

}  // namespace detail

// Two-link underactuated acrobot, RK4 at dt = 0.2, torque on the second
// joint in {-1, 0, +1}.
inline Transition acrobot(const std::array<double, 4>& s, int action) {
  const double tau = action - 1.0;
  auto rates = [tau](const std::array<double, 4>& y) { return detail::acrobot_rates(y, tau); };
  std::array<double, 4> n = detail::rk4_step(rates, s, 0.2);

  n[0] = angle_normalize(n[0]);
  n[1] = angle_normalize(n[1]);
  n[2] = bound(n[2], -4.0 * std::numbers::pi, 4.0 * std::numbers::pi);
  n[3] = bound(n[3], -9.0 * std::numbers::pi, 9.0 * std::numbers::pi);

  Transition t;
  t.state = n;
  t.terminated = -std::cos(n[0]) - std::cos(n[1] + n[0]) > 1.0;
  t.reward = t.terminated ? 0.0 : -1.0;
  return t;
}

}  // namespace oracle
