#include "quadarm/psmc.hpp"

#include <algorithm>
#include <stdexcept>

namespace quadarm {

void PsmcGains::validate() const {
  if (!(M > 0 && B > 0 && K > 0 && L > 0 && J > 0 && H > 0 && F > 0)) {
    throw std::invalid_argument("psmc: every gain must be > 0");
  }
}

PsmcGains default_psmc_gains(Scalar inertia, Scalar damping, Scalar torque_max) {
  if (!(inertia > 0)) throw std::invalid_argument("psmc: inertia must be > 0");
  if (damping < 0) throw std::invalid_argument("psmc: damping must be >= 0");
  const Scalar wn = 2.0 * kPi * 20.0;  // coupling bandwidth
  const Scalar ws = 2.0 * kPi * 2.0;   // surface bandwidth
  PsmcGains g;
  g.M = inertia;
  g.K = inertia * wn * wn;
  g.B = std::max(2.0 * inertia * wn - damping, 0.1 * inertia * wn);
  g.L = inertia * wn * wn * wn / 10.0;
  g.J = 1.0 / (ws * ws);
  g.H = 2.0 / ws;
  g.F = torque_max;
  g.validate();
  return g;
}

PsmcState psmc_reset(const PsmcGains& gains, Scalar theta0) {
  gains.validate();
  PsmcState s;
  s.p = theta0;
  s.theta_prev = theta0;
  return s;
}

Scalar psmc_step(const PsmcGains& g, PsmcState& state, Scalar theta_ref,
                 Scalar theta, Scalar T) {
  if (!(T > 0)) throw std::invalid_argument("psmc_step: T must be > 0");

  const Scalar theta_dot = (theta - state.theta_prev) / T;

  const Scalar c1 = g.M / T + g.B + g.K * T + g.L * T * T;
  const Scalar d = -(g.M / T) * state.p_dot - g.B * theta_dot -
                   (g.K + g.L * T) * (theta - state.p) - g.L * state.a;
  const Scalar c2 = g.J / (T * T) + g.H / T + 1.0;
  const Scalar s0 = -c2 * (state.p - theta_ref) +
                    (2.0 * g.J / (T * T) + g.H / T) * state.beta1 -
                    (g.J / (T * T)) * state.beta2;

  const Scalar tau = saturate(c1 * s0 / (T * c2) + d, -g.F, g.F);
  const Scalar q = (tau - d) / c1;

  state.p += T * q;
  state.p_dot = q;
  state.a += T * (theta - state.p);
  state.beta2 = state.beta1;
  state.beta1 = state.p - theta_ref;
  state.theta_prev = theta;
  state.tau_prev = tau;
  return tau;
}

}  // namespace quadarm
