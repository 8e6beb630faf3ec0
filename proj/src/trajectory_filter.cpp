#include "quadarm/trajectory_filter.hpp"

#include <cmath>
#include <stdexcept>

namespace quadarm {

FilterState make_filter_state(const JointLimits& limits, Scalar T, Scalar w1,
                              Scalar w2) {
  if (!(T > 0)) throw std::invalid_argument("filter: T must be > 0");
  if (w1 < 0 || w2 < 0) throw std::invalid_argument("filter: weights must be >= 0");
  FilterState s;
  s.limits = limits;
  s.T = T;
  s.w1 = w1;
  s.w2 = w2;
  return s;
}

QpModifyResult qp_modify(const FilterState& state) {
  QpInstance inst;
  inst.w1 = state.w1;
  inst.w2 = state.w2;
  inst.T = state.T;
  inst.cmd0 = state.cmd[0];
  inst.cmd1 = state.cmd[1];
  inst.cmd2 = state.cmd[2];
  inst.ref_prev1 = state.ref_prev1;
  inst.ref_prev2 = state.ref_prev2;
  inst.vmin = -state.limits.speed_max;
  inst.vmax = state.limits.speed_max;
  inst.amin = state.limits.accel_min;
  inst.amax = state.limits.accel_max;

  QpSolution qp = solve_qp(inst);
  QpModifyResult out;
  out.e = qp.e;
  out.infeasible = !qp.feasible;
  out.phi_ref = state.cmd[0] + qp.e[0];
  return out;
}

long deceleration_horizon(Scalar vel, const JointLimits& limits, Scalar T) {
  Scalar a_up = 0.0, a_brake = 0.0;
  if (vel > 0) {
    a_up = limits.accel_max;
    a_brake = limits.accel_min;
  } else if (vel < 0) {
    a_up = limits.accel_min;
    a_brake = limits.accel_max;
  }
  constexpr long kCap = 10'000'000;
  for (long l = 0; l < kCap; ++l) {
    if (vel * (vel + T * a_up + static_cast<Scalar>(l - 1) * T * a_brake) <= 0.0) {
      return l;
    }
  }
  throw std::logic_error("deceleration_horizon: cap exceeded (degenerate limits)");
}

Scalar predict_peak(const Vec2& phi, long L, const JointLimits& limits, Scalar T) {
  const Scalar pos = phi[0];
  const Scalar vel = phi[1];
  if (L <= 0) return pos;
  Scalar a_up = 0.0, a_brake = 0.0;
  if (vel > 0) {
    a_up = limits.accel_max;
    a_brake = limits.accel_min;
  } else if (vel < 0) {
    a_up = limits.accel_min;
    a_brake = limits.accel_max;
  }
  const Scalar Ls = static_cast<Scalar>(L);
  // C A^L Phi + C A^(L-1) B a_up + sum_{i=0}^{L-2} C A^i B a_brake
  return pos + Ls * T * vel + (Ls - 1.0) * T * T * a_up +
         T * T * 0.5 * (Ls - 1.0) * (Ls - 2.0) * a_brake;
}

Scalar angle_guard(const FilterState& state, Scalar phi_ref, Scalar phi_dot_ref) {
  const JointLimits& lim = state.limits;
  const long L = deceleration_horizon(phi_dot_ref, lim, state.T);
  const Scalar peak = predict_peak(Vec2(phi_ref, phi_dot_ref), L, lim, state.T);
  if (peak >= lim.angle_min && peak <= lim.angle_max) return phi_ref;

  // Brake: hold the previous velocity for one sample while applying the
  // saturated exact-stop acceleration.
  const Scalar dq = state.ref_prev1 - state.ref_prev2;
  const Scalar acc =
      saturate(-dq / (state.T * state.T), lim.accel_min, lim.accel_max);
  return state.ref_prev1 + dq + state.T * state.T * acc;
}

namespace {

// Emission polish: make the backward differences of the stored doubles
// sit inside the bounds at half the audit tolerance. A raw evaluation
// can miss by many ulp of angle scale divided by T^2 when riding an
// acceleration bound, so first clamp against each bound solved for the
// emitted value, then absorb the remaining rounding with ulp nudges.
Scalar polish_emission(const FilterState& state, Scalar theta) {
  const JointLimits& lim = state.limits;
  const Scalar T = state.T;
  const Scalar tol = 0.5e-9;
  const Scalar p1 = state.ref_prev1;
  const Scalar p2 = state.ref_prev2;
  for (int i = 0; i < 64; ++i) {
    const Scalar acc = (theta - 2.0 * p1 + p2) / (T * T);
    const Scalar vel = (theta - p1) / T;
    if (acc > lim.accel_max + tol || vel > lim.speed_max + tol) {
      // First correction jumps straight to each bound solved for the
      // emitted value (the miss can be many ulp); later ones absorb the
      // leftover rounding. A value that passes the checks above is never
      // touched, preserving bit-exact pass-through.
      const Scalar cap = std::min(lim.accel_max * T * T + 2.0 * p1 - p2,
                                  lim.speed_max * T + p1);
      theta = i == 0 && cap < theta ? cap : std::nextafter(theta, -kInf);
    } else if (acc < lim.accel_min - tol || vel < -lim.speed_max - tol) {
      const Scalar floor = std::max(lim.accel_min * T * T + 2.0 * p1 - p2,
                                    -lim.speed_max * T + p1);
      theta = i == 0 && floor > theta ? floor : std::nextafter(theta, kInf);
    } else {
      break;
    }
  }
  return theta;
}

Scalar brake_fallback(const FilterState& state) {
  const Scalar dq = state.ref_prev1 - state.ref_prev2;
  const Scalar acc = saturate(-dq / (state.T * state.T), state.limits.accel_min,
                              state.limits.accel_max);
  return state.ref_prev1 + dq + state.T * state.T * acc;
}

}  // namespace

Scalar filter_step(FilterState& state, Scalar cmd) {
  if (!(state.T > 0)) throw std::invalid_argument("filter_step: state not initialized");
  state.last_infeasible = false;

  if (state.steps == 0) {
    // Startup: seed history with the first command clamped into the angle
    // bounds, zero velocity; the first two samples pass through.
    const Scalar latch = saturate(cmd, state.limits.angle_min, state.limits.angle_max);
    state.cmd = {cmd, cmd, cmd};
    state.ref_prev1 = latch;
    state.ref_prev2 = latch;
    state.steps = 1;
    return latch;
  }
  state.cmd = {state.cmd[1], state.cmd[2], cmd};
  if (state.steps == 1) {
    state.steps = 2;
    return state.ref_prev1;  // second startup sample, still the clamped latch
  }

  QpModifyResult qp = qp_modify(state);
  Scalar theta;
  if (qp.infeasible) {
    state.last_infeasible = true;
    ++state.infeasible_count;
    theta = brake_fallback(state);
  } else {
    const Scalar phi_dot = (qp.phi_ref - state.ref_prev1) / state.T;
    theta = angle_guard(state, qp.phi_ref, phi_dot);
  }
  theta = polish_emission(state, theta);

  state.ref_prev2 = state.ref_prev1;
  state.ref_prev1 = theta;
  ++state.steps;
  return theta;
}

}  // namespace quadarm
