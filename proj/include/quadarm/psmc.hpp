#pragma once

#include "quadarm/types.hpp"

namespace quadarm {

// Proxy-based sliding mode controller, discretized with the implicit
// (backward) Euler method.
//
// A virtual proxy at position p is coupled to the measured joint at theta
// through a PID-like element with inertia feedforward,
//
//   tau = M p_ddot - B alpha_ddot - K alpha_dot - L alpha,
//   alpha_dot = theta - p,
//
// and pulled toward the reference by a sliding mode force of magnitude at
// most F acting on the sliding variable built from beta = p - theta_ref:
//
//   sigma = -(beta + H beta_dot + J beta_ddot),
//   tau in F * SGN(sigma),
//
// where SGN is the set-valued sign ({-1}, {+1}, or [-1, 1] at zero).
// Both relations are solved simultaneously at the new proxy state each
// sample. With q the new proxy velocity and backward differences
// throughout, both sides are monotone affine in q, so the exact solution
// of the set-valued equation is a clamp:
//
//   c1 = M/T + B + K T + L T^2
//   d  = -(M/T) p_dot - B theta_dot - (K + L T)(theta - p) - L alpha
//   c2 = J/T^2 + H/T + 1
//   s0 = -c2 (p - theta_ref) + (2J/T^2 + H/T) beta1 - (J/T^2) beta2
//   tau = sat(c1 s0 / (T c2) + d, -F, F)
//   q   = (tau - d) / c1
//
// where beta1, beta2 are the stored previous values of beta. When
// |tau| < F the sliding variable is driven exactly to zero, making the
// controller a second-order reference filter followed by a discrete PID
// with inertial feedforward; at the bound the torque saturates cleanly
// and the implicit resolution cannot chatter.
struct PsmcGains {
  Scalar M = 0.0;  // proxy inertia
  Scalar B = 0.0;  // derivative-like gain
  Scalar K = 0.0;  // proportional-like gain
  Scalar L = 0.0;  // integral-like gain
  Scalar J = 0.0;  // sliding-surface second-order gain [s^2]
  Scalar H = 0.0;  // sliding-surface first-order gain [s]
  Scalar F = 0.0;  // force (torque) limit

  void validate() const;  // throws unless every gain is > 0
};

// Critically damped default tuning for the given plant: 20 Hz position
// coupling and a 2 Hz sliding surface, force bound at the actuator
// torque limit.
PsmcGains default_psmc_gains(Scalar inertia, Scalar damping, Scalar torque_max);

struct PsmcState {
  Scalar p = 0.0;           // proxy position
  Scalar p_dot = 0.0;       // proxy velocity
  Scalar a = 0.0;           // integrator alpha, alpha_dot = theta - p
  Scalar beta1 = 0.0;       // p - theta_ref, one sample back
  Scalar beta2 = 0.0;       // p - theta_ref, two samples back
  Scalar theta_prev = 0.0;  // measured position, one sample back
  Scalar tau_prev = 0.0;    // last emitted torque, |tau_prev| <= F
};

// Fresh state with the proxy resting at theta0.
PsmcState psmc_reset(const PsmcGains& gains, Scalar theta0);

// One control sample: consumes the reference and the measured position,
// returns the commanded torque (always within [-F, F]) and advances the
// proxy state. Measured velocity is the backward difference of theta.
Scalar psmc_step(const PsmcGains& gains, PsmcState& state, Scalar theta_ref,
                 Scalar theta, Scalar T);

}  // namespace quadarm
