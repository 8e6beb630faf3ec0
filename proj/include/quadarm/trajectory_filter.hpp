#pragma once

#include <array>

#include "quadarm/qp_solver.hpp"
#include "quadarm/robot_model.hpp"
#include "quadarm/types.hpp"

namespace quadarm {

// Online reference modifier for one joint. Each call to filter_step takes
// the newest raw command and emits a reference that satisfies the joint's
// angle, velocity and acceleration envelope by construction. The emitted
// stream is the command delayed by exactly two samples whenever the raw
// command already satisfies all constraints.
struct FilterState {
  JointLimits limits;
  Scalar T = 0.0;
  Scalar w1 = 1.0;
  Scalar w2 = 1.0;
  Scalar ref_prev1 = 0.0;          // stored reference at k-1
  Scalar ref_prev2 = 0.0;          // stored reference at k-2
  std::array<Scalar, 3> cmd{};     // raw commands at k-2, k-1, k
  long steps = 0;
  bool last_infeasible = false;    // most recent step hit the QP fallback
  long infeasible_count = 0;
};

FilterState make_filter_state(const JointLimits& limits, Scalar T,
                              Scalar w1 = 1.0, Scalar w2 = 1.0);

// QP stage: builds the receding-horizon instance from the state (the
// current command must already be pushed into state.cmd) and returns the
// candidate reference phi_ref_k = cmd[0] + e_k.
struct QpModifyResult {
  Scalar phi_ref = 0.0;
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  bool infeasible = false;
};
QpModifyResult qp_modify(const FilterState& state);

// Number of future samples until the braking velocity crosses zero,
// assuming one sample at the speed-up extreme acceleration followed by
// max braking: min { l >= 0 : v*(v + T*a_up + (l-1)*T*a_brake) <= 0 }.
long deceleration_horizon(Scalar vel, const JointLimits& limits, Scalar T);

// Position after L samples of the braking profile above, from state
// Phi = (angle, velocity), via the double-integrator transition
// A = [[1,T],[0,1]], B = [0,T]^T, C = [1,0].
Scalar predict_peak(const Vec2& phi, long L, const JointLimits& limits, Scalar T);

// Angle guard: passes phi_ref through when the predicted braking peak
// stays inside the angle bounds, otherwise emits one sample of the
// maximum-deceleration stop trajectory.
Scalar angle_guard(const FilterState& state, Scalar phi_ref, Scalar phi_dot_ref);

// Full per-sample pipeline: push command, QP stage (with the max-brake
// fallback on infeasibility), angle guard, emission polish, history update.
Scalar filter_step(FilterState& state, Scalar cmd);

}  // namespace quadarm
