#pragma once

#include <Eigen/Core>

#include "quadarm/types.hpp"

namespace quadarm {

// One step of the receding-horizon reference modification, posed over the
// three command corrections (e_k, e_k+1, e_k+2):
//
//   minimize  e_k^2 + w1*(e_k+1 - e_k)^2 + w2*(e_k+2 - e_k+1)^2
//   subject to, for h = 0,1,2 with phi_k+h = cmd_h + e_k+h and history
//   phi_k-1 = ref_prev1, phi_k-2 = ref_prev2:
//     vmin <= (phi_k+h - phi_k+h-1)/T               <= vmax
//     amin <= (phi_k+h - 2 phi_k+h-1 + phi_k+h-2)/T^2 <= amax
//
// The weighted-rate objective is identical in scaled units because the T^2
// factor on the rate terms cancels against the backward difference.
struct QpInstance {
  Scalar w1 = 1.0;
  Scalar w2 = 1.0;
  Scalar T = 0.0;
  Scalar cmd0 = 0.0;  // theta_cmd at k-2 (the delayed command applied now)
  Scalar cmd1 = 0.0;  // theta_cmd at k-1
  Scalar cmd2 = 0.0;  // theta_cmd at k
  Scalar ref_prev1 = 0.0;
  Scalar ref_prev2 = 0.0;
  Scalar vmin = 0.0, vmax = 0.0;
  Scalar amin = 0.0, amax = 0.0;
};

struct QpSolution {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  Scalar objective = 0.0;
  bool feasible = false;
  int iterations = 0;
};

Scalar qp_objective(const Eigen::Vector3d& e, Scalar w1, Scalar w2);

// Primal active-set solver specialized to the 3-variable problem above.
// Deterministic: fixed tie-breaking, no randomization. feasible == false
// means the constraint set is empty (possible only when the history pair
// already violates the velocity/acceleration envelope).
QpSolution solve_qp(const QpInstance& inst);

// Worst signed violation of the instance constraints at e, measured in
// natural units (rad/s for velocity rows, rad/s^2 for acceleration rows).
// <= 0 means feasible.
Scalar qp_constraint_violation(const QpInstance& inst, const Eigen::Vector3d& e);

}  // namespace quadarm
