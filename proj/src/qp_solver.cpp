#include "quadarm/qp_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace quadarm {

Scalar qp_objective(const Eigen::Vector3d& e, Scalar w1, Scalar w2) {
  const Scalar d1 = e[1] - e[0];
  const Scalar d2 = e[2] - e[1];
  return e[0] * e[0] + w1 * d1 * d1 + w2 * d2 * d2;
}

namespace {

// The problem is solved in per-step displacement units: velocity rows are
// premultiplied by T and acceleration rows by T^2, which keeps every
// constraint normal in {-2,-1,0,1,2} and all offsets at angle scale.
struct ScaledProblem {
  // One-sided constraints a^T e <= b. The h=0 velocity and acceleration
  // rows share the normal [1,0,0]; they are pre-merged into a single
  // interval so the working set can never go rank-deficient.
  static constexpr int kMaxRows = 10;
  Eigen::Vector3d a[kMaxRows];
  Scalar b[kMaxRows];
  int opposite[kMaxRows];  // index of the other side of the same row
  int rows = 0;
  bool feasible_interval = true;

  // Sequential windows used to construct a feasible start.
  Scalar e0_lo = 0, e0_hi = 0;
  Scalar ov1 = 0, oa1 = 0, ov2 = 0, oa2 = 0;
  Scalar vlo = 0, vhi = 0, alo = 0, ahi = 0;
};

ScaledProblem build_scaled(const QpInstance& in) {
  ScaledProblem p;
  const Scalar T = in.T;
  p.vlo = T * in.vmin;
  p.vhi = T * in.vmax;
  p.alo = T * T * in.amin;
  p.ahi = T * T * in.amax;

  const Scalar ov0 = in.cmd0 - in.ref_prev1;
  const Scalar oa0 = in.cmd0 - 2.0 * in.ref_prev1 + in.ref_prev2;
  p.ov1 = in.cmd1 - in.cmd0;
  p.oa1 = in.cmd1 - 2.0 * in.cmd0 + in.ref_prev1;
  p.ov2 = in.cmd2 - in.cmd1;
  p.oa2 = in.cmd2 - 2.0 * in.cmd1 + in.cmd0;

  p.e0_lo = std::max(p.vlo - ov0, p.alo - oa0);
  p.e0_hi = std::min(p.vhi - ov0, p.ahi - oa0);
  if (p.e0_lo > p.e0_hi) {
    p.feasible_interval = false;
    return p;
  }

  auto push = [&p](Scalar ax, Scalar ay, Scalar az, Scalar b) {
    p.a[p.rows] = Eigen::Vector3d(ax, ay, az);
    p.b[p.rows] = b;
    ++p.rows;
  };
  // Rows come in (upper, lower) pairs so row r's opposite is r^1.
  push(1, 0, 0, p.e0_hi);                 // 0: e0 upper (merged v0/a0)
  push(-1, 0, 0, -p.e0_lo);               // 1: e0 lower
  push(-1, 1, 0, p.vhi - p.ov1);          // 2: v1 upper
  push(1, -1, 0, p.ov1 - p.vlo);          // 3: v1 lower
  push(-2, 1, 0, p.ahi - p.oa1);          // 4: a1 upper
  push(2, -1, 0, p.oa1 - p.alo);          // 5: a1 lower
  push(0, -1, 1, p.vhi - p.ov2);          // 6: v2 upper
  push(0, 1, -1, p.ov2 - p.vlo);          // 7: v2 lower
  push(1, -2, 1, p.ahi - p.oa2);          // 8: a2 upper
  push(-1, 2, -1, p.oa2 - p.alo);         // 9: a2 lower
  for (int r = 0; r < p.rows; ++r) p.opposite[r] = r ^ 1;
  return p;
}

Eigen::Vector3d feasible_start(const ScaledProblem& p) {
  auto window_pick = [](Scalar lo, Scalar hi) {
    if (lo > hi) return 0.5 * (lo + hi);  // fp-pinched window: midpoint
    return saturate(0.0, lo, hi);
  };
  Eigen::Vector3d e;
  e[0] = window_pick(p.e0_lo, p.e0_hi);
  const Scalar lo1 = std::max(p.vlo - p.ov1 + e[0], p.alo - p.oa1 + 2.0 * e[0]);
  const Scalar hi1 = std::min(p.vhi - p.ov1 + e[0], p.ahi - p.oa1 + 2.0 * e[0]);
  e[1] = window_pick(lo1, hi1);
  const Scalar lo2 =
      std::max(p.vlo - p.ov2 + e[1], p.alo - p.oa2 + 2.0 * e[1] - e[0]);
  const Scalar hi2 =
      std::min(p.vhi - p.ov2 + e[1], p.ahi - p.oa2 + 2.0 * e[1] - e[0]);
  e[2] = window_pick(lo2, hi2);
  return e;
}

Eigen::Matrix3d objective_hessian(Scalar w1, Scalar w2) {
  Eigen::Matrix3d H;
  H << 2.0 * (1.0 + w1), -2.0 * w1, 0.0,
      -2.0 * w1, 2.0 * (w1 + w2), -2.0 * w2,
      0.0, -2.0 * w2, 2.0 * w2;
  return H;
}

}  // namespace

Scalar qp_constraint_violation(const QpInstance& in, const Eigen::Vector3d& e) {
  const Scalar T = in.T;
  const Scalar p0 = in.cmd0 + e[0];
  const Scalar p1 = in.cmd1 + e[1];
  const Scalar p2 = in.cmd2 + e[2];
  const Scalar v[3] = {(p0 - in.ref_prev1) / T, (p1 - p0) / T, (p2 - p1) / T};
  const Scalar a[3] = {(p0 - 2.0 * in.ref_prev1 + in.ref_prev2) / (T * T),
                       (p1 - 2.0 * p0 + in.ref_prev1) / (T * T),
                       (p2 - 2.0 * p1 + p0) / (T * T)};
  Scalar worst = -kInf;
  for (int h = 0; h < 3; ++h) {
    worst = std::max(worst, v[h] - in.vmax);
    worst = std::max(worst, in.vmin - v[h]);
    worst = std::max(worst, a[h] - in.amax);
    worst = std::max(worst, in.amin - a[h]);
  }
  return worst;
}

QpSolution solve_qp(const QpInstance& inst) {
  QpSolution sol;
  const ScaledProblem p = build_scaled(inst);
  if (!p.feasible_interval) {
    sol.feasible = false;
    return sol;
  }
  sol.feasible = true;

  const Scalar scale = std::max({1.0, std::abs(p.e0_lo), std::abs(p.e0_hi),
                                 std::abs(p.b[2]), std::abs(p.b[4])});
  const Scalar feas_eps = 1e-12 * scale;

  auto is_feasible = [&](const Eigen::Vector3d& e) {
    for (int r = 0; r < p.rows; ++r) {
      if (p.a[r].dot(e) > p.b[r] + feas_eps) return false;
    }
    return true;
  };

  // Fast path: the unconstrained optimum. Returning the exact zero vector
  // keeps feasible pass-through bit-identical to the raw command.
  if (is_feasible(Eigen::Vector3d::Zero())) {
    sol.e.setZero();
    sol.objective = 0.0;
    return sol;
  }

  const Eigen::Matrix3d H = objective_hessian(inst.w1, inst.w2);
  // Tiny Tikhonov term so the working-set solves stay nonsingular when
  // w1/w2 are zero; it perturbs the minimizer far below reported tolerances.
  const Eigen::Matrix3d Hs = H + 1e-13 * Eigen::Matrix3d::Identity();

  Eigen::Vector3d x = feasible_start(p);
  int W[3];
  int nW = 0;

  for (int iter = 1; iter <= 100; ++iter) {
    sol.iterations = iter;

    // Equality-constrained candidate on the working set.
    Eigen::Matrix<Scalar, 6, 6> K = Eigen::Matrix<Scalar, 6, 6>::Zero();
    Eigen::Matrix<Scalar, 6, 1> rhs = Eigen::Matrix<Scalar, 6, 1>::Zero();
    const int n = 3 + nW;
    K.topLeftCorner(3, 3) = Hs;
    for (int i = 0; i < nW; ++i) {
      K.block(3 + i, 0, 1, 3) = p.a[W[i]].transpose();
      K.block(0, 3 + i, 3, 1) = p.a[W[i]];
      rhs[3 + i] = p.b[W[i]];
    }
    Eigen::Matrix<Scalar, 6, 1> y = Eigen::Matrix<Scalar, 6, 1>::Zero();
    y.head(n) = K.topLeftCorner(n, n).fullPivLu().solve(rhs.head(n));
    const Eigen::Vector3d cand = y.head(3);

    const Eigen::Vector3d d = cand - x;
    if (d.norm() <= 1e-13 * scale) {
      // At the working-set minimizer: check multipliers.
      if (nW == 0) break;
      int drop = -1;
      Scalar most_negative = -1e-10;
      for (int i = 0; i < nW; ++i) {
        const Scalar lambda = y[3 + i];
        if (lambda < most_negative) {
          most_negative = lambda;
          drop = i;
        }
      }
      if (drop < 0) break;  // KKT satisfied
      for (int i = drop; i + 1 < nW; ++i) W[i] = W[i + 1];
      --nW;
      continue;
    }

    // Step toward the candidate, stopping at the first blocking row.
    Scalar alpha = 1.0;
    int blocker = -1;
    for (int r = 0; r < p.rows; ++r) {
      bool in_w = false;
      for (int i = 0; i < nW; ++i) in_w |= (W[i] == r);
      if (in_w) continue;
      const Scalar ad = p.a[r].dot(d);
      if (ad <= 1e-14 * scale) continue;
      const Scalar room = p.b[r] - p.a[r].dot(x);
      const Scalar ar = std::max(room, 0.0) / ad;
      if (ar < alpha - 1e-15) {
        alpha = ar;
        blocker = r;
      }
    }
    x += alpha * d;
    if (blocker < 0) {
      x = cand;  // full step, candidate reached
      continue;  // loop re-solves and checks multipliers
    }
    if (nW < 3) {
      W[nW++] = blocker;
    } else {
      break;  // cannot happen with independent normals; bail out safely
    }
  }

  sol.e = x;
  sol.objective = qp_objective(x, inst.w1, inst.w2);
  return sol;
}

}  // namespace quadarm
