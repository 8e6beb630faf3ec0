#include "quadarm/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace quadarm {

namespace {

Scalar wrap_pi(Scalar a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

const std::vector<std::string>& joint_names() {
  static const std::vector<std::string> names = {
      "arm1_joint1", "arm1_joint2", "arm1_joint3",
      "arm2_joint1", "arm2_joint2", "arm2_joint3",
      "arm3_joint1", "arm3_joint2", "arm3_joint3",
      "arm4_joint1", "arm4_joint2",
      "wheel"};
  return names;
}

constexpr int kArmDof[kNumArms] = {3, 3, 3, 2};
constexpr int kArmBase[kNumArms] = {0, 3, 6, 9};

}  // namespace

void JointLimits::validate(const std::string& name) const {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("joint limits for " + name + ": " + what);
  };
  if (!(angle_min < angle_max)) fail("angle_min must be < angle_max");
  if (!(speed_max > 0)) fail("speed_max must be > 0");
  if (!(accel_min < 0)) fail("accel_min must be < 0");
  if (!(accel_max > 0)) fail("accel_max must be > 0");
  if (!(torque_max > 0)) fail("torque_max must be > 0");
}

Scalar KinematicChain::total_reach() const {
  Scalar sum = 0;
  for (const auto& o : link_offsets) sum += o.norm();
  return sum;
}

void KinematicChain::validate(const std::string& name) const {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("chain " + name + ": " + what);
  };
  if (joint_axes.size() != link_offsets.size()) fail("axes/offsets size mismatch");
  if (dof() != 2 && dof() != 3) fail("dof must be 2 or 3");
  for (const auto& a : joint_axes) {
    if (std::abs(a.norm() - 1.0) > 1e-9) fail("joint axis must be a unit vector");
  }
}

void RobotModel::validate() const {
  for (int i = 0; i < kNumArms; ++i) {
    arms[i].validate("arm" + std::to_string(i + 1));
    if (arms[i].dof() != kArmDof[i]) {
      throw std::invalid_argument("arm" + std::to_string(i + 1) + " must have " +
                                  std::to_string(kArmDof[i]) + " joints");
    }
  }
  for (int j = 0; j < kNumJoints; ++j) limits[j].validate(joint_name(j));
  if (!(wheel.diameter > 0)) throw std::invalid_argument("wheel diameter must be > 0");
  if (!(wheel.passive_baseline > 0)) {
    throw std::invalid_argument("passive wheel baseline must be > 0");
  }
}

int joint_index(int arm, int joint_in_arm) {
  if (arm < 0 || arm >= kNumArms || joint_in_arm < 0 || joint_in_arm >= kArmDof[arm]) {
    throw std::out_of_range("joint_index: arm/joint out of range");
  }
  return kArmBase[arm] + joint_in_arm;
}

int arm_joint_base(int arm) {
  if (arm < 0 || arm >= kNumArms) throw std::out_of_range("arm_joint_base");
  return kArmBase[arm];
}

const std::string& joint_name(int flat_index) {
  return joint_names().at(static_cast<size_t>(flat_index));
}

int joint_index_by_name(const std::string& name) {
  const auto& names = joint_names();
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Vec3 forward_kinematics(const KinematicChain& chain, const VecX& angles) {
  if (angles.size() != chain.dof()) {
    throw std::invalid_argument("forward_kinematics: angle count != chain dof");
  }
  Vec3 p = Vec3::Zero();
  for (int i = chain.dof() - 1; i >= 0; --i) {
    p = Eigen::AngleAxis<Scalar>(angles[i], chain.joint_axes[i]) *
        (chain.link_offsets[i] + p);
  }
  return chain.base * p;
}

FkTrace forward_kinematics_trace(const KinematicChain& chain, const VecX& angles) {
  if (angles.size() != chain.dof()) {
    throw std::invalid_argument("forward_kinematics_trace: angle count != chain dof");
  }
  FkTrace out;
  Isometry T = chain.base;
  for (int i = 0; i < chain.dof(); ++i) {
    out.joint_origins.push_back(T.translation());
    out.joint_axes_world.push_back(T.linear() * chain.joint_axes[i]);
    T = T * Eigen::AngleAxis<Scalar>(angles[i], chain.joint_axes[i]);
    T = T * Eigen::Translation<Scalar, 3>(chain.link_offsets[i]);
  }
  out.ee = T.translation();
  return out;
}

bool check_limits(const VecX& angles, const std::vector<JointLimits>& limits) {
  if (static_cast<size_t>(angles.size()) != limits.size()) {
    throw std::invalid_argument("check_limits: angle count != limits count");
  }
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    if (angles[i] < limits[i].angle_min || angles[i] > limits[i].angle_max) {
      return false;
    }
  }
  return true;
}

namespace {

VecX clamp_to_limits(VecX q, const std::vector<JointLimits>& limits) {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    q[i] = saturate(q[i], limits[i].angle_min, limits[i].angle_max);
  }
  return q;
}

// Damped least squares with joint-limit projection. Returns true on
// convergence (q updated in place to the solution).
bool dls_solve(const KinematicChain& chain, const Vec3& target, VecX& q,
               const std::vector<JointLimits>& limits, const IkOptions& opt) {
  const int n = chain.dof();
  const Scalar lambda2 = opt.damping * opt.damping;
  Scalar prev_err = kInf;
  int stall = 0;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    FkTrace tr = forward_kinematics_trace(chain, q);
    Vec3 r = target - tr.ee;
    Scalar err = r.norm();
    if (err <= opt.tolerance) return true;
    if (err > prev_err - 1e-14) {
      if (++stall > 12) return err <= opt.residual_limit;
    } else {
      stall = 0;
    }
    prev_err = std::min(prev_err, err);

    MatX J(3, n);
    for (int i = 0; i < n; ++i) {
      J.col(i) = tr.joint_axes_world[i].cross(tr.ee - tr.joint_origins[i]);
    }
    Mat3 A = J * J.transpose() + lambda2 * Mat3::Identity();
    VecX dq = J.transpose() * A.ldlt().solve(r);
    Scalar step = dq.norm();
    if (step > 0.5) dq *= 0.5 / step;
    q = clamp_to_limits(q + dq, limits);
  }
  return forward_kinematics_trace(chain, q).ee.isApprox(target, 0) ||
         (target - forward_kinematics_trace(chain, q).ee).norm() <= opt.residual_limit;
}

// Deterministic restart seeds spanning the limit box.
std::vector<VecX> restart_seeds(const VecX& seed, const std::vector<JointLimits>& limits) {
  const int n = static_cast<int>(limits.size());
  auto boxed = [&](Scalar frac_i, Scalar frac_j, Scalar frac_k) {
    VecX q(n);
    const Scalar fr[3] = {frac_i, frac_j, frac_k};
    for (int i = 0; i < n; ++i) {
      Scalar lo = std::max(limits[i].angle_min, -kPi);
      Scalar hi = std::min(limits[i].angle_max, kPi);
      q[i] = lo + fr[i % 3] * (hi - lo);
    }
    return q;
  };
  std::vector<VecX> seeds;
  seeds.push_back(seed);
  seeds.push_back(boxed(0.5, 0.5, 0.5));
  seeds.push_back(boxed(0.25, 0.75, 0.5));
  seeds.push_back(boxed(0.75, 0.25, 0.5));
  seeds.push_back(boxed(0.35, 0.65, 0.25));
  seeds.push_back(boxed(0.65, 0.35, 0.75));
  seeds.push_back(boxed(0.15, 0.5, 0.85));
  seeds.push_back(boxed(0.85, 0.5, 0.15));
  return seeds;
}

// Closed form for a 2-dof chain whose axes are parallel. Both elbow
// branches are formed; in-limit branches are ranked by distance to the
// seed. Returns false if neither branch passes limits + residual.
bool planar_2r_solve(const KinematicChain& chain, const Vec3& target, VecX& q_out,
                     const VecX& seed, const std::vector<JointLimits>& limits,
                     const IkOptions& opt) {
  using Cplx = std::complex<Scalar>;
  const Vec3 n = chain.joint_axes[0];
  const Vec3 tl = chain.base.inverse() * target;

  // Components along the common axis are rotation-invariant.
  const Scalar off_n = n.dot(chain.link_offsets[0] + chain.link_offsets[1]);
  if (std::abs(n.dot(tl) - off_n) > 1e-6) {
    throw IkUnreachable("target off the reachable plane of a planar 2-dof chain");
  }

  // Right-handed in-plane basis (u, v) with u x v = n.
  Vec3 ref = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (ref - ref.dot(n) * n).normalized();
  const Vec3 v = n.cross(u);
  auto to_plane = [&](const Vec3& w) { return Cplx(u.dot(w), v.dot(w)); };

  const Cplx w1 = to_plane(chain.link_offsets[0]);
  const Cplx w2 = to_plane(chain.link_offsets[1]);
  const Cplx t = to_plane(tl - n.dot(tl) * n);
  const Scalar l1 = std::abs(w1), l2 = std::abs(w2), r = std::abs(t);
  if (l1 < 1e-12 || l2 < 1e-12) return false;  // degenerate, let DLS handle it

  Scalar c = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c > 1.0 + 1e-9 || c < -1.0 - 1e-9) {
    throw IkUnreachable("target outside the 2-dof annulus");
  }
  c = saturate(c, -1.0, 1.0);
  const Scalar gamma = std::acos(c);
  const Scalar phi1 = std::arg(w1), phi2 = std::arg(w2);

  struct Branch {
    VecX q;
    Scalar dist;
  };
  std::vector<Branch> ok;
  for (Scalar sign : {+1.0, -1.0}) {
    const Scalar q2 = wrap_pi(phi1 - phi2 + sign * gamma);
    const Cplx inner = w1 + std::polar(1.0, q2) * w2;
    if (std::abs(inner) < 1e-12) continue;
    const Scalar q1 = wrap_pi(std::arg(t) - std::arg(inner));
    VecX q(2);
    q << q1, q2;
    bool in_limits = true;
    for (int i = 0; i < 2; ++i) {
      if (q[i] < limits[i].angle_min - 1e-12 || q[i] > limits[i].angle_max + 1e-12) {
        in_limits = false;
      }
    }
    if (!in_limits) continue;
    q = clamp_to_limits(q, limits);
    if ((forward_kinematics(chain, q) - target).norm() > opt.residual_limit) continue;
    ok.push_back({q, (q - seed).norm()});
  }
  if (ok.empty()) return false;
  std::stable_sort(ok.begin(), ok.end(),
                   [](const Branch& a, const Branch& b) { return a.dist < b.dist; });
  q_out = ok.front().q;
  return true;
}

// 3-dof chain whose distal axis pair is parallel: the component of the
// shoulder-relative target along the distal axis direction is invariant
// under the distal joints, which pins the shoulder angle to at most two
// values; the rest is the planar 2R subproblem. When the shoulder axis is
// itself parallel to the pair the chain is planar-redundant and a
// deterministic shoulder grid (seed angle first) covers the null space.
// Candidates are ranked by distance to the seed.
bool analytic_3dof_solve(const KinematicChain& chain, const Vec3& target,
                         VecX& q_out, const VecX& seed,
                         const std::vector<JointLimits>& limits,
                         const IkOptions& opt) {
  const Vec3 a = chain.joint_axes[0];
  const Vec3 n = chain.joint_axes[1];
  const Vec3 t = chain.base.inverse() * target;
  const Vec3& off0 = chain.link_offsets[0];

  KinematicChain sub;
  sub.joint_axes = {chain.joint_axes[1], chain.joint_axes[2]};
  sub.link_offsets = {chain.link_offsets[1], chain.link_offsets[2]};
  const std::vector<JointLimits> sub_limits = {limits[1], limits[2]};

  // n . (R0(q1)^T t) = A cos q1 + B sin q1 + C (Rodrigues split).
  const Scalar A = n.dot(t) - n.dot(a) * a.dot(t);
  const Scalar B = -n.dot(a.cross(t));
  const Scalar C = n.dot(a) * a.dot(t);
  const Scalar rhs =
      n.dot(off0) + n.dot(sub.link_offsets[0] + sub.link_offsets[1]);

  std::vector<Scalar> q1s;
  auto push_q1 = [&](Scalar q1) {
    for (Scalar cand : {q1, q1 + 2.0 * kPi, q1 - 2.0 * kPi}) {
      if (cand >= limits[0].angle_min - 1e-12 &&
          cand <= limits[0].angle_max + 1e-12) {
        q1s.push_back(saturate(cand, limits[0].angle_min, limits[0].angle_max));
      }
    }
  };
  const Scalar amp = std::hypot(A, B);
  const bool redundant = amp < 1e-12;
  if (redundant) {
    if (std::abs(rhs - C) > 1e-6) return false;  // plane out of reach
    push_q1(saturate(seed[0], limits[0].angle_min, limits[0].angle_max));
    constexpr int kGrid = 128;
    for (int i = 0; i <= kGrid; ++i) {
      q1s.push_back(limits[0].angle_min +
                    (limits[0].angle_max - limits[0].angle_min) *
                        static_cast<Scalar>(i) / kGrid);
    }
  } else {
    const Scalar c = (rhs - C) / amp;
    if (std::abs(c) > 1.0 + 1e-9) return false;  // plane out of reach
    const Scalar psi = std::atan2(B, A);
    const Scalar delta = std::acos(saturate(c, -1.0, 1.0));
    push_q1(wrap_pi(psi + delta));
    push_q1(wrap_pi(psi - delta));
  }

  struct Candidate {
    VecX q;
    Scalar dist;
  };
  std::vector<Candidate> ok;
  for (std::size_t i = 0; i < q1s.size(); ++i) {
    const Scalar q1 = q1s[i];
    const Vec3 w = Eigen::AngleAxis<Scalar>(-q1, a) * t - off0;
    VecX q23(2);
    VecX sub_seed(2);
    sub_seed << seed[1], seed[2];
    try {
      if (!planar_2r_solve(sub, w, q23, sub_seed, sub_limits, opt)) continue;
    } catch (const IkError&) {
      continue;  // this shoulder angle misses the subchain annulus
    }
    VecX q(3);
    q << q1, q23[0], q23[1];
    if ((forward_kinematics(chain, q) - target).norm() > opt.residual_limit) {
      continue;
    }
    if (!check_limits(q, limits)) continue;
    ok.push_back({q, (q - seed).norm()});
    // In the redundant case the first candidate is the seed's own
    // shoulder angle; a nearby hit there is the continuity-preserving
    // branch and the grid scan can stop.
    if (redundant && i == 0 && ok.back().dist < 0.1) break;
  }
  if (ok.empty()) return false;
  std::stable_sort(ok.begin(), ok.end(), [](const Candidate& x, const Candidate& y) {
    return x.dist < y.dist;
  });
  q_out = ok.front().q;
  return true;
}

}  // namespace

VecX inverse_kinematics(const KinematicChain& chain, const Vec3& target,
                        const VecX& seed, const std::vector<JointLimits>& limits,
                        const IkOptions& options) {
  const int n = chain.dof();
  if (seed.size() != n) {
    throw std::invalid_argument("inverse_kinematics: seed size != chain dof");
  }
  if (static_cast<int>(limits.size()) != n) {
    throw std::invalid_argument("inverse_kinematics: limits count != chain dof");
  }

  const Vec3 local = chain.base.inverse() * target;
  if (local.norm() > chain.total_reach() - 1e-9) {
    throw IkUnreachable("target beyond total chain length");
  }

  if (n == 2 && chain.joint_axes[0].cross(chain.joint_axes[1]).norm() < 1e-12) {
    VecX q(2);
    if (planar_2r_solve(chain, target, q, seed, limits, options)) return q;
    throw IkUnreachable("no in-limit closed-form solution for 2-dof chain");
  }

  if (n == 3 && chain.joint_axes[1].cross(chain.joint_axes[2]).norm() < 1e-12) {
    VecX q(3);
    if (analytic_3dof_solve(chain, target, q, clamp_to_limits(seed, limits),
                            limits, options)) {
      return q;
    }
    // No analytic branch fits the limits; fall through to the iterative
    // solver before declaring the target unreachable.
  }

  for (const VecX& s : restart_seeds(seed, limits)) {
    VecX q = clamp_to_limits(s, limits);
    if (dls_solve(chain, target, q, limits, options)) {
      if ((forward_kinematics(chain, q) - target).norm() <= options.residual_limit &&
          check_limits(q, limits)) {
        return q;
      }
    }
  }
  throw IkNoConvergence("damped least squares did not converge to the target");
}

JointLimits default_joint_limits(int flat_index) {
  auto deg = [](Scalar lo, Scalar hi, Scalar speed, Scalar torque) {
    JointLimits l;
    l.angle_min = deg2rad(lo);
    l.angle_max = deg2rad(hi);
    l.speed_max = speed;
    l.torque_max = torque;
    return l;
  };
  switch (flat_index) {
    case 0: return deg(-100, 100, 14.97, 20.8);
    case 1: return deg(-120, 120, 14.97, 20.8);
    case 2: return deg(-90, 100, 14.97, 20.8);
    case 3: return deg(-90, 30, 14.97, 20.8);
    case 4: return deg(-110, 110, 14.97, 10.6);
    case 5: return deg(-120, 120, 14.97, 10.6);
    case 6: return deg(-30, 90, 14.97, 20.8);
    case 7: return deg(-110, 110, 14.97, 10.6);
    case 8: return deg(-120, 120, 14.97, 10.6);
    case 9: return deg(-180, 180, 14.97, 10.6);
    case 10: return deg(-115, 115, 14.97, 10.6);
    case 11: {
      JointLimits l;  // continuous wheel
      l.angle_min = -kInf;
      l.angle_max = kInf;
      l.speed_max = 62.83;
      l.torque_max = 20.1;
      return l;
    }
    default: throw std::out_of_range("default_joint_limits");
  }
}

RobotModel default_robot_model() {
  RobotModel m;
  auto make_base = [](Scalar x, Scalar y, Scalar z) {
    Isometry T = Isometry::Identity();
    T.translation() = Vec3(x, y, z);
    return T;
  };

  // Arm 1: front leg carrying the drive wheel, sagittal pitch chain.
  m.arms[0].joint_axes = {Vec3::UnitY(), Vec3::UnitY(), Vec3::UnitY()};
  m.arms[0].link_offsets = {Vec3(0, 0, -0.05), Vec3(0, 0, -0.16), Vec3(0, 0, -0.14)};
  m.arms[0].base = make_base(0.18, 0.0, 0.0);

  // Arms 2/3: rear legs, yaw shoulder + two pitch joints.
  m.arms[1].joint_axes = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitY()};
  m.arms[1].link_offsets = {Vec3(0, 0, -0.06), Vec3(0, 0, -0.18), Vec3(0, 0, -0.16)};
  m.arms[1].base = make_base(-0.20, 0.12, 0.0);

  m.arms[2].joint_axes = m.arms[1].joint_axes;
  m.arms[2].link_offsets = m.arms[1].link_offsets;
  m.arms[2].base = make_base(-0.20, -0.12, 0.0);

  // Arm 4: upper manipulation arm, planar pitch pair.
  m.arms[3].joint_axes = {Vec3::UnitY(), Vec3::UnitY()};
  m.arms[3].link_offsets = {Vec3(0.15, 0, 0), Vec3(0.14, 0, 0)};
  m.arms[3].base = make_base(0.10, 0.0, 0.12);

  for (int j = 0; j < kNumJoints; ++j) m.limits[j] = default_joint_limits(j);
  m.wheel.diameter = 0.10;
  m.wheel.passive_baseline = 0.30;
  m.validate();
  return m;
}

}  // namespace quadarm
