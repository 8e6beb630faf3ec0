#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadarm/types.hpp"

namespace quadarm {

// Per-joint motion envelope. Angles rad, speed rad/s, accel rad/s^2,
// torque N*m. Velocity bound is symmetric (+-speed_max); continuous
// joints (the wheel) use +-inf angle bounds.
struct JointLimits {
  Scalar angle_min = -kInf;
  Scalar angle_max = kInf;
  Scalar speed_max = 0.0;
  Scalar accel_min = -200.0;
  Scalar accel_max = 200.0;
  Scalar torque_max = 0.0;

  void validate(const std::string& name) const;
};

// Serial position chain: joint i rotates about joint_axes[i] (unit vector,
// parent frame), followed by the rigid offset link_offsets[i]. base maps
// chain coordinates into the torso frame.
struct KinematicChain {
  std::vector<Vec3> joint_axes;
  std::vector<Vec3> link_offsets;
  Isometry base = Isometry::Identity();

  int dof() const { return static_cast<int>(joint_axes.size()); }
  Scalar total_reach() const;
  void validate(const std::string& name) const;
};

struct WheelParams {
  Scalar diameter = 0.10;           // m
  Scalar passive_baseline = 0.30;   // m, spacing of the passive wheel pair
};

inline constexpr int kNumArms = 4;
inline constexpr int kNumArmJoints = 11;  // 3 + 3 + 3 + 2
inline constexpr int kNumJoints = 12;     // arm joints + wheel
inline constexpr int kWheelJoint = 11;    // flat index of the wheel

struct RobotModel {
  std::array<KinematicChain, kNumArms> arms;
  std::array<JointLimits, kNumJoints> limits;  // flat order, wheel last
  WheelParams wheel;

  void validate() const;
};

// Flat joint indexing: arm1 joints 0..2, arm2 3..5, arm3 6..8,
// arm4 9..10, wheel 11.
int joint_index(int arm, int joint_in_arm);
int arm_joint_base(int arm);
const std::string& joint_name(int flat_index);
// Parses "arm3_joint2" / "wheel" into a flat index; -1 if unknown.
int joint_index_by_name(const std::string& name);

// End-effector position in the torso frame.
Vec3 forward_kinematics(const KinematicChain& chain, const VecX& angles);

// FK with per-joint world axes and origins (for Jacobians).
struct FkTrace {
  Vec3 ee;
  std::vector<Vec3> joint_origins;
  std::vector<Vec3> joint_axes_world;
};
FkTrace forward_kinematics_trace(const KinematicChain& chain, const VecX& angles);

struct IkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Target outside the reachable workspace (workspace = FK image of the
// joint-limit box; limit-blocked targets are unreachable).
struct IkUnreachable : IkError {
  using IkError::IkError;
};
// Iteration cap hit without meeting the residual tolerance.
struct IkNoConvergence : IkError {
  using IkError::IkError;
};

struct IkOptions {
  int max_iterations = 200;
  Scalar damping = 1e-3;
  Scalar tolerance = 1e-10;   // internal convergence target
  Scalar residual_limit = 1e-8;  // hard acceptance bound on the result
};

// Closed form for 2-dof parallel-axis chains, damped least squares with
// joint-limit projection and deterministic restarts otherwise. The result
// always satisfies the angle limits and FK(result) is within
// options.residual_limit of the target, or an IkError is thrown.
VecX inverse_kinematics(const KinematicChain& chain, const Vec3& target,
                        const VecX& seed, const std::vector<JointLimits>& limits,
                        const IkOptions& options = {});

bool check_limits(const VecX& angles, const std::vector<JointLimits>& limits);

// Built-in model: plausible geometry, Table-style limit defaults.
RobotModel default_robot_model();

// Defaults for each flat joint index (angle bounds deg->rad already applied).
JointLimits default_joint_limits(int flat_index);

}  // namespace quadarm
