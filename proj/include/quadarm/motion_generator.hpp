#pragma once

#include <array>
#include <utility>
#include <vector>

#include "quadarm/robot_model.hpp"
#include "quadarm/types.hpp"

namespace quadarm {

// Step-held velocity profile: value at time t is the sample with the
// largest t_i <= t (the first sample before that, zero when empty).
struct VelocityProfile {
  std::vector<std::pair<Scalar, Scalar>> samples;  // (t_i, v_i), sorted by t_i

  static VelocityProfile constant(Scalar v) { return {{{0.0, v}}}; }
  Scalar at(Scalar t) const;
  Scalar max_abs() const;
  void validate() const;  // strictly increasing times
};

struct GaitParams {
  VelocityProfile v;              // desired moving velocity [m/s]
  Scalar f_w = 0.5;               // walking frequency [Hz]
  Scalar h = 0.04;                // swing height [m]
  Vec3 stance2{-0.15, 0.12, -0.30};   // nominal arm-2 foot position, torso frame
  Vec3 stance3{-0.15, -0.12, -0.30};  // nominal arm-3 foot position
  Scalar v_cap = kInf;            // velocity magnitude cap (config supplied)

  void validate() const;
};

// Phase decomposition of the walking cycle: step period T_s = 1/(2 f_w),
// phase delta = t mod 2 T_s. Arm 2 supports during the first half-cycle
// (arm 3 swings) and they trade roles for the second half.
struct GaitPhase {
  Scalar T_s = 0.0;
  Scalar delta = 0.0;
  int support_arm = 2;  // 2 or 3
};

GaitPhase gait_phase(Scalar t, Scalar f_w);

// Active-wheel angular velocity that rolls the base at v: 2 v / d.
Scalar wheel_velocity_command(Scalar v, Scalar wheel_diameter);

struct GaitTargets {
  Vec3 arm2;         // commanded foot position, torso frame
  Vec3 arm3;
  Scalar v_latched;  // stride velocity held for the current cycle
};

// Stateful foot-trajectory generator. The commanded velocity is sampled
// from the profile at each cycle start and held for the whole 2 T_s
// cycle, which keeps the stride length well defined for time-varying
// profiles. Within a half-cycle the swing foot advances sinusoidally by
// T_s * v with apex height h at mid-swing while the stance foot
// translates backward at -v; per-foot anchors carry positions across
// half-cycle boundaries, so the emitted targets are continuous. A zero
// latched velocity freezes both feet (no idle stepping).
class GaitGenerator {
 public:
  explicit GaitGenerator(const GaitParams& params);

  // Sample commanded foot positions at time t >= 0. Calls must use
  // nondecreasing t sampled at least twice per half-cycle.
  GaitTargets targets(Scalar t);

 private:
  void advance_to(long half_index);

  GaitParams params_;
  Scalar anchor2_ = 0.0;  // foot x at the start of the current half-cycle
  Scalar anchor3_ = 0.0;
  Scalar v_latch_ = 0.0;
  long half_index_ = -1;
};

// Keyframe scripts ---------------------------------------------------

struct Keyframe {
  Scalar t = 0.0;
  std::array<Vec3, kNumArms> targets{};  // per-arm positions, torso frame
};

// Quintic time-scaling blend: s(0) = 0, s(1) = 1, zero velocity and
// acceleration at both ends.
Scalar quintic_blend(Scalar u);

struct KeyframeSequence {
  std::vector<Keyframe> frames;

  void validate() const;  // nonempty, first at t = 0, strictly increasing
  Scalar duration() const;
  // Piecewise quintic interpolation, clamped to the end frames.
  std::array<Vec3, kNumArms> sample(Scalar t) const;
};

// Whole-body configurations and the scripts that morph between them.
enum class Mode { kWalking, kDriving, kDrivingGrasp, kStanding };

const char* mode_name(Mode mode);

// Nominal per-arm end-effector targets of a configuration, torso frame.
std::array<Vec3, kNumArms> mode_pose(Mode mode);

// Script that morphs from one configuration to another. Scripted pairs
// carry their published timings (walking->driving 5 s, driving->grasp
// 10 s with via points, walking->standing 8 s, standing->walking 4 s);
// the reverse of a scripted pair plays it backwards; a same-mode request
// is a single zero-motion keyframe; any other pair chains scripted legs
// through intermediate modes so the arms stay on workspace-safe paths.
KeyframeSequence mode_keyframes(Mode to, Mode from);

// Same, entering from the mode's canonical predecessor (driving and
// standing from walking, grasp from driving, walking from itself).
KeyframeSequence mode_keyframes(Mode to);

}  // namespace quadarm
