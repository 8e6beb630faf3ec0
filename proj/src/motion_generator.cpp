#include "quadarm/motion_generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadarm {

Scalar VelocityProfile::at(Scalar t) const {
  if (samples.empty()) return 0.0;
  Scalar value = samples.front().second;
  for (const auto& [ti, vi] : samples) {
    if (ti > t) break;
    value = vi;
  }
  return value;
}

Scalar VelocityProfile::max_abs() const {
  Scalar m = 0.0;
  for (const auto& [ti, vi] : samples) m = std::max(m, std::abs(vi));
  return m;
}

void VelocityProfile::validate() const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].first > samples[i - 1].first)) {
      throw std::invalid_argument("velocity profile: times must be strictly increasing");
    }
  }
}

void GaitParams::validate() const {
  if (!(f_w > 0)) throw std::invalid_argument("gait: f_w must be > 0");
  if (!(h > 0)) throw std::invalid_argument("gait: h must be > 0");
  v.validate();
  if (v.max_abs() > v_cap) {
    throw std::invalid_argument("gait: |v| exceeds the velocity cap");
  }
}

GaitPhase gait_phase(Scalar t, Scalar f_w) {
  if (!(f_w > 0)) throw std::invalid_argument("gait_phase: f_w must be > 0");
  if (t < 0) throw std::invalid_argument("gait_phase: t must be >= 0");
  GaitPhase p;
  p.T_s = 1.0 / (2.0 * f_w);
  p.delta = std::fmod(t, 2.0 * p.T_s);
  p.support_arm = p.delta < p.T_s ? 2 : 3;
  return p;
}

Scalar wheel_velocity_command(Scalar v, Scalar wheel_diameter) {
  if (!(wheel_diameter > 0)) {
    throw std::invalid_argument("wheel command: diameter must be > 0");
  }
  return 2.0 * v / wheel_diameter;
}

GaitGenerator::GaitGenerator(const GaitParams& params) : params_(params) {
  params_.validate();
}

void GaitGenerator::advance_to(long half_index) {
  const Scalar T_s = 1.0 / (2.0 * params_.f_w);
  if (half_index_ < 0) {
    anchor2_ = params_.stance2.x();
    anchor3_ = params_.stance3.x();
    v_latch_ = params_.v.at(0.0);
    half_index_ = 0;
  }
  while (half_index_ < half_index) {
    // Close out half-cycle half_index_: the swing foot lands one stride
    // ahead of its anchor, the stance foot has translated back one step.
    const Scalar span = T_s * v_latch_;
    if (half_index_ % 2 == 0) {  // arm 3 swung, arm 2 supported
      anchor3_ += span;
      anchor2_ -= span;
    } else {
      anchor2_ += span;
      anchor3_ -= span;
    }
    ++half_index_;
    if (half_index_ % 2 == 0) {  // new cycle: resample the stride velocity
      v_latch_ = params_.v.at(static_cast<Scalar>(half_index_) * T_s);
    }
  }
}

GaitTargets GaitGenerator::targets(Scalar t) {
  if (t < 0) throw std::invalid_argument("gait targets: t must be >= 0");
  const Scalar T_s = 1.0 / (2.0 * params_.f_w);
  advance_to(static_cast<long>(std::floor(t / T_s)));

  GaitTargets out;
  out.arm2 = params_.stance2;
  out.arm3 = params_.stance3;
  out.arm2.x() = anchor2_;
  out.arm3.x() = anchor3_;
  out.v_latched = v_latch_;
  if (v_latch_ == 0.0) return out;  // feet stay planted at zero velocity

  const Scalar s = t - static_cast<Scalar>(half_index_) * T_s;
  const Scalar phase = kPi * s / T_s;
  const Scalar swing_dx = T_s * v_latch_ * 0.5 * (1.0 - std::cos(phase));
  const Scalar swing_dz = params_.h * std::sin(phase);
  if (half_index_ % 2 == 0) {  // arm 2 supports, arm 3 swings
    out.arm2.x() -= v_latch_ * s;
    out.arm3.x() += swing_dx;
    out.arm3.z() += swing_dz;
  } else {
    out.arm3.x() -= v_latch_ * s;
    out.arm2.x() += swing_dx;
    out.arm2.z() += swing_dz;
  }
  return out;
}

// Keyframe scripts ---------------------------------------------------

Scalar quintic_blend(Scalar u) {
  u = saturate(u, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

void KeyframeSequence::validate() const {
  if (frames.empty()) throw std::invalid_argument("keyframes: empty sequence");
  if (frames.front().t != 0.0) {
    throw std::invalid_argument("keyframes: first frame must be at t = 0");
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!(frames[i].t > frames[i - 1].t)) {
      throw std::invalid_argument("keyframes: times must be strictly increasing");
    }
  }
}

Scalar KeyframeSequence::duration() const {
  return frames.empty() ? 0.0 : frames.back().t;
}

std::array<Vec3, kNumArms> KeyframeSequence::sample(Scalar t) const {
  if (frames.empty()) throw std::invalid_argument("keyframes: empty sequence");
  if (t <= frames.front().t) return frames.front().targets;
  if (t >= frames.back().t) return frames.back().targets;
  std::size_t i = 1;
  while (frames[i].t < t) ++i;
  const Keyframe& a = frames[i - 1];
  const Keyframe& b = frames[i];
  const Scalar s = quintic_blend((t - a.t) / (b.t - a.t));
  std::array<Vec3, kNumArms> out;
  for (int arm = 0; arm < kNumArms; ++arm) {
    out[arm] = a.targets[arm] + s * (b.targets[arm] - a.targets[arm]);
  }
  return out;
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::kWalking:
      return "walking";
    case Mode::kDriving:
      return "driving";
    case Mode::kDrivingGrasp:
      return "driving_grasp";
    case Mode::kStanding:
      return "standing";
  }
  return "?";
}

std::array<Vec3, kNumArms> mode_pose(Mode mode) {
  switch (mode) {
    case Mode::kWalking:
      return {Vec3(0.28, 0.0, -0.25), Vec3(-0.15, 0.12, -0.30),
              Vec3(-0.15, -0.12, -0.30), Vec3(0.28, 0.0, 0.20)};
    case Mode::kDriving:
      return {Vec3(0.28, 0.0, -0.25), Vec3(-0.32, 0.12, -0.21),
              Vec3(-0.32, -0.12, -0.21), Vec3(0.28, 0.0, 0.20)};
    case Mode::kDrivingGrasp:
      return {Vec3(0.28, 0.0, -0.25), Vec3(0.0, 0.08, -0.04),
              Vec3(0.0, -0.08, -0.04), Vec3(0.04, 0.0, -0.06)};
    case Mode::kStanding:
      return {Vec3(0.24, 0.0, -0.33), Vec3(-0.16, 0.12, -0.33),
              Vec3(-0.16, -0.12, -0.33), Vec3(0.28, 0.0, 0.20)};
  }
  throw std::invalid_argument("mode_pose: unknown mode");
}

namespace {

// Scripted transitions with published timings; nullopt when the pair has
// no dedicated script.
bool scripted_transition(Mode from, Mode to, KeyframeSequence& out) {
  if (from == Mode::kWalking && to == Mode::kDriving) {
    out.frames = {{0.0, mode_pose(Mode::kWalking)},
                  {5.0, mode_pose(Mode::kDriving)}};
    return true;
  }
  if (from == Mode::kDriving && to == Mode::kDrivingGrasp) {
    // Arms 2/3 come forward around the torso while arm 4 dips toward the
    // grasp point. The first via keeps each rear foot in its shoulder's
    // sagittal plane while it swings past underneath (the yaw joint
    // cannot aim sideways), and the second bows the path outward so the
    // elbow never folds past its inner-reach limit.
    auto via1 = mode_pose(Mode::kDriving);
    via1[1] = Vec3(-0.12, 0.12, -0.28);
    via1[2] = Vec3(-0.12, -0.12, -0.28);
    via1[3] = Vec3(0.31, 0.0, 0.10);
    auto via2 = mode_pose(Mode::kDrivingGrasp);
    via2[1] = Vec3(0.04, 0.10, -0.16);
    via2[2] = Vec3(0.04, -0.10, -0.16);
    via2[3] = Vec3(0.22, 0.0, -0.05);
    out.frames = {{0.0, mode_pose(Mode::kDriving)},
                  {4.0, via1},
                  {7.0, via2},
                  {10.0, mode_pose(Mode::kDrivingGrasp)}};
    return true;
  }
  if (from == Mode::kWalking && to == Mode::kStanding) {
    out.frames = {{0.0, mode_pose(Mode::kWalking)},
                  {8.0, mode_pose(Mode::kStanding)}};
    return true;
  }
  if (from == Mode::kStanding && to == Mode::kWalking) {
    out.frames = {{0.0, mode_pose(Mode::kStanding)},
                  {4.0, mode_pose(Mode::kWalking)}};
    return true;
  }
  return false;
}

KeyframeSequence reversed(const KeyframeSequence& seq) {
  KeyframeSequence out;
  const Scalar D = seq.duration();
  for (auto it = seq.frames.rbegin(); it != seq.frames.rend(); ++it) {
    out.frames.push_back({D - it->t, it->targets});
  }
  return out;
}

// A scripted edge played in whichever direction matches.
KeyframeSequence scripted_leg(Mode from, Mode to) {
  KeyframeSequence seq;
  if (scripted_transition(from, to, seq)) return seq;
  KeyframeSequence fwd;
  if (scripted_transition(to, from, fwd)) return reversed(fwd);
  throw std::logic_error("mode route leg is not scripted");
}

// Intermediate modes for pairs without a script of their own. The
// scripted edges (walking-driving, driving-grasp, walking-standing) form
// a connected graph, so every other pair is played as a chain of
// scripted legs. A single straight blend is not safe here: the
// walking/standing <-> grasp lines pass within a millimeter of arm 4's
// elbow-limited inner reach, which the scripted via points steer around.
std::vector<Mode> route_vias(Mode from, Mode to) {
  const auto pair = [&](Mode a, Mode b) { return from == a && to == b; };
  if (pair(Mode::kWalking, Mode::kDrivingGrasp) ||
      pair(Mode::kDrivingGrasp, Mode::kWalking)) {
    return {Mode::kDriving};
  }
  if (pair(Mode::kDriving, Mode::kStanding) ||
      pair(Mode::kStanding, Mode::kDriving)) {
    return {Mode::kWalking};
  }
  if (pair(Mode::kDrivingGrasp, Mode::kStanding)) {
    return {Mode::kDriving, Mode::kWalking};
  }
  if (pair(Mode::kStanding, Mode::kDrivingGrasp)) {
    return {Mode::kWalking, Mode::kDriving};
  }
  throw std::logic_error("mode route: unexpected pair");
}

}  // namespace

KeyframeSequence mode_keyframes(Mode to, Mode from) {
  KeyframeSequence seq;
  if (from == to) {
    seq.frames = {{0.0, mode_pose(to)}};
  } else if (scripted_transition(from, to, seq)) {
    // published timing used as-is
  } else if (KeyframeSequence fwd; scripted_transition(to, from, fwd)) {
    seq = reversed(fwd);
  } else {
    std::vector<Mode> nodes{from};
    for (Mode via : route_vias(from, to)) nodes.push_back(via);
    nodes.push_back(to);
    seq = scripted_leg(nodes[0], nodes[1]);
    for (size_t i = 2; i < nodes.size(); ++i) {
      const KeyframeSequence next = scripted_leg(nodes[i - 1], nodes[i]);
      const Scalar off = seq.duration();
      // the junction pose is both the last frame of one leg and the
      // first of the next; keep a single copy
      for (size_t k = 1; k < next.frames.size(); ++k) {
        seq.frames.push_back({off + next.frames[k].t, next.frames[k].targets});
      }
    }
  }
  seq.validate();
  return seq;
}

KeyframeSequence mode_keyframes(Mode to) {
  Mode from = Mode::kWalking;
  if (to == Mode::kDrivingGrasp) from = Mode::kDriving;
  return mode_keyframes(to, from);
}

}  // namespace quadarm
