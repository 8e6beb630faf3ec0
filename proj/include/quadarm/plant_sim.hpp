#pragma once

#include "quadarm/types.hpp"

namespace quadarm {

// Unilateral spring-damper contact acting on a single joint coordinate.
// The ground sits at a fixed joint angle; penetration is ground_level -
// theta, so the contact pushes the joint toward larger angles and can
// only ever push (no adhesion). The activation time window is enforced by
// the caller, keeping the stepping functions free of absolute time.
struct ContactParams {
  bool enabled = false;
  Scalar ground_level = 0.0;  // joint angle of the ground surface [rad]
  Scalar stiffness = 0.0;     // [N m / rad]
  Scalar damping = 0.0;       // [N m s / rad]
  Scalar t_on = 0.0;          // window start [s]
  Scalar t_off = kInf;        // window end [s]

  void validate() const;
};

// Rigid single-joint plant with viscous friction, a configuration
// dependent gravity load g cos(theta), actuator torque saturation, and an
// optional unilateral contact.
struct PlantParams {
  Scalar inertia = 0.01;        // [kg m^2]
  Scalar damping = 0.02;        // viscous friction [N m s / rad]
  Scalar gravity_torque = 0.0;  // gravity load amplitude [N m]
  Scalar torque_max = kInf;     // actuator saturation [N m]
  ContactParams contact;

  void validate() const;
};

struct JointState {
  Scalar theta = 0.0;
  Scalar theta_dot = 0.0;
};

// Contact torque at the given state; zero when disabled, outside the
// ground, or when the spring-damper sum would pull.
Scalar contact_torque(const ContactParams& c, Scalar theta, Scalar theta_dot);

// One semi-implicit Euler step of length T:
//   acc   = (sat(tau) - b theta_dot - g cos(theta) + f_contact) / I
//   v_new = v + T acc
//   x_new = x + T v_new
// contact_active gates the contact for this step (time windowing is the
// caller's concern). Returns the applied (saturated) actuator torque.
Scalar joint_step(JointState& s, const PlantParams& p, Scalar tau, Scalar T,
                  bool contact_active);

// Differential-free base odometry: the wheel of diameter d rolling
// without slip advances the base by (d/2) * wheel_speed * T.
inline void integrate_odometry(Scalar& x, Scalar wheel_speed,
                               Scalar wheel_diameter, Scalar T) {
  x += 0.5 * wheel_diameter * wheel_speed * T;
}

}  // namespace quadarm
