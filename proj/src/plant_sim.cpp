#include "quadarm/plant_sim.hpp"

#include <cmath>
#include <stdexcept>

namespace quadarm {

void ContactParams::validate() const {
  if (!enabled) return;
  if (stiffness < 0 || damping < 0) {
    throw std::invalid_argument("contact: stiffness and damping must be >= 0");
  }
  if (!(t_off > t_on)) {
    throw std::invalid_argument("contact: t_off must be > t_on");
  }
}

void PlantParams::validate() const {
  if (!(inertia > 0)) throw std::invalid_argument("plant: inertia must be > 0");
  if (damping < 0) throw std::invalid_argument("plant: damping must be >= 0");
  if (!(torque_max > 0)) {
    throw std::invalid_argument("plant: torque_max must be > 0");
  }
  contact.validate();
}

Scalar contact_torque(const ContactParams& c, Scalar theta, Scalar theta_dot) {
  if (!c.enabled) return 0.0;
  const Scalar pen = c.ground_level - theta;
  if (pen <= 0.0) return 0.0;
  const Scalar f = c.stiffness * pen - c.damping * theta_dot;
  return f > 0.0 ? f : 0.0;
}

Scalar joint_step(JointState& s, const PlantParams& p, Scalar tau, Scalar T,
                  bool contact_active) {
  const Scalar applied = saturate(tau, -p.torque_max, p.torque_max);
  const Scalar fc =
      contact_active ? contact_torque(p.contact, s.theta, s.theta_dot) : 0.0;
  const Scalar acc = (applied - p.damping * s.theta_dot -
                      p.gravity_torque * std::cos(s.theta) + fc) /
                     p.inertia;
  s.theta_dot += T * acc;
  s.theta += T * s.theta_dot;
  return applied;
}

}  // namespace quadarm
