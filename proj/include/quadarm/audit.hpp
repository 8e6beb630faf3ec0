#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "quadarm/robot_model.hpp"
#include "quadarm/types.hpp"

namespace quadarm {

// Numerical slack applied on top of the configured limits. The defaults
// cover accumulated rounding in the reference pipeline; audits of data
// that passed through decimal serialization need the quantization of the
// text format added on top (see widen_for_quantization).
struct AuditTolerances {
  Scalar angle = 1e-9;
  Scalar speed = 1e-9;
  Scalar accel = 1e-9;
  Scalar torque = 0.0;  // exact bound by default
};

// Widen tolerances for values that were printed with %.9e and re-parsed:
// each sample may be off by half an ulp of its decimal representation,
// and the finite differences divide that by T and T^2.
AuditTolerances widen_for_quantization(const AuditTolerances& tol, Scalar T,
                                       Scalar angle_scale, Scalar torque_scale);

enum class AuditKind { kAngle, kSpeed, kAccel, kTorque };

const char* audit_kind_name(AuditKind kind);

struct AuditViolation {
  std::size_t index = 0;  // sample index within the sequence
  std::string joint;      // joint name, empty for anonymous sequences
  AuditKind kind = AuditKind::kAngle;
  Scalar value = 0.0;  // offending angle, velocity, or acceleration
  Scalar bound = 0.0;  // limit that was exceeded
};

std::string describe(const AuditViolation& v);

struct AuditReport {
  std::vector<AuditViolation> violations;
  std::size_t samples_checked = 0;

  bool ok() const { return violations.empty(); }
};

// Audit one reference sequence sampled at period T: angles at every
// sample, backward-difference velocities from the second sample, and
// backward-difference accelerations from the third.
AuditReport audit_reference_sequence(const std::vector<Scalar>& ref, Scalar T,
                                     const JointLimits& limits,
                                     const AuditTolerances& tol = {},
                                     const std::string& joint_name = {});

// Audit several sequences (one per joint) against per-joint limits.
// Violations carry the matching joint names; reports are concatenated in
// joint order.
AuditReport audit_reference_table(const std::vector<std::vector<Scalar>>& refs,
                                  const std::vector<std::string>& names,
                                  const std::vector<JointLimits>& limits,
                                  Scalar T, const AuditTolerances& tol = {});

}  // namespace quadarm
