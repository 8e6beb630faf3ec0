#include "quadarm/audit.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace quadarm {

AuditTolerances widen_for_quantization(const AuditTolerances& tol, Scalar T,
                                       Scalar angle_scale, Scalar torque_scale) {
  if (!(T > 0)) throw std::invalid_argument("audit: T must be > 0");
  // %.9e keeps ten significant digits, so a round-tripped sample can move
  // by up to half a decimal ulp of its magnitude. The floor keeps the
  // derived slack meaningful for logs whose angles are all near zero.
  const Scalar q = 5e-10 * std::max(angle_scale, Scalar(1.0));
  AuditTolerances out = tol;
  out.angle += q;
  out.speed += 2.0 * q / T;
  out.accel += 4.0 * q / (T * T);
  out.torque += 5e-10 * std::max(torque_scale, Scalar(1.0));
  return out;
}

const char* audit_kind_name(AuditKind kind) {
  switch (kind) {
    case AuditKind::kAngle:
      return "angle";
    case AuditKind::kSpeed:
      return "speed";
    case AuditKind::kAccel:
      return "accel";
    case AuditKind::kTorque:
      return "torque";
  }
  return "?";
}

std::string describe(const AuditViolation& v) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "sample %zu%s%s: %s %.12g exceeds bound %.12g",
                v.index, v.joint.empty() ? "" : " ",
                v.joint.c_str(), audit_kind_name(v.kind), v.value, v.bound);
  return buf;
}

AuditReport audit_reference_sequence(const std::vector<Scalar>& ref, Scalar T,
                                     const JointLimits& limits,
                                     const AuditTolerances& tol,
                                     const std::string& joint_name) {
  if (!(T > 0)) throw std::invalid_argument("audit: T must be > 0");
  AuditReport report;
  report.samples_checked = ref.size();
  auto flag = [&](std::size_t k, AuditKind kind, Scalar value, Scalar bound) {
    report.violations.push_back({k, joint_name, kind, value, bound});
  };
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const Scalar x = ref[k];
    if (x > limits.angle_max + tol.angle) {
      flag(k, AuditKind::kAngle, x, limits.angle_max);
    } else if (x < limits.angle_min - tol.angle) {
      flag(k, AuditKind::kAngle, x, limits.angle_min);
    }
    if (k >= 1) {
      const Scalar v = (ref[k] - ref[k - 1]) / T;
      if (v > limits.speed_max + tol.speed) {
        flag(k, AuditKind::kSpeed, v, limits.speed_max);
      } else if (v < -limits.speed_max - tol.speed) {
        flag(k, AuditKind::kSpeed, v, -limits.speed_max);
      }
    }
    if (k >= 2) {
      const Scalar a = (ref[k] - 2.0 * ref[k - 1] + ref[k - 2]) / (T * T);
      if (a > limits.accel_max + tol.accel) {
        flag(k, AuditKind::kAccel, a, limits.accel_max);
      } else if (a < limits.accel_min - tol.accel) {
        flag(k, AuditKind::kAccel, a, limits.accel_min);
      }
    }
  }
  return report;
}

AuditReport audit_reference_table(const std::vector<std::vector<Scalar>>& refs,
                                  const std::vector<std::string>& names,
                                  const std::vector<JointLimits>& limits,
                                  Scalar T, const AuditTolerances& tol) {
  if (refs.size() != names.size() || refs.size() != limits.size()) {
    throw std::invalid_argument("audit: refs, names, and limits sizes differ");
  }
  AuditReport report;
  for (std::size_t j = 0; j < refs.size(); ++j) {
    AuditReport one =
        audit_reference_sequence(refs[j], T, limits[j], tol, names[j]);
    report.samples_checked += one.samples_checked;
    report.violations.insert(report.violations.end(), one.violations.begin(),
                             one.violations.end());
  }
  return report;
}

}  // namespace quadarm
