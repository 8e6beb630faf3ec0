#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <limits>
#include <numbers>

namespace quadarm {

using Scalar = double;

using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Isometry = Eigen::Transform<Scalar, 3, Eigen::Isometry>;

inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
inline constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

// sat_(lo,hi)(x): clamp x into [lo, hi].
inline Scalar saturate(Scalar x, Scalar lo, Scalar hi) {
  if (x < lo) return lo;
  if (x > hi) return hi;
  return x;
}

inline Scalar deg2rad(Scalar deg) { return deg * kPi / 180.0; }
inline Scalar rad2deg(Scalar rad) { return rad * 180.0 / kPi; }

}  // namespace quadarm
