#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace socialmotion {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Continuous 6D rotation: the first two columns of the rotation matrix,
// stored column-major as (c0.x, c0.y, c0.z, c1.x, c1.y, c1.z).
struct Rot6D {
  std::array<double, 6> v{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

  bool operator==(const Rot6D&) const = default;
};

Rot6D quat_to_rot6d(const Quat& q);
Rot6D matrix_to_rot6d(const Mat3& m);

// Gram-Schmidt orthonormalization of the two stored columns; the third column
// is their cross product, so the result is always a proper rotation.
Mat3 rot6d_to_matrix(const Rot6D& r);
Quat rot6d_to_quat(const Rot6D& r);

// Rotation by `angle` radians about +Y.
Quat yaw_rotation(double angle);

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

// Angle of the relative rotation between a and b, in [0, pi].
double rotation_distance(const Quat& a, const Quat& b);

} // namespace socialmotion
