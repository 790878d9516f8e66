#include "socialmotion/rotation.h"

#include <cmath>
#include <numbers>

#include "socialmotion/error.h"

namespace socialmotion {

namespace {

bool all_finite(const Quat& q) {
  return std::isfinite(q.w()) && std::isfinite(q.x()) && std::isfinite(q.y()) &&
      std::isfinite(q.z());
}

} // namespace

Rot6D matrix_to_rot6d(const Mat3& m) {
  if (!m.allFinite()) {
    fail(ErrorCode::NonFinite, "rotation matrix has non-finite entries");
  }
  Rot6D out;
  out.v = {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
  return out;
}

Rot6D quat_to_rot6d(const Quat& q) {
  if (!all_finite(q)) {
    fail(ErrorCode::NonFinite, "quaternion has non-finite components");
  }
  const double norm = q.norm();
  if (norm < 1e-12) {
    fail(ErrorCode::Degenerate, "zero-norm quaternion");
  }
  return matrix_to_rot6d(q.normalized().toRotationMatrix());
}

Mat3 rot6d_to_matrix(const Rot6D& r) {
  for (double x : r.v) {
    if (!std::isfinite(x)) {
      fail(ErrorCode::NonFinite, "6D rotation has non-finite components");
    }
  }
  const Vec3 a1(r.v[0], r.v[1], r.v[2]);
  const Vec3 a2(r.v[3], r.v[4], r.v[5]);
  const double n1 = a1.norm();
  if (n1 < 1e-12) {
    fail(ErrorCode::Degenerate, "6D rotation has a zero first column");
  }
  const Vec3 b1 = a1 / n1;
  Vec3 b2 = a2 - b1.dot(a2) * b1;
  const double n2 = b2.norm();
  if (n2 < 1e-12) {
    fail(ErrorCode::Degenerate, "6D rotation columns are parallel");
  }
  b2 /= n2;
  Mat3 m;
  m.col(0) = b1;
  m.col(1) = b2;
  m.col(2) = b1.cross(b2);
  return m;
}

Quat rot6d_to_quat(const Rot6D& r) {
  Quat q(rot6d_to_matrix(r));
  q.normalize();
  // Canonical hemisphere so equal rotations give equal quaternions.
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

Quat yaw_rotation(double angle) {
  return Quat(Eigen::AngleAxisd(angle, Vec3::UnitY()));
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) {
    a += two_pi;
  } else if (a > std::numbers::pi) {
    a -= two_pi;
  }
  return a;
}

double rotation_distance(const Quat& a, const Quat& b) {
  const Quat rel = a.normalized().conjugate() * b.normalized();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

} // namespace socialmotion
