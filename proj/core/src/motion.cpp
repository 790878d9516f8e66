#include "socialmotion/motion.h"

#include <cmath>
#include <string>

#include "socialmotion/error.h"

namespace socialmotion {

RawMotion::RawMotion(int frame_count, int joint_count, double frame_rate)
    : fps(frame_rate), joints(joint_count),
      root_translation(static_cast<std::size_t>(frame_count), Vec3::Zero()),
      rotations(static_cast<std::size_t>(frame_count) * joint_count, Quat::Identity()) {}

void RawMotion::validate() const {
  if (frames() < 1) {
    fail(ErrorCode::InvalidArgument, "motion needs at least one frame");
  }
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    fail(ErrorCode::InvalidArgument, "motion fps must be positive and finite");
  }
  if (joints < 1 || rotations.size() != root_translation.size() * static_cast<std::size_t>(joints)) {
    fail(ErrorCode::ShapeMismatch, "rotation count does not match frames x joints");
  }
  for (const auto& t : root_translation) {
    if (!t.allFinite()) {
      fail(ErrorCode::NonFinite, "root translation is non-finite");
    }
  }
  for (const auto& q : rotations) {
    if (!q.coeffs().allFinite()) {
      fail(ErrorCode::NonFinite, "joint rotation is non-finite");
    }
  }
}

RawMotion RawMotion::slice(int begin, int end) const {
  if (begin < 0 || end > frames() || begin >= end) {
    fail(ErrorCode::OutOfRange,
         "slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") outside " +
             std::to_string(frames()) + " frames");
  }
  RawMotion out(end - begin, joints, fps);
  for (int t = begin; t < end; ++t) {
    out.root_translation[t - begin] = root_translation[t];
    for (int j = 0; j < joints; ++j) {
      out.rotation(t - begin, j) = rotation(t, j);
    }
  }
  return out;
}

void SocialMotion::validate() const {
  if (persons.empty()) {
    fail(ErrorCode::InvalidArgument, "scene has no persons");
  }
  const int m = persons.front().frames();
  for (const auto& p : persons) {
    p.validate();
    if (p.frames() != m) {
      fail(ErrorCode::ShapeMismatch, "persons in a scene must share the frame count");
    }
    if (std::abs(p.fps - fps) > 1e-9) {
      fail(ErrorCode::ShapeMismatch, "persons in a scene must share the scene fps");
    }
  }
}

Vec3 PlanarTransform::apply(const Vec3& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * p.x() + s * p.z() + x, p.y(), -s * p.x() + c * p.z() + z};
}

PlanarTransform PlanarTransform::inverse() const {
  // p = R q + t  =>  q = R^T (p - t)
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  PlanarTransform inv;
  inv.yaw = -yaw;
  inv.x = -(c * x - s * z);
  inv.z = -(s * x + c * z);
  return inv;
}

PlanarTransform PlanarTransform::compose(const PlanarTransform& other) const {
  const Vec3 t = apply(Vec3(other.x, 0.0, other.z));
  return {t.x(), t.z(), yaw + other.yaw};
}

RawMotion transform_motion(const RawMotion& m, const PlanarTransform& t) {
  RawMotion out = m;
  const Quat r = yaw_rotation(t.yaw);
  for (int f = 0; f < m.frames(); ++f) {
    out.root_translation[f] = t.apply(m.root_translation[f]);
    out.rotation(f, 0) = (r * m.rotation(f, 0)).normalized();
  }
  return out;
}

JointPositions transform_positions(const JointPositions& p, const PlanarTransform& t) {
  JointPositions out = p;
  for (auto& v : out.data) {
    v = t.apply(v);
  }
  return out;
}

} // namespace socialmotion
