#include "socialmotion/kinematics.h"

#include <cmath>
#include <string>

#include "socialmotion/error.h"

namespace socialmotion {

namespace {

void check_joints(const RawMotion& motion, const SkeletonDef& skeleton) {
  if (motion.joints != skeleton.joint_count()) {
    fail(ErrorCode::ShapeMismatch,
         "motion has " + std::to_string(motion.joints) + " joints, skeleton has " +
             std::to_string(skeleton.joint_count()));
  }
}

} // namespace

std::vector<Quat> global_rotations(const RawMotion& motion, const SkeletonDef& skeleton, int frame) {
  check_joints(motion, skeleton);
  const int n = skeleton.joint_count();
  std::vector<Quat> global(static_cast<std::size_t>(n));
  global[0] = motion.rotation(frame, 0).normalized();
  for (int j = 1; j < n; ++j) {
    global[j] = global[skeleton.parents[j]] * motion.rotation(frame, j).normalized();
  }
  return global;
}

JointPositions forward_kinematics(const RawMotion& motion, const SkeletonDef& skeleton) {
  check_joints(motion, skeleton);
  const int n = skeleton.joint_count();
  JointPositions out(motion.frames(), n);
  std::vector<Mat3> rot(static_cast<std::size_t>(n));
  for (int t = 0; t < motion.frames(); ++t) {
    rot[0] = motion.rotation(t, 0).normalized().toRotationMatrix();
    out.at(t, 0) = motion.root_translation[t];
    for (int j = 1; j < n; ++j) {
      const int p = skeleton.parents[j];
      out.at(t, j) = out.at(t, p) + rot[p] * skeleton.offsets[j];
      rot[j] = rot[p] * motion.rotation(t, j).normalized().toRotationMatrix();
    }
  }
  return out;
}

double facing_yaw(std::span<const Vec3> p, const SkeletonDef& s) {
  if (static_cast<int>(p.size()) != s.joint_count()) {
    fail(ErrorCode::ShapeMismatch, "frame has the wrong number of joints for facing estimation");
  }
  const Vec3 across = (p[s.hips[0]] - p[s.hips[1]]) + (p[s.shoulders[0]] - p[s.shoulders[1]]);
  // forward = across x up, projected on the ground plane
  const double fx = -across.z();
  const double fz = across.x();
  if (std::hypot(fx, fz) < 1e-8) {
    fail(ErrorCode::Degenerate, "collapsed pose: across-body vector has no ground-plane extent");
  }
  return wrap_angle(std::atan2(fx, fz));
}

double facing_yaw(const JointPositions& positions, int frame, const SkeletonDef& skeleton) {
  return facing_yaw(std::span<const Vec3>(positions.frame(frame), static_cast<std::size_t>(positions.joints)),
                    skeleton);
}

} // namespace socialmotion
