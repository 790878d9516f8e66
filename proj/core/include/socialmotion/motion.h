#pragma once

#include <vector>

#include "socialmotion/rotation.h"

namespace socialmotion {

// One person's raw kinematic track: root translation plus per-joint local
// rotations for each frame. Joint 0's rotation is the root's global
// orientation.
struct RawMotion {
  double fps = 20.0;
  int joints = 0;
  std::vector<Vec3> root_translation; // frames
  std::vector<Quat> rotations; // frames * joints, frame-major

  RawMotion() = default;
  RawMotion(int frames, int joint_count, double frame_rate);

  int frames() const {
    return static_cast<int>(root_translation.size());
  }

  Quat& rotation(int frame, int joint) {
    return rotations[static_cast<std::size_t>(frame) * joints + joint];
  }
  const Quat& rotation(int frame, int joint) const {
    return rotations[static_cast<std::size_t>(frame) * joints + joint];
  }

  // M >= 1, fps > 0, consistent sizes, finite values.
  void validate() const;

  // Frames [begin, end).
  RawMotion slice(int begin, int end) const;
};

// Multi-person scene sharing one frame rate and frame count.
struct SocialMotion {
  double fps = 20.0;
  std::vector<RawMotion> persons;

  int frames() const {
    return persons.empty() ? 0 : persons.front().frames();
  }
  void validate() const;
};

// Global joint positions, frames x joints.
struct JointPositions {
  int frames = 0;
  int joints = 0;
  std::vector<Vec3> data;

  JointPositions() = default;
  JointPositions(int frame_count, int joint_count)
      : frames(frame_count), joints(joint_count),
        data(static_cast<std::size_t>(frame_count) * joint_count, Vec3::Zero()) {}

  Vec3& at(int frame, int joint) {
    return data[static_cast<std::size_t>(frame) * joints + joint];
  }
  const Vec3& at(int frame, int joint) const {
    return data[static_cast<std::size_t>(frame) * joints + joint];
  }
  const Vec3* frame(int t) const {
    return data.data() + static_cast<std::size_t>(t) * joints;
  }
};

// Rigid motion in the ground plane: rotate by `yaw` about +Y, then translate
// by (x, 0, z).
struct PlanarTransform {
  double x = 0.0;
  double z = 0.0;
  double yaw = 0.0;

  Vec3 apply(const Vec3& p) const;
  PlanarTransform inverse() const;
  // (this * other)(p) == this->apply(other.apply(p))
  PlanarTransform compose(const PlanarTransform& other) const;
};

RawMotion transform_motion(const RawMotion& m, const PlanarTransform& t);
JointPositions transform_positions(const JointPositions& p, const PlanarTransform& t);

} // namespace socialmotion
