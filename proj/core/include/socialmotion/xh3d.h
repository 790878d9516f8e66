#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "socialmotion/motion.h"
#include "socialmotion/skeleton.h"

namespace socialmotion {

// Column layout of the per-frame feature vector for a skeleton of j joints:
//   [r^a | r^x r^z | r^y | j^p: 3(j-1) | j^v: 3j | j^r: 6(j-1) | c^f: 4]
// for a total width of 12j - 1 (263 for the 22-joint skeleton).
struct FeatureLayout {
  int joints = 22;

  static constexpr int root_angular = 0;
  static constexpr int root_linear = 1;
  static constexpr int root_height = 3;
  static constexpr int local_positions = 4;
  int local_velocities() const {
    return local_positions + 3 * (joints - 1);
  }
  int local_rotations() const {
    return local_velocities() + 3 * joints;
  }
  int contacts() const {
    return local_rotations() + 6 * (joints - 1);
  }
  int width() const {
    return contacts() + 4;
  }

  static int width_for(int joint_count) {
    return FeatureLayout{joint_count}.width();
  }
  // Inverse of width_for; nullopt when no joint count produces this width.
  static std::optional<int> joints_for_width(int width);
};

// One person's per-frame features in the person's canonical frame. Rows are
// frames. Velocities are per-frame displacements (m/frame, rad/frame).
struct PersonFeatures {
  int joints = 22;
  double fps = 20.0;
  Eigen::MatrixXd data; // frames x width

  int frames() const {
    return static_cast<int>(data.rows());
  }
  FeatureLayout layout() const {
    return FeatureLayout{joints};
  }
};

// First-frame planar pose of a person in the reference person's canonical
// frame.
struct RelPose {
  double x = 0.0;
  double z = 0.0;
  double theta = 0.0; // (-pi, pi]

  PlanarTransform as_transform() const {
    return {x, z, theta};
  }
};

struct SocialFeatures {
  // order[k] is the input index of the k-th encoded person; order[0] is the
  // reference.
  std::vector<int> order;
  std::vector<PersonFeatures> persons;
  std::vector<RelPose> relposes; // persons.size() - 1 entries
  double fps = 20.0;

  void validate() const;
};

struct CodecOptions {
  // Squared per-frame displacement below which a heel/toe is in contact.
  double contact_threshold = 2e-3;
};

struct CanonicalMotion {
  RawMotion motion;
  // original = removed.apply(canonical)
  PlanarTransform removed;
};

// Moves frame 0's root to the XZ origin and turns the body to face +Z.
CanonicalMotion canonicalize_person(const RawMotion& motion, const SkeletonDef& skeleton);

// Planar pose of the frame-0 root (x, z, facing yaw).
PlanarTransform first_frame_pose(const RawMotion& motion, const SkeletonDef& skeleton);

// frames x 4 binary contacts ordered (left heel, left toe, right heel, right toe).
Eigen::MatrixXd detect_foot_contacts(const JointPositions& positions, const SkeletonDef& skeleton,
                                     double threshold = CodecOptions{}.contact_threshold);

// Requires a canonical motion with at least 2 frames.
PersonFeatures encode_person_h3d(const RawMotion& canonical, const SkeletonDef& skeleton,
                                 const CodecOptions& options = {});

// Integrates the root trajectory and returns the motion in the canonical
// frame. The root orientation is the best rotation mapping the rest offsets
// of the root's children onto their decoded positions (yaw-only when the root
// has fewer than two non-collinear children).
RawMotion decode_person_h3d(const PersonFeatures& features, const SkeletonDef& skeleton);

// Global joint positions straight from the root trajectory and j^p.
JointPositions decode_person_positions(const PersonFeatures& features);

RelPose compute_relative_pose(const RawMotion& reference, const RawMotion& other,
                              const SkeletonDef& skeleton);

struct ReferenceChoice {
  std::optional<int> index; // explicit reference
  std::uint64_t seed = 0; // used when index is empty

  static ReferenceChoice fixed(int i) {
    return {i, 0};
  }
  static ReferenceChoice random(std::uint64_t seed) {
    return {std::nullopt, seed};
  }
};

SocialFeatures encode_social(const SocialMotion& scene, const SkeletonDef& skeleton,
                             ReferenceChoice reference = ReferenceChoice::fixed(0),
                             const CodecOptions& options = {});

// Persons come back in SocialFeatures order, expressed in the reference's
// canonical frame.
SocialMotion decode_social(const SocialFeatures& features, const SkeletonDef& skeleton);
std::vector<JointPositions> decode_social_positions(const SocialFeatures& features);

} // namespace socialmotion
