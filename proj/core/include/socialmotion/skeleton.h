#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "socialmotion/rotation.h"

namespace socialmotion {

// Kinematic tree with rest-pose offsets. Joints are stored in topological
// order: every parent index is smaller than its child's index and joint 0 is
// the root. Y is up; the rest pose faces +Z with the body's left side on +X.
struct SkeletonDef {
  std::string id;
  std::vector<std::string> joint_names;
  std::vector<int> parents; // -1 for the root
  std::vector<Vec3> offsets; // parent-relative, meters
  std::array<int, 2> heels{}; // left, right
  std::array<int, 2> toes{}; // left, right
  std::array<int, 2> hips{}; // left, right
  std::array<int, 2> shoulders{}; // left, right

  int joint_count() const {
    return static_cast<int>(parents.size());
  }

  // Throws Error(InvalidArgument) when any invariant is violated.
  void validate() const;
};

// 22-joint SMPL body skeleton (hands excluded), left/right symmetric.
const SkeletonDef& default_skeleton();

// JSON document:
//   {"id": "...", "joints": [{"name": "...", "parent": -1, "offset": [x,y,z]}, ...],
//    "heels": [l, r], "toes": [l, r], "hips": [l, r], "shoulders": [l, r]}
SkeletonDef skeleton_from_json(std::string_view json_text);
std::string skeleton_to_json(const SkeletonDef& skeleton);
SkeletonDef load_skeleton(const std::string& path);

// Looks up a skeleton by id; only the built-in "smpl22" is registered.
const SkeletonDef& skeleton_by_id(std::string_view id);

} // namespace socialmotion
