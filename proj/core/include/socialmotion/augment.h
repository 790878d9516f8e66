#pragma once

#include <cstdint>
#include <vector>

#include "socialmotion/motion.h"

namespace socialmotion {

struct ShuffledScene {
  SocialMotion scene;
  // scene.persons[k] == input.persons[permutation[k]]
  std::vector<int> permutation;
};

// Uniformly random person order. Encoding the result makes the new first
// person the reference.
ShuffledScene shuffle_persons(const SocialMotion& scene, std::uint64_t seed);

} // namespace socialmotion
