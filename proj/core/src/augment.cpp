#include "socialmotion/augment.h"

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

ShuffledScene shuffle_persons(const SocialMotion& scene, std::uint64_t seed) {
  if (scene.persons.empty()) {
    fail(ErrorCode::InvalidArgument, "shuffle_persons: scene has no persons");
  }
  Rng rng(seed);
  ShuffledScene out;
  out.scene.fps = scene.fps;
  for (std::size_t k : rng.permutation(scene.persons.size())) {
    out.permutation.push_back(static_cast<int>(k));
    out.scene.persons.push_back(scene.persons[k]);
  }
  return out;
}

} // namespace socialmotion
