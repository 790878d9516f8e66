#pragma once

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "socialmotion/xh3d.h"

namespace socialmotion {

// Deterministic fixed-width features for motion and text. Motion: per
// channel group (root angular, root linear, height, local positions, local
// velocities, rotations, contacts) the mean, std, min and max of each person's
// features, averaged and max-pooled over persons, followed by scene-level
// terms (person count, length, spacing). Text: signed hashed bag of words,
// L2-normalized, in the same width.
class Embedder {
 public:
  static constexpr int kGroups = 7;
  static constexpr int kStats = 4;
  static constexpr int kSceneTerms = 4;

  int dim() const {
    return 2 * kGroups * kStats + kSceneTerms;
  }

  Eigen::VectorXd embed_motion(const SocialFeatures& scene) const;
  Eigen::VectorXd embed_text(std::string_view text) const;

  // One row per input.
  Eigen::MatrixXd embed_motions(std::span<const SocialFeatures> scenes) const;
  Eigen::MatrixXd embed_texts(std::span<const std::string> texts) const;
};

} // namespace socialmotion
