#include "socialmotion/embedder.h"

#include <cmath>
#include <cstdint>
#include <limits>

#include "socialmotion/error.h"
#include "socialmotion/vocabulary.h"

namespace socialmotion {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace

Eigen::VectorXd Embedder::embed_motion(const SocialFeatures& scene) const {
  if (scene.persons.empty()) {
    fail(ErrorCode::InvalidArgument, "embed_motion: scene has no persons");
  }
  const int per = kGroups * kStats;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(per);
  Eigen::VectorXd maxed = Eigen::VectorXd::Constant(per, -std::numeric_limits<double>::infinity());
  for (const PersonFeatures& p : scene.persons) {
    const FeatureLayout layout = p.layout();
    if (p.data.cols() != layout.width() || p.frames() < 1) {
      fail(ErrorCode::ShapeMismatch, "embed_motion: person features do not match the layout");
    }
    const int bounds[kGroups + 1] = {FeatureLayout::root_angular,   FeatureLayout::root_linear,
                                     FeatureLayout::root_height,    FeatureLayout::local_positions,
                                     layout.local_velocities(),     layout.local_rotations(),
                                     layout.contacts(),             layout.width()};
    Eigen::VectorXd stats(per);
    for (int g = 0; g < kGroups; ++g) {
      const auto block = p.data.middleCols(bounds[g], bounds[g + 1] - bounds[g]);
      const double m = block.mean();
      const double var = (block.array() - m).square().mean();
      stats(g * kStats + 0) = m;
      stats(g * kStats + 1) = std::sqrt(var);
      stats(g * kStats + 2) = block.minCoeff();
      stats(g * kStats + 3) = block.maxCoeff();
    }
    mean += stats;
    maxed = maxed.cwiseMax(stats);
  }
  mean /= static_cast<double>(scene.persons.size());

  Eigen::VectorXd out(dim());
  out.head(per) = mean;
  out.segment(per, per) = maxed;
  double spacing = 0.0;
  double turn = 0.0;
  for (const RelPose& r : scene.relposes) {
    spacing += std::hypot(r.x, r.z);
    turn += std::abs(r.theta);
  }
  const double pairs = std::max<double>(1.0, static_cast<double>(scene.relposes.size()));
  out(2 * per + 0) = static_cast<double>(scene.persons.size());
  out(2 * per + 1) = scene.persons.front().frames() / 100.0;
  out(2 * per + 2) = spacing / pairs;
  out(2 * per + 3) = turn / pairs;
  return out;
}

Eigen::VectorXd Embedder::embed_text(std::string_view text) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (const std::string& w : split_words(text)) {
    const std::uint64_t h = fnv1a(w);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim()))) += sign;
  }
  const double norm = out.norm();
  if (norm > 0.0) {
    out /= norm;
  }
  return out;
}

Eigen::MatrixXd Embedder::embed_motions(std::span<const SocialFeatures> scenes) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(scenes.size()), dim());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed_motion(scenes[i]).transpose();
  }
  return out;
}

Eigen::MatrixXd Embedder::embed_texts(std::span<const std::string> texts) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed_text(texts[i]).transpose();
  }
  return out;
}

} // namespace socialmotion
