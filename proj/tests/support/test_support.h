#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "socialmotion/autograd.h"
#include "socialmotion/grammar.h"
#include "socialmotion/metrics.h"
#include "socialmotion/motion.h"
#include "socialmotion/rng.h"
#include "socialmotion/skeleton.h"
#include "socialmotion/synth.h"
#include "socialmotion/tasks.h"

namespace socialmotion::testing {

// Global-absolute-position feature variant: per frame, every joint's world
// position (frames x 3J). No canonicalization, no velocities, no rotations.
Eigen::MatrixXd global_position_features(const RawMotion& motion, const SkeletonDef& skeleton);
JointPositions positions_from_global_features(const Eigen::MatrixXd& features);

// Levenberg-Marquardt over (log scale, rotation vector, translation) with
// numeric Jacobians and random restarts.
Similarity numeric_similarity_fit(std::span<const Vec3> source, std::span<const Vec3> target,
                                  std::uint64_t seed = 0);

// Least-squares planar rigid transform (rotation about +Y, translation in XZ)
// mapping source onto target.
PlanarTransform fit_planar_rigid(std::span<const Vec3> source, std::span<const Vec3> target);

// Random valid synthetic scene with the requested person count.
SceneFile random_synth_scene(Rng& rng, int persons, int max_frames = 400);

struct WindowSet {
  std::vector<Eigen::MatrixXd> xh3d;
  std::vector<Eigen::MatrixXd> global;
  int joints = 0;
  double fps = 20.0;
};

// Fixed-length windows cut at identical locations from both feature variants
// of a seeded synthetic corpus.
WindowSet synth_windows(int count, int window, std::uint64_t seed, int scenes = 60);

SocialTokens random_social_tokens(Rng& rng, int max_persons, int max_run, int codes, int bins);

// Scenes with random captions and token blocks for memorization.
std::vector<TokenizedScene> random_token_scenes(int count, int codes, int bins, std::uint64_t seed);

struct GradCheckResult {
  double worst_relative = 0.0;
  std::string worst_parameter;
  int checked = 0;
};

// Central differences on a random subset of entries of each parameter. The
// relative error of a parameter is |a - n| / max(|a|, |n|) over the sampled
// entries as vectors.
GradCheckResult check_gradients(std::span<ad::Parameter* const> params, const std::function<double()>& loss,
                                const std::function<void()>& analytic, int samples_per_param, double step,
                                std::uint64_t seed);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const {
    return path_;
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

} // namespace socialmotion::testing
