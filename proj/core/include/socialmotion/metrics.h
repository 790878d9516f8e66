#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "socialmotion/motion.h"

namespace socialmotion {

// Errors over one or more persons with matching shapes. Results in
// millimeters (accel in mm/frame^2).
double mpjpe_mm(std::span<const JointPositions> pred, std::span<const JointPositions> gt);
double pa_mpjpe_mm(std::span<const JointPositions> pred, std::span<const JointPositions> gt);
double accel_error_mm(std::span<const JointPositions> pred, std::span<const JointPositions> gt);

double mpjpe_mm(const JointPositions& pred, const JointPositions& gt);
double pa_mpjpe_mm(const JointPositions& pred, const JointPositions& gt);
double accel_error_mm(const JointPositions& pred, const JointPositions& gt);

// y ~= scale * rotation * x + translation
struct Similarity {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const {
    return scale * (rotation * x) + translation;
  }
};

// Least-squares similarity taking `source` onto `target` (closed form via SVD
// of the cross-covariance). Throws Degenerate when either cloud has rank < 2.
Similarity procrustes_align(std::span<const Vec3> source, std::span<const Vec3> target);

// Rows are samples. A 1e-6 ridge is added to both covariances when a side has
// no more samples than dimensions.
double fid(const Eigen::MatrixXd& real, const Eigen::MatrixXd& generated);

// Mean distance over n_pairs disjoint random pairs.
double diversity(const Eigen::MatrixXd& features, int n_pairs, std::uint64_t seed);
// Mean within-group pair distance, averaged over groups. Groups with at most
// n_pairs pairs use all of them.
double multimodality(std::span<const Eigen::MatrixXd> groups, int n_pairs, std::uint64_t seed);

struct RPrecision {
  double top1 = 0.0;
  double top2 = 0.0;
  double top3 = 0.0;
  double mm_dist = 0.0;
  long long batches = 0;
};

// Items are shuffled with `seed` and split into full batches; each motion
// ranks its own text among the batch's texts by Euclidean distance.
RPrecision r_precision(const Eigen::MatrixXd& motion, const Eigen::MatrixXd& text, int batch_size = 32,
                       std::uint64_t seed = 0);

struct MetricsReport {
  std::optional<double> mpjpe_mm;
  std::optional<double> pa_mpjpe_mm;
  std::optional<double> accel_mm;
  std::optional<double> fid;
  std::optional<double> diversity;
  std::optional<double> multimodality;
  std::optional<RPrecision> r_precision;
  long long samples = 0;
  int n_pairs = 300;
  std::uint64_t seed = 0;

  std::string to_json() const;
  std::string to_table() const;
};

} // namespace socialmotion
