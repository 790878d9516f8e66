#include "socialmotion/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <json.hpp>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

void check_pair(const JointPositions& pred, const JointPositions& gt) {
  if (pred.frames != gt.frames || pred.joints != gt.joints ||
      pred.data.size() != static_cast<std::size_t>(pred.frames) * pred.joints ||
      gt.data.size() != static_cast<std::size_t>(gt.frames) * gt.joints) {
    fail(ErrorCode::ShapeMismatch, "metric inputs differ in shape (" + std::to_string(pred.frames) + "x" +
                                       std::to_string(pred.joints) + " vs " + std::to_string(gt.frames) + "x" +
                                       std::to_string(gt.joints) + ")");
  }
  if (pred.frames < 1 || pred.joints < 1) {
    fail(ErrorCode::InvalidArgument, "metric inputs are empty");
  }
}

void check_lists(std::span<const JointPositions> pred, std::span<const JointPositions> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    fail(ErrorCode::ShapeMismatch, "metric inputs need the same non-zero number of persons");
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    check_pair(pred[p], gt[p]);
  }
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& mean) {
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

double rank_tolerance(const Eigen::VectorXd& sv) {
  return std::max(1e-12, sv(0) * 1e-9);
}

} // namespace

double mpjpe_mm(const JointPositions& pred, const JointPositions& gt) {
  check_pair(pred, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    sum += (pred.data[i] - gt.data[i]).norm();
  }
  return 1000.0 * sum / static_cast<double>(pred.data.size());
}

double mpjpe_mm(std::span<const JointPositions> pred, std::span<const JointPositions> gt) {
  check_lists(pred, gt);
  double sum = 0.0;
  double n = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const double w = static_cast<double>(pred[p].data.size());
    sum += mpjpe_mm(pred[p], gt[p]) * w;
    n += w;
  }
  return sum / n;
}

Similarity procrustes_align(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size() || source.size() < 3) {
    fail(ErrorCode::InvalidArgument, "procrustes_align: need matching clouds of at least 3 points");
  }
  const auto n = static_cast<Eigen::Index>(source.size());
  Eigen::Matrix<double, Eigen::Dynamic, 3> x(n, 3), y(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = source[i].transpose();
    y.row(i) = target[i].transpose();
  }
  const Eigen::RowVector3d mx = x.colwise().mean();
  const Eigen::RowVector3d my = y.colwise().mean();
  x.rowwise() -= mx;
  y.rowwise() -= my;
  for (const auto* cloud : {&x, &y}) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(*cloud);
    const Eigen::VectorXd sv = svd.singularValues();
    if (!(sv(0) > 1e-12) || sv(1) <= rank_tolerance(sv)) {
      fail(ErrorCode::Degenerate, "procrustes_align: joint cloud has rank < 2");
    }
  }
  const Mat3 cross = y.transpose() * x / static_cast<double>(n);
  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s(1.0, 1.0, 1.0);
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    s(2) = -1.0;
  }
  Similarity t;
  t.rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const double var_x = x.squaredNorm() / static_cast<double>(n);
  t.scale = svd.singularValues().dot(s) / var_x;
  t.translation = my.transpose() - t.scale * t.rotation * mx.transpose();
  return t;
}

double pa_mpjpe_mm(const JointPositions& pred, const JointPositions& gt) {
  check_pair(pred, gt);
  double sum = 0.0;
  const auto joints = static_cast<std::size_t>(pred.joints);
  for (int f = 0; f < pred.frames; ++f) {
    std::span<const Vec3> ps(pred.frame(f), joints);
    std::span<const Vec3> gs(gt.frame(f), joints);
    const Similarity t = procrustes_align(ps, gs);
    for (std::size_t j = 0; j < joints; ++j) {
      sum += (t.apply(ps[j]) - gs[j]).norm();
    }
  }
  return 1000.0 * sum / static_cast<double>(pred.data.size());
}

double pa_mpjpe_mm(std::span<const JointPositions> pred, std::span<const JointPositions> gt) {
  check_lists(pred, gt);
  double sum = 0.0;
  double n = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const double w = static_cast<double>(pred[p].data.size());
    sum += pa_mpjpe_mm(pred[p], gt[p]) * w;
    n += w;
  }
  return sum / n;
}

double accel_error_mm(const JointPositions& pred, const JointPositions& gt) {
  check_pair(pred, gt);
  if (pred.frames < 3) {
    fail(ErrorCode::InvalidArgument, "accel_error: need at least 3 frames, got " + std::to_string(pred.frames));
  }
  double sum = 0.0;
  for (int f = 1; f + 1 < pred.frames; ++f) {
    for (int j = 0; j < pred.joints; ++j) {
      const Vec3 ap = pred.at(f + 1, j) - 2.0 * pred.at(f, j) + pred.at(f - 1, j);
      const Vec3 ag = gt.at(f + 1, j) - 2.0 * gt.at(f, j) + gt.at(f - 1, j);
      sum += (ap - ag).norm();
    }
  }
  return 1000.0 * sum / (static_cast<double>(pred.frames - 2) * pred.joints);
}

double accel_error_mm(std::span<const JointPositions> pred, std::span<const JointPositions> gt) {
  check_lists(pred, gt);
  double sum = 0.0;
  double n = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const double w = static_cast<double>(pred[p].frames - 2) * pred[p].joints;
    sum += accel_error_mm(pred[p], gt[p]) * w;
    n += w;
  }
  return sum / n;
}

double fid(const Eigen::MatrixXd& real, const Eigen::MatrixXd& generated) {
  if (real.cols() != generated.cols() || real.cols() == 0) {
    fail(ErrorCode::ShapeMismatch, "fid: feature widths differ");
  }
  if (real.rows() < 2 || generated.rows() < 2) {
    fail(ErrorCode::InvalidArgument, "fid: need at least 2 samples per side");
  }
  if (!real.allFinite() || !generated.allFinite()) {
    fail(ErrorCode::NonFinite, "fid: non-finite features");
  }
  const Eigen::RowVectorXd mr = real.colwise().mean();
  const Eigen::RowVectorXd mg = generated.colwise().mean();
  Eigen::MatrixXd sr = covariance(real, mr);
  Eigen::MatrixXd sg = covariance(generated, mg);
  const Eigen::Index dim = real.cols();
  if (real.rows() <= dim || generated.rows() <= dim) {
    sr += 1e-6 * Eigen::MatrixXd::Identity(dim, dim);
    sg += 1e-6 * Eigen::MatrixXd::Identity(dim, dim);
  }
  const Eigen::MatrixXd root_r = symmetric_sqrt(sr);
  const Eigen::MatrixXd inner = root_r * sg * root_r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  const double trace_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (mr - mg).squaredNorm() + sr.trace() + sg.trace() - 2.0 * trace_sqrt;
  return std::max(0.0, value);
}

double diversity(const Eigen::MatrixXd& features, int n_pairs, std::uint64_t seed) {
  if (features.rows() < 2) {
    fail(ErrorCode::InvalidArgument, "diversity: need at least 2 features");
  }
  if (n_pairs < 1 || 2LL * n_pairs > features.rows()) {
    fail(ErrorCode::InvalidArgument, "diversity: " + std::to_string(n_pairs) + " disjoint pairs need " +
                                         std::to_string(2LL * n_pairs) + " features, have " +
                                         std::to_string(features.rows()));
  }
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(features.rows()));
  double sum = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    sum += (features.row(static_cast<Eigen::Index>(perm[2 * i])) -
            features.row(static_cast<Eigen::Index>(perm[2 * i + 1])))
               .norm();
  }
  return sum / n_pairs;
}

double multimodality(std::span<const Eigen::MatrixXd> groups, int n_pairs, std::uint64_t seed) {
  if (groups.empty()) {
    fail(ErrorCode::InvalidArgument, "multimodality: no groups");
  }
  if (n_pairs < 1) {
    fail(ErrorCode::InvalidArgument, "multimodality: n_pairs must be positive");
  }
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Eigen::MatrixXd& m = groups[g];
    const Eigen::Index n = m.rows();
    if (n < 2) {
      fail(ErrorCode::InvalidArgument, "multimodality: group " + std::to_string(g) + " has fewer than 2 members");
    }
    const long long all_pairs = static_cast<long long>(n) * (n - 1) / 2;
    double sum = 0.0;
    if (all_pairs <= n_pairs) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          sum += (m.row(i) - m.row(j)).norm();
        }
      }
      sum /= static_cast<double>(all_pairs);
    } else {
      for (int k = 0; k < n_pairs; ++k) {
        const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
        auto j = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n - 1)));
        if (j >= i) {
          ++j;
        }
        sum += (m.row(i) - m.row(j)).norm();
      }
      sum /= n_pairs;
    }
    total += sum;
  }
  return total / static_cast<double>(groups.size());
}

RPrecision r_precision(const Eigen::MatrixXd& motion, const Eigen::MatrixXd& text, int batch_size,
                       std::uint64_t seed) {
  if (motion.rows() != text.rows() || motion.cols() != text.cols()) {
    fail(ErrorCode::ShapeMismatch, "r_precision: motion and text embeddings must pair up");
  }
  if (batch_size < 1 || motion.rows() < batch_size) {
    fail(ErrorCode::InvalidArgument, "r_precision: need at least one full batch of " + std::to_string(batch_size));
  }
  Rng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(motion.rows()));
  const long long batches = motion.rows() / batch_size;
  RPrecision r;
  r.batches = batches;
  long long hits[3] = {0, 0, 0};
  double dist_sum = 0.0;
  for (long long b = 0; b < batches; ++b) {
    Eigen::MatrixXd m(batch_size, motion.cols()), t(batch_size, text.cols());
    for (int i = 0; i < batch_size; ++i) {
      const auto src = static_cast<Eigen::Index>(perm[b * batch_size + i]);
      m.row(i) = motion.row(src);
      t.row(i) = text.row(src);
    }
    for (int i = 0; i < batch_size; ++i) {
      const double own = (m.row(i) - t.row(i)).norm();
      dist_sum += own;
      int rank = 0;
      for (int j = 0; j < batch_size; ++j) {
        if (j != i && (m.row(i) - t.row(j)).norm() < own) {
          ++rank;
        }
      }
      for (int k = 0; k < 3; ++k) {
        hits[k] += rank <= k ? 1 : 0;
      }
    }
  }
  const double n = static_cast<double>(batches * batch_size);
  r.top1 = hits[0] / n;
  r.top2 = hits[1] / n;
  r.top3 = hits[2] / n;
  r.mm_dist = dist_sum / n;
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    }
  };
  put("mpjpe_mm", mpjpe_mm);
  put("pa_mpjpe_mm", pa_mpjpe_mm);
  put("accel_mm_per_frame2", accel_mm);
  put("fid", fid);
  put("diversity", diversity);
  put("mmodality", multimodality);
  if (r_precision) {
    j["r_precision"] = {{"top1", r_precision->top1}, {"top2", r_precision->top2}, {"top3", r_precision->top3}};
    j["mm_dist"] = r_precision->mm_dist;
    j["r_precision_batches"] = r_precision->batches;
  }
  j["samples"] = samples;
  j["n_pairs"] = n_pairs;
  j["seed"] = seed;
  return j.dump(2);
}

std::string MetricsReport::to_table() const {
  std::string out;
  char line[96];
  auto row = [&](const char* name, double v) {
    std::snprintf(line, sizeof(line), "%-22s %14.6f\n", name, v);
    out += line;
  };
  if (mpjpe_mm) {
    row("MPJPE (mm)", *mpjpe_mm);
  }
  if (pa_mpjpe_mm) {
    row("PA-MPJPE (mm)", *pa_mpjpe_mm);
  }
  if (accel_mm) {
    row("Accel (mm/frame^2)", *accel_mm);
  }
  if (fid) {
    row("FID", *fid);
  }
  if (diversity) {
    row("Diversity", *diversity);
  }
  if (multimodality) {
    row("MModality", *multimodality);
  }
  if (r_precision) {
    row("R-Precision top-1", r_precision->top1);
    row("R-Precision top-2", r_precision->top2);
    row("R-Precision top-3", r_precision->top3);
    row("MM Dist", r_precision->mm_dist);
  }
  std::snprintf(line, sizeof(line), "%-22s %14lld\n", "samples", samples);
  out += line;
  std::snprintf(line, sizeof(line), "%-22s %14llu\n", "seed", static_cast<unsigned long long>(seed));
  out += line;
  return out;
}

} // namespace socialmotion
