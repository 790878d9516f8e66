#include "socialmotion/xh3d.h"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "socialmotion/error.h"
#include "socialmotion/kinematics.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

// Rotation by -heading about Y applied to a vector.
Vec3 unrotate(double heading, const Vec3& v) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x() - s * v.z(), v.y(), s * v.x() + c * v.z()};
}

Vec3 rotate(double heading, const Vec3& v) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {c * v.x() + s * v.z(), v.y(), -s * v.x() + c * v.z()};
}

void check_features(const PersonFeatures& f) {
  if (f.joints < 2) {
    fail(ErrorCode::InvalidArgument, "features need at least 2 joints");
  }
  if (f.data.cols() != f.layout().width()) {
    fail(ErrorCode::ShapeMismatch,
         "feature width " + std::to_string(f.data.cols()) + " does not match " +
             std::to_string(f.layout().width()) + " for " + std::to_string(f.joints) + " joints");
  }
  if (f.data.rows() < 1) {
    fail(ErrorCode::InvalidArgument, "features need at least one frame");
  }
  if (!f.data.allFinite()) {
    fail(ErrorCode::NonFinite, "features contain non-finite values");
  }
}

// Cumulative heading: heading[t] = sum_{k<t} r^a(k).
std::vector<double> integrate_heading(const PersonFeatures& f) {
  std::vector<double> heading(static_cast<std::size_t>(f.frames()), 0.0);
  for (int t = 1; t < f.frames(); ++t) {
    heading[t] = heading[t - 1] + f.data(t - 1, FeatureLayout::root_angular);
  }
  return heading;
}

std::vector<Vec3> integrate_root(const PersonFeatures& f, const std::vector<double>& heading) {
  std::vector<Vec3> root(static_cast<std::size_t>(f.frames()));
  double x = 0.0;
  double z = 0.0;
  for (int t = 0; t < f.frames(); ++t) {
    root[t] = Vec3(x, f.data(t, FeatureLayout::root_height), z);
    const Vec3 step = rotate(heading[t], Vec3(f.data(t, FeatureLayout::root_linear), 0.0,
                                              f.data(t, FeatureLayout::root_linear + 1)));
    x += step.x();
    z += step.z();
  }
  return root;
}

} // namespace

std::optional<int> FeatureLayout::joints_for_width(int width) {
  if ((width + 1) % 12 != 0 || width < width_for(2)) {
    return std::nullopt;
  }
  return (width + 1) / 12;
}

void SocialFeatures::validate() const {
  if (persons.empty()) {
    fail(ErrorCode::InvalidArgument, "social features hold no persons");
  }
  if (relposes.size() + 1 != persons.size()) {
    fail(ErrorCode::ShapeMismatch, "relative pose count must be person count - 1");
  }
  if (!order.empty() && order.size() != persons.size()) {
    fail(ErrorCode::ShapeMismatch, "person order size does not match person count");
  }
  for (const auto& p : persons) {
    check_features(p);
    if (p.frames() != persons.front().frames()) {
      fail(ErrorCode::ShapeMismatch, "persons must share the frame count");
    }
  }
  for (const auto& r : relposes) {
    if (!std::isfinite(r.x) || !std::isfinite(r.z) || !std::isfinite(r.theta)) {
      fail(ErrorCode::NonFinite, "relative pose is non-finite");
    }
  }
}

PlanarTransform first_frame_pose(const RawMotion& motion, const SkeletonDef& skeleton) {
  motion.validate();
  const JointPositions p0 = forward_kinematics(motion.slice(0, 1), skeleton);
  const double yaw = facing_yaw(p0, 0, skeleton);
  return {motion.root_translation[0].x(), motion.root_translation[0].z(), yaw};
}

CanonicalMotion canonicalize_person(const RawMotion& motion, const SkeletonDef& skeleton) {
  const PlanarTransform pose = first_frame_pose(motion, skeleton);
  CanonicalMotion out{transform_motion(motion, pose.inverse()), pose};
  // Exact zeros on frame 0 rather than round-off residue.
  out.motion.root_translation[0].x() = 0.0;
  out.motion.root_translation[0].z() = 0.0;
  return out;
}

Eigen::MatrixXd detect_foot_contacts(const JointPositions& p, const SkeletonDef& s, double threshold) {
  if (p.joints != s.joint_count()) {
    fail(ErrorCode::ShapeMismatch, "positions do not match the skeleton joint count");
  }
  const std::array<int, 4> feet{s.heels[0], s.toes[0], s.heels[1], s.toes[1]};
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(p.frames, 4);
  for (int t = 0; t + 1 < p.frames; ++t) {
    for (int k = 0; k < 4; ++k) {
      const double d2 = (p.at(t + 1, feet[k]) - p.at(t, feet[k])).squaredNorm();
      c(t, k) = d2 < threshold ? 1.0 : 0.0;
    }
  }
  if (p.frames >= 2) {
    c.row(p.frames - 1) = c.row(p.frames - 2);
  }
  return c;
}

PersonFeatures encode_person_h3d(const RawMotion& m, const SkeletonDef& s, const CodecOptions& options) {
  m.validate();
  if (m.frames() < 2) {
    fail(ErrorCode::InvalidArgument, "encoding needs at least 2 frames");
  }
  const JointPositions pos = forward_kinematics(m, s);
  const int frames = m.frames();
  const int j = s.joint_count();
  const double yaw0 = facing_yaw(pos, 0, s);
  if (std::abs(m.root_translation[0].x()) > 1e-6 || std::abs(m.root_translation[0].z()) > 1e-6 ||
      std::abs(yaw0) > 1e-6) {
    fail(ErrorCode::InvalidArgument, "motion is not canonical at frame 0; canonicalize it first");
  }

  PersonFeatures f;
  f.joints = j;
  f.fps = m.fps;
  const FeatureLayout layout{j};
  f.data = Eigen::MatrixXd::Zero(frames, layout.width());

  std::vector<double> yaw(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    yaw[t] = facing_yaw(pos, t, s);
  }
  for (int t = 0; t + 1 < frames; ++t) {
    f.data(t, FeatureLayout::root_angular) = wrap_angle(yaw[t + 1] - yaw[t]);
  }
  f.data(frames - 1, FeatureLayout::root_angular) = f.data(frames - 2, FeatureLayout::root_angular);
  // Frames are expressed against the heading the decoder will integrate.
  const std::vector<double> heading = integrate_heading(f);

  const int jp = FeatureLayout::local_positions;
  const int jv = layout.local_velocities();
  const int jr = layout.local_rotations();
  for (int t = 0; t < frames; ++t) {
    const Vec3& root = pos.at(t, 0);
    const int base = t + 1 < frames ? t : t - 1; // last frame repeats the previous velocity
    const Vec3 lin = unrotate(heading[base], pos.at(base + 1, 0) - pos.at(base, 0));
    f.data(t, FeatureLayout::root_linear) = lin.x();
    f.data(t, FeatureLayout::root_linear + 1) = lin.z();
    f.data(t, FeatureLayout::root_height) = root.y();
    for (int k = 1; k < j; ++k) {
      const Vec3 local = unrotate(heading[t], pos.at(t, k) - root);
      f.data.block<1, 3>(t, jp + 3 * (k - 1)) = local.transpose();
    }
    for (int k = 0; k < j; ++k) {
      const Vec3 vel = unrotate(heading[base], pos.at(base + 1, k) - pos.at(base, k));
      f.data.block<1, 3>(t, jv + 3 * k) = vel.transpose();
    }
    for (int k = 1; k < j; ++k) {
      const Rot6D r = quat_to_rot6d(m.rotation(t, k));
      for (int c = 0; c < 6; ++c) {
        f.data(t, jr + 6 * (k - 1) + c) = r.v[c];
      }
    }
  }
  f.data.rightCols(4) = detect_foot_contacts(pos, s, options.contact_threshold);
  return f;
}

JointPositions decode_person_positions(const PersonFeatures& f) {
  check_features(f);
  const std::vector<double> heading = integrate_heading(f);
  const std::vector<Vec3> root = integrate_root(f, heading);
  JointPositions out(f.frames(), f.joints);
  for (int t = 0; t < f.frames(); ++t) {
    out.at(t, 0) = root[t];
    for (int k = 1; k < f.joints; ++k) {
      const Vec3 local = f.data.block<1, 3>(t, FeatureLayout::local_positions + 3 * (k - 1)).transpose();
      out.at(t, k) = rotate(heading[t], local) + root[t];
    }
  }
  return out;
}

RawMotion decode_person_h3d(const PersonFeatures& f, const SkeletonDef& s) {
  check_features(f);
  if (f.joints != s.joint_count()) {
    fail(ErrorCode::ShapeMismatch, "feature joint count does not match the skeleton");
  }
  const FeatureLayout layout = f.layout();
  const std::vector<double> heading = integrate_heading(f);
  const std::vector<Vec3> root = integrate_root(f, heading);

  std::vector<int> root_children;
  for (int k = 1; k < s.joint_count(); ++k) {
    if (s.parents[k] == 0) {
      root_children.push_back(k);
    }
  }

  RawMotion m(f.frames(), f.joints, f.fps);
  for (int t = 0; t < f.frames(); ++t) {
    m.root_translation[t] = root[t];
    for (int k = 1; k < f.joints; ++k) {
      Rot6D r;
      for (int c = 0; c < 6; ++c) {
        r.v[c] = f.data(t, layout.local_rotations() + 6 * (k - 1) + c);
      }
      m.rotation(t, k) = rot6d_to_quat(r);
    }

    Quat root_rot = yaw_rotation(heading[t]);
    if (root_children.size() >= 2) {
      Mat3 h = Mat3::Zero();
      for (int k : root_children) {
        const Vec3 local =
            f.data.block<1, 3>(t, FeatureLayout::local_positions + 3 * (k - 1)).transpose();
        h += s.offsets[k] * rotate(heading[t], local).transpose();
      }
      Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::Vector3d sv = svd.singularValues();
      if (sv(1) > 1e-9 * std::max(sv(0), 1e-12)) {
        Mat3 d = Mat3::Identity();
        d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
        root_rot = Quat(svd.matrixV() * d * svd.matrixU().transpose()).normalized();
      }
    }
    m.rotation(t, 0) = root_rot;
  }
  return m;
}

RelPose compute_relative_pose(const RawMotion& reference, const RawMotion& other, const SkeletonDef& s) {
  const PlanarTransform ref = first_frame_pose(reference, s);
  const PlanarTransform oth = first_frame_pose(other, s);
  const PlanarTransform rel = ref.inverse().compose(oth);
  return {rel.x, rel.z, wrap_angle(rel.yaw)};
}

SocialFeatures encode_social(const SocialMotion& scene, const SkeletonDef& s, ReferenceChoice reference,
                             const CodecOptions& options) {
  scene.validate();
  const int n = static_cast<int>(scene.persons.size());
  int ref = 0;
  if (reference.index) {
    ref = *reference.index;
    if (ref < 0 || ref >= n) {
      fail(ErrorCode::OutOfRange, "reference index " + std::to_string(ref) + " outside the scene");
    }
  } else {
    Rng rng(reference.seed);
    ref = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
  }

  SocialFeatures out;
  out.fps = scene.fps;
  out.order.push_back(ref);
  for (int i = 0; i < n; ++i) {
    if (i != ref) {
      out.order.push_back(i);
    }
  }
  for (int k = 0; k < n; ++k) {
    const RawMotion& person = scene.persons[out.order[k]];
    out.persons.push_back(encode_person_h3d(canonicalize_person(person, s).motion, s, options));
    if (k > 0) {
      out.relposes.push_back(compute_relative_pose(scene.persons[ref], person, s));
    }
  }
  return out;
}

SocialMotion decode_social(const SocialFeatures& f, const SkeletonDef& s) {
  f.validate();
  SocialMotion scene;
  scene.fps = f.fps;
  for (std::size_t k = 0; k < f.persons.size(); ++k) {
    RawMotion m = decode_person_h3d(f.persons[k], s);
    m.fps = f.fps;
    if (k > 0) {
      m = transform_motion(m, f.relposes[k - 1].as_transform());
    }
    scene.persons.push_back(std::move(m));
  }
  return scene;
}

std::vector<JointPositions> decode_social_positions(const SocialFeatures& f) {
  f.validate();
  std::vector<JointPositions> out;
  for (std::size_t k = 0; k < f.persons.size(); ++k) {
    JointPositions p = decode_person_positions(f.persons[k]);
    if (k > 0) {
      p = transform_positions(p, f.relposes[k - 1].as_transform());
    }
    out.push_back(std::move(p));
  }
  return out;
}

} // namespace socialmotion
