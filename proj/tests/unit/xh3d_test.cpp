#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <Eigen/Geometry>

#include "socialmotion/error.h"
#include "socialmotion/kinematics.h"
#include "socialmotion/xh3d.h"
#include "test_support.h"

namespace socialmotion {
namespace {

constexpr double kPi = std::numbers::pi;

RawMotion standing(int frames, const SkeletonDef& s = default_skeleton()) {
  RawMotion m(frames, s.joint_count(), 20.0);
  for (int t = 0; t < frames; ++t) {
    m.root_translation[t] = Vec3(0.0, 0.9, 0.0);
  }
  return m;
}

double heading_of(const Quat& q) {
  const Vec3 f = q * Vec3::UnitZ();
  return std::atan2(f.x(), f.z());
}

double max_position_error(const JointPositions& a, const JointPositions& b) {
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.joints, b.joints);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, (a.data[i] - b.data[i]).norm());
  }
  return worst;
}

// Five-joint body: root, two hips, two feet.
SkeletonDef toy_skeleton() {
  SkeletonDef s;
  s.id = "toy5";
  s.joint_names = {"root", "l_hip", "r_hip", "l_foot", "r_foot"};
  s.parents = {-1, 0, 0, 1, 2};
  s.offsets = {Vec3::Zero(), Vec3(0.1, -0.05, 0), Vec3(-0.1, -0.05, 0), Vec3(0, -0.8, 0.05), Vec3(0, -0.8, 0.05)};
  s.heels = {3, 4};
  s.toes = {3, 4};
  s.hips = {1, 2};
  s.shoulders = {1, 2};
  s.validate();
  return s;
}

TEST(FeatureLayout, WidthFormula) {
  EXPECT_EQ(FeatureLayout::width_for(22), 263);
  EXPECT_EQ(FeatureLayout::width_for(5), 59);
  for (int j = 2; j < 40; ++j) {
    EXPECT_EQ(FeatureLayout::width_for(j), 12 * j - 1);
    EXPECT_EQ(FeatureLayout::joints_for_width(12 * j - 1), j);
  }
  EXPECT_FALSE(FeatureLayout::joints_for_width(264).has_value());
}

TEST(Canonicalize, CanonicalMotionIsFixedPoint) {
  const RawMotion m = standing(10);
  const CanonicalMotion c = canonicalize_person(m, default_skeleton());
  EXPECT_NEAR(c.removed.x, 0.0, 1e-12);
  EXPECT_NEAR(c.removed.z, 0.0, 1e-12);
  EXPECT_NEAR(c.removed.yaw, 0.0, 1e-12);
  for (int t = 0; t < m.frames(); ++t) {
    EXPECT_LT((c.motion.root_translation[t] - m.root_translation[t]).norm(), 1e-12);
  }
}

TEST(Canonicalize, InvariantUnderPlanarTransforms) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(3);
  const SceneFile scene = testing::random_synth_scene(rng, 1, 80);
  const RawMotion& m = scene.motion.persons[0];
  const CanonicalMotion base = canonicalize_person(m, s);
  for (int trial = 0; trial < 20; ++trial) {
    const PlanarTransform t{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-kPi, kPi)};
    const CanonicalMotion moved = canonicalize_person(transform_motion(m, t), s);
    const JointPositions a = forward_kinematics(base.motion, s);
    const JointPositions b = forward_kinematics(moved.motion, s);
    EXPECT_LT(max_position_error(a, b), 1e-9);

    const JointPositions p = forward_kinematics(moved.motion, s);
    EXPECT_LT(std::abs(moved.motion.root_translation[0].x()), 1e-9);
    EXPECT_LT(std::abs(moved.motion.root_translation[0].z()), 1e-9);
    EXPECT_LT(std::abs(facing_yaw(p, 0, s)), 1e-9);

    // original = removed.apply(canonical)
    const JointPositions back = transform_positions(p, moved.removed);
    EXPECT_LT(max_position_error(back, forward_kinematics(transform_motion(m, t), s)), 1e-9);
  }
}

TEST(EncodePerson, StaticPose) {
  const SkeletonDef& s = default_skeleton();
  const PersonFeatures f = encode_person_h3d(standing(50), s);
  const FeatureLayout l = f.layout();
  ASSERT_EQ(f.data.cols(), 263);
  ASSERT_EQ(f.frames(), 50);
  for (int t = 0; t < 50; ++t) {
    EXPECT_EQ(f.data(t, FeatureLayout::root_angular), 0.0);
    EXPECT_EQ(f.data(t, FeatureLayout::root_linear), 0.0);
    EXPECT_EQ(f.data(t, FeatureLayout::root_linear + 1), 0.0);
    EXPECT_NEAR(f.data(t, FeatureLayout::root_height), 0.9, 1e-15);
    for (int k = 0; k < 3 * s.joint_count(); ++k) {
      EXPECT_EQ(f.data(t, l.local_velocities() + k), 0.0);
    }
    for (int k = 0; k < 4; ++k) {
      EXPECT_EQ(f.data(t, l.contacts() + k), 1.0);
    }
  }
}

TEST(EncodePerson, StraightWalkAlongZ) {
  const SkeletonDef& s = default_skeleton();
  RawMotion m = standing(40);
  const double speed = 1.0;
  for (int t = 0; t < 40; ++t) {
    m.root_translation[t].z() = speed * t / m.fps;
  }
  const PersonFeatures f = encode_person_h3d(m, s);
  for (int t = 0; t < 40; ++t) {
    EXPECT_NEAR(f.data(t, FeatureLayout::root_linear + 1), 0.05, 1e-12);
    EXPECT_NEAR(f.data(t, FeatureLayout::root_linear), 0.0, 1e-12);
    EXPECT_NEAR(f.data(t, FeatureLayout::root_angular), 0.0, 1e-12);
  }
}

TEST(EncodePerson, RejectsNonCanonicalInput) {
  RawMotion m = standing(5);
  for (auto& p : m.root_translation) {
    p.x() += 1.0;
  }
  try {
    encode_person_h3d(m, default_skeleton());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  EXPECT_THROW(encode_person_h3d(standing(1), default_skeleton()), Error);
}

TEST(EncodePerson, InvariantUnderPlanarTransforms) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(4);
  const SceneFile scene = testing::random_synth_scene(rng, 1, 60);
  const RawMotion& m = scene.motion.persons[0];
  const PersonFeatures base = encode_person_h3d(canonicalize_person(m, s).motion, s);
  for (int trial = 0; trial < 10; ++trial) {
    const PlanarTransform t{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-kPi, kPi)};
    const PersonFeatures f = encode_person_h3d(canonicalize_person(transform_motion(m, t), s).motion, s);
    EXPECT_LT((f.data - base.data).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(FootContacts, StaticPoseAllOnes) {
  const SkeletonDef& s = default_skeleton();
  const Eigen::MatrixXd c = detect_foot_contacts(forward_kinematics(standing(12), s), s);
  EXPECT_EQ(c.rows(), 12);
  EXPECT_EQ(c.cols(), 4);
  EXPECT_EQ(c.minCoeff(), 1.0);
}

TEST(FootContacts, HopZeroesAirborneFrames) {
  const SkeletonDef& s = default_skeleton();
  RawMotion m = standing(40);
  // Frames 10..19 each move 0.5 m to the next frame.
  for (int t = 1; t < 40; ++t) {
    const bool airborne = t - 1 >= 10 && t - 1 < 20;
    m.root_translation[t] = m.root_translation[t - 1] + (airborne ? Vec3(0.3, 0.4, 0.0) : Vec3::Zero());
  }
  const JointPositions p = forward_kinematics(m, s);
  const Eigen::MatrixXd c = detect_foot_contacts(p, s);
  const std::array<int, 4> feet{s.heels[0], s.toes[0], s.heels[1], s.toes[1]};
  for (int t = 0; t < 40; ++t) {
    const int src = std::min(t, 38);
    for (int k = 0; k < 4; ++k) {
      const double d2 = (p.at(src + 1, feet[k]) - p.at(src, feet[k])).squaredNorm();
      const double oracle = d2 < 2e-3 ? 1.0 : 0.0;
      EXPECT_EQ(c(t, k), oracle) << "frame " << t;
      EXPECT_EQ(c(t, k), (t >= 10 && t < 20) ? 0.0 : 1.0) << "frame " << t;
    }
  }
}

TEST(FootContacts, ShapeMismatch) {
  JointPositions p(3, 5);
  EXPECT_THROW(detect_foot_contacts(p, default_skeleton()), Error);
}

TEST(DecodePerson, RoundTripOnSyntheticSequences) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const SceneFile scene = testing::random_synth_scene(rng, 1, 200);
    RawMotion m = scene.motion.persons[0];
    if (m.frames() > 200) {
      m = m.slice(0, 200);
    }
    const RawMotion canonical = canonicalize_person(m, s).motion;
    const PersonFeatures f = encode_person_h3d(canonical, s);
    const RawMotion back = decode_person_h3d(f, s);
    EXPECT_LT(max_position_error(forward_kinematics(back, s), forward_kinematics(canonical, s)), 1e-4);
    EXPECT_LT(max_position_error(decode_person_positions(f), forward_kinematics(canonical, s)), 1e-4);
  }
}

TEST(DecodePerson, ZeroMotionStaysPut) {
  const SkeletonDef& s = default_skeleton();
  PersonFeatures f = encode_person_h3d(standing(30), s);
  const RawMotion m = decode_person_h3d(f, s);
  for (int t = 0; t < 30; ++t) {
    EXPECT_LT((m.root_translation[t] - Vec3(0, 0.9, 0)).norm(), 1e-12);
  }
}

TEST(DecodePerson, HeadingIntegratesAngularVelocity) {
  const SkeletonDef& s = default_skeleton();
  PersonFeatures f = encode_person_h3d(standing(101), s);
  for (int t = 0; t < 100; ++t) {
    f.data(t, FeatureLayout::root_angular) = kPi / 100.0;
  }
  const RawMotion m = decode_person_h3d(f, s);
  // yaw(t) is the sum of the first t increments
  EXPECT_NEAR(heading_of(m.rotation(0, 0)), 0.0, 1e-12);
  EXPECT_NEAR(heading_of(m.rotation(50, 0)), kPi / 2.0, 1e-9);
  EXPECT_NEAR(std::abs(wrap_angle(heading_of(m.rotation(100, 0)) - kPi)), 0.0, 1e-6);
}

TEST(DecodePerson, RejectsBadFeatures) {
  const SkeletonDef& s = default_skeleton();
  PersonFeatures f = encode_person_h3d(standing(8), s);
  PersonFeatures narrow = f;
  narrow.data.conservativeResize(Eigen::NoChange, 262);
  EXPECT_THROW(decode_person_h3d(narrow, s), Error);
  f.data(3, 5) = std::nan("");
  EXPECT_THROW(decode_person_h3d(f, s), Error);
}

TEST(RelativePose, CoincidentIsIdentity) {
  const SkeletonDef& s = default_skeleton();
  const RawMotion m = transform_motion(standing(2), {1.5, -2.0, 0.7});
  const RelPose r = compute_relative_pose(m, m, s);
  EXPECT_NEAR(r.x, 0.0, 1e-12);
  EXPECT_NEAR(r.z, 0.0, 1e-12);
  EXPECT_NEAR(r.theta, 0.0, 1e-12);
}

TEST(RelativePose, CanonicalReference) {
  const SkeletonDef& s = default_skeleton();
  const RawMotion ref = standing(2);
  RawMotion other = standing(2);
  for (int t = 0; t < 2; ++t) {
    other.root_translation[t] = Vec3(1.0, 0.9, 2.0);
    other.rotation(t, 0) = yaw_rotation(kPi / 2);
  }
  const RelPose r = compute_relative_pose(ref, other, s);
  EXPECT_NEAR(r.x, 1.0, 1e-12);
  EXPECT_NEAR(r.z, 2.0, 1e-12);
  EXPECT_NEAR(r.theta, kPi / 2, 1e-12);
}

TEST(RelativePose, RotatedReferenceMatchesMatrixOracle) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const double yaw = trial == 0 ? kPi / 2 : rng.uniform(-kPi, kPi);
    const Vec3 origin(rng.uniform(-3, 3), 0.9, rng.uniform(-3, 3));
    const Vec3 offset = trial == 0 ? Vec3(1, 0, 0) : Vec3(rng.uniform(-3, 3), 0, rng.uniform(-3, 3));
    RawMotion ref = standing(1);
    RawMotion other = standing(1);
    ref.root_translation[0] = origin;
    ref.rotation(0, 0) = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitY()));
    other.root_translation[0] = origin + offset;
    other.rotation(0, 0) = ref.rotation(0, 0);
    const Vec3 expected = Eigen::AngleAxisd(-yaw, Vec3::UnitY()).toRotationMatrix() * offset;
    const RelPose r = compute_relative_pose(ref, other, s);
    EXPECT_NEAR(r.x, expected.x(), 1e-9);
    EXPECT_NEAR(r.z, expected.z(), 1e-9);
    EXPECT_NEAR(r.theta, 0.0, 1e-9);
  }
}

TEST(EncodeSocial, SinglePersonHasNoRelativePoses) {
  SocialMotion scene;
  scene.persons.push_back(standing(10));
  const SocialFeatures f = encode_social(scene, default_skeleton());
  EXPECT_EQ(f.persons.size(), 1u);
  EXPECT_TRUE(f.relposes.empty());
  EXPECT_EQ(f.order, std::vector<int>{0});
}

TEST(EncodeSocial, RejectsBadScenes) {
  SocialMotion empty;
  EXPECT_THROW(encode_social(empty, default_skeleton()), Error);
  SocialMotion mismatch;
  mismatch.persons = {standing(10), standing(11)};
  EXPECT_THROW(encode_social(mismatch, default_skeleton()), Error);
  SocialMotion ok;
  ok.persons = {standing(10), standing(10)};
  EXPECT_THROW(encode_social(ok, default_skeleton(), ReferenceChoice::fixed(2)), Error);
}

TEST(EncodeSocial, ThreePersonPlacement) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(7);
  const SceneFile scene = testing::random_synth_scene(rng, 3, 120);
  const SocialFeatures f = encode_social(scene.motion, s, ReferenceChoice::fixed(1));
  ASSERT_EQ(f.relposes.size(), 2u);
  EXPECT_EQ(f.order[0], 1);
  const auto decoded = decode_social_positions(f);
  const PlanarTransform ref = first_frame_pose(scene.motion.persons[1], s);
  for (std::size_t k = 0; k < f.order.size(); ++k) {
    const JointPositions original = transform_positions(
        forward_kinematics(scene.motion.persons[static_cast<std::size_t>(f.order[k])], s), ref.inverse());
    EXPECT_LT(max_position_error(decoded[k], original), 1e-6);
  }
}

TEST(EncodeSocial, FeaturesArePersonLocal) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(8);
  const SceneFile scene = testing::random_synth_scene(rng, 3, 60);
  SocialMotion permuted;
  permuted.fps = scene.motion.fps;
  permuted.persons = {scene.motion.persons[2], scene.motion.persons[0], scene.motion.persons[1]};
  const SocialFeatures a = encode_social(scene.motion, s, ReferenceChoice::fixed(0));
  const SocialFeatures b = encode_social(permuted, s, ReferenceChoice::fixed(1));
  ASSERT_EQ(a.persons.size(), b.persons.size());
  // permuted[i] holds original person from_permuted[i]
  const std::array<int, 3> from_permuted{2, 0, 1};
  for (std::size_t k = 0; k < b.persons.size(); ++k) {
    const int original = from_permuted[static_cast<std::size_t>(b.order[k])];
    const auto ka = static_cast<std::size_t>(std::find(a.order.begin(), a.order.end(), original) - a.order.begin());
    EXPECT_TRUE(a.persons[ka].data == b.persons[k].data) << "person " << original;
  }
}

TEST(EncodeSocial, RandomReferenceIsSeeded) {
  Rng rng(9);
  const SceneFile scene = testing::random_synth_scene(rng, 4, 40);
  const SocialFeatures a = encode_social(scene.motion, default_skeleton(), ReferenceChoice::random(5));
  const SocialFeatures b = encode_social(scene.motion, default_skeleton(), ReferenceChoice::random(5));
  EXPECT_EQ(a.order, b.order);
}

TEST(DecodeSocial, PreservesPairwiseDistances) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(4));
    const SceneFile scene = testing::random_synth_scene(rng, n, 60);
    const SocialFeatures f = encode_social(scene.motion, s, ReferenceChoice::random(rng.next_u64()));
    const SocialMotion decoded = decode_social(f, s);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const Vec3 da = decoded.persons[a].root_translation[0] - decoded.persons[b].root_translation[0];
        const Vec3 oa = scene.motion.persons[f.order[a]].root_translation[0] -
                        scene.motion.persons[f.order[b]].root_translation[0];
        EXPECT_NEAR(std::hypot(da.x(), da.z()), std::hypot(oa.x(), oa.z()), 1e-6);
      }
    }
  }
}

TEST(DecodeSocial, IdentityRelativePoseCoincides) {
  const SkeletonDef& s = default_skeleton();
  SocialMotion scene;
  scene.persons = {standing(6), standing(6)};
  SocialFeatures f = encode_social(scene, s);
  f.relposes[0] = RelPose{};
  const auto p = decode_social_positions(f);
  EXPECT_LT(max_position_error(p[0], p[1]), 1e-12);
}

TEST(DecodeSocial, ReferenceChangeIsOneRigidTransform) {
  const SkeletonDef& s = default_skeleton();
  Rng rng(11);
  const SceneFile scene = testing::random_synth_scene(rng, 4, 60);
  const SocialFeatures a = encode_social(scene.motion, s, ReferenceChoice::fixed(0));
  const SocialFeatures b = encode_social(scene.motion, s, ReferenceChoice::fixed(3));
  const auto pa = decode_social_positions(a);
  const auto pb = decode_social_positions(b);
  // Gather both decodes in input-person order.
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
  for (std::size_t k = 0; k < a.order.size(); ++k) {
    const auto kb = static_cast<std::size_t>(
        std::find(b.order.begin(), b.order.end(), a.order[k]) - b.order.begin());
    src.insert(src.end(), pb[kb].data.begin(), pb[kb].data.end());
    dst.insert(dst.end(), pa[k].data.begin(), pa[k].data.end());
  }
  const PlanarTransform t = testing::fit_planar_rigid(src, dst);
  for (std::size_t i = 0; i < src.size(); ++i) {
    EXPECT_LT((t.apply(src[i]) - dst[i]).norm(), 1e-6);
  }
}

TEST(ToySkeleton, FiveJointRoundTrip) {
  const SkeletonDef s = toy_skeleton();
  RawMotion m = standing(24, s);
  for (int t = 0; t < 24; ++t) {
    m.root_translation[t] = Vec3(0.02 * t, 0.9, 0.03 * t);
    m.rotation(t, 0) = yaw_rotation(0.01 * t);
    m.rotation(t, 1) = Quat(Eigen::AngleAxisd(0.2 * std::sin(0.3 * t), Vec3::UnitX()));
    m.rotation(t, 2) = Quat(Eigen::AngleAxisd(-0.2 * std::sin(0.3 * t), Vec3::UnitX()));
  }
  const RawMotion c = canonicalize_person(m, s).motion;
  const PersonFeatures f = encode_person_h3d(c, s);
  EXPECT_EQ(f.data.cols(), 59);
  EXPECT_LT(max_position_error(forward_kinematics(decode_person_h3d(f, s), s), forward_kinematics(c, s)), 1e-9);
}

} // namespace
} // namespace socialmotion
