#include "socialmotion/synth.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"

namespace socialmotion {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kStride = 1.3; // meters per gait cycle

const char* const kCountWords[] = {"zero", "one", "two", "three", "four", "five"};

Quat axis_angle(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis));
}

struct Pose {
  Vec3 root = Vec3::Zero(); // ground-plane position (y ignored)
  double yaw = 0.0;
  double gait = 0.0; // 0 standing, 1 walking
  double phase = 0.0; // gait cycle angle
};

enum class Gesture { None, Handshake, WaveRight, Lean };

struct Joints {
  int spine1 = 3;
  int l_hip = 1, r_hip = 2, l_knee = 4, r_knee = 5;
  int l_shoulder = 16, r_shoulder = 17, l_elbow = 18, r_elbow = 19;
  int neck = 12;
};

Joints joints_for(const SkeletonDef& s) {
  Joints j;
  j.l_hip = s.hips[0];
  j.r_hip = s.hips[1];
  j.l_shoulder = s.shoulders[0];
  j.r_shoulder = s.shoulders[1];
  auto child_of = [&s](int parent) {
    for (int c = 0; c < s.joint_count(); ++c) {
      if (s.parents[c] == parent) {
        return c;
      }
    }
    return -1;
  };
  j.l_knee = child_of(j.l_hip);
  j.r_knee = child_of(j.r_hip);
  j.l_elbow = child_of(j.l_shoulder);
  j.r_elbow = child_of(j.r_shoulder);
  j.spine1 = -1;
  for (int c = 1; c < s.joint_count(); ++c) {
    if (s.parents[c] == 0 && c != j.l_hip && c != j.r_hip) {
      j.spine1 = c;
      break;
    }
  }
  return j;
}

double standing_height(const SkeletonDef& s) {
  double h = 0.06;
  for (int cur = s.heels[0]; cur > 0; cur = s.parents[cur]) {
    h -= s.offsets[cur].y();
  }
  return h;
}

void write_frame(RawMotion& m, int f, const Pose& p, Gesture gesture, double t, double amp, double height,
                 const SkeletonDef& s, const Joints& jn) {
  const Vec3 x_axis = Vec3::UnitX();
  const Vec3 z_axis = Vec3::UnitZ();
  const double swing = 0.45 * amp * p.gait * std::sin(p.phase);
  const double bob = 0.012 * p.gait * std::abs(std::cos(p.phase));
  const double breathe = 0.02 * std::sin(2.0 * kPi * 0.3 * t);

  m.root_translation[f] = Vec3(p.root.x(), height + bob, p.root.z());
  m.rotation(f, 0) = yaw_rotation(p.yaw);
  m.rotation(f, jn.l_hip) = axis_angle(x_axis, -swing);
  m.rotation(f, jn.r_hip) = axis_angle(x_axis, swing);
  if (jn.l_knee > 0) {
    m.rotation(f, jn.l_knee) = axis_angle(x_axis, 0.6 * amp * p.gait * std::max(0.0, std::sin(p.phase + 1.2)) + 0.05);
  }
  if (jn.r_knee > 0) {
    m.rotation(f, jn.r_knee) = axis_angle(x_axis, 0.6 * amp * p.gait * std::max(0.0, -std::sin(p.phase + 1.2)) + 0.05);
  }
  if (jn.spine1 > 0) {
    const double lean = gesture == Gesture::Lean ? 0.35 : 0.04 * p.gait;
    m.rotation(f, jn.spine1) = axis_angle(x_axis, lean + breathe);
  }
  const double arm_down = 1.25;
  Quat l_sh = axis_angle(x_axis, 0.5 * swing) * axis_angle(z_axis, -arm_down);
  Quat r_sh = axis_angle(x_axis, -0.5 * swing) * axis_angle(z_axis, arm_down);
  Quat l_el = axis_angle(Vec3::UnitY(), 0.15);
  Quat r_el = axis_angle(Vec3::UnitY(), -0.15);
  switch (gesture) {
    case Gesture::Handshake:
      r_sh = axis_angle(x_axis, -0.9) * axis_angle(z_axis, arm_down);
      r_el = axis_angle(Vec3::UnitY(), -0.4 - 0.15 * std::sin(2.0 * kPi * 2.0 * t));
      break;
    case Gesture::WaveRight:
      r_sh = axis_angle(z_axis, -1.1 * amp);
      r_el = axis_angle(z_axis, -0.5 - 0.45 * std::sin(2.0 * kPi * 1.5 * t));
      break;
    case Gesture::Lean:
      l_sh = axis_angle(x_axis, -0.5) * axis_angle(z_axis, -arm_down + 0.3);
      r_sh = axis_angle(x_axis, -0.5) * axis_angle(z_axis, arm_down - 0.3);
      break;
    case Gesture::None:
      break;
  }
  m.rotation(f, jn.l_shoulder) = l_sh;
  m.rotation(f, jn.r_shoulder) = r_sh;
  if (jn.l_elbow > 0) {
    m.rotation(f, jn.l_elbow) = l_el;
  }
  if (jn.r_elbow > 0) {
    m.rotation(f, jn.r_elbow) = r_el;
  }
  if (jn.neck > 0 && jn.neck < s.joint_count()) {
    m.rotation(f, jn.neck) = axis_angle(Vec3::UnitY(), 0.1 * std::sin(2.0 * kPi * 0.2 * t + amp));
  }
}

std::string caption_for(SynthPattern pattern, int n, Rng& rng) {
  const std::string count = kCountWords[n];
  const std::string people = n == 1 ? "person" : "people";
  const bool alt = rng.uniform() < 0.5;
  switch (pattern) {
    case SynthPattern::Approach:
      return alt ? count + " " + people + " walk toward each other and shake hands"
                 : count + " " + people + " approach one another and greet";
    case SynthPattern::CircleWalk:
      if (n == 1) {
        return alt ? "one person walks around in a circle" : "one person walks in a circle";
      }
      return alt ? count + " " + people + " walk around together in a circle"
                 : count + " " + people + " walk in a circle one after another";
    case SynthPattern::Wave:
      if (n == 1) {
        return alt ? "one person stands still and waves" : "one person waves with the right hand";
      }
      return alt ? count + " " + people + " stand side by side and wave"
                 : count + " " + people + " wave with their right hands";
    case SynthPattern::Follow:
      return alt ? count + " " + people + " walk in a line following the leader"
                 : count + " " + people + " walk in single file";
    case SynthPattern::Huddle:
      return alt ? count + " " + people + " gather into a huddle"
                 : count + " " + people + " come together and lean into a huddle";
  }
  return count + " " + people;
}

} // namespace

std::string_view pattern_name(SynthPattern p) {
  switch (p) {
    case SynthPattern::Approach:
      return "approach";
    case SynthPattern::CircleWalk:
      return "circle-walk";
    case SynthPattern::Wave:
      return "wave";
    case SynthPattern::Follow:
      return "follow";
    case SynthPattern::Huddle:
      return "huddle";
  }
  return "unknown";
}

SynthPattern parse_pattern(std::string_view name) {
  for (SynthPattern p : kSynthPatterns) {
    if (pattern_name(p) == name) {
      return p;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown synthetic pattern '" + std::string(name) + "'");
}

std::pair<int, int> pattern_person_range(SynthPattern p) {
  switch (p) {
    case SynthPattern::Approach:
      return {2, 5};
    case SynthPattern::CircleWalk:
      return {1, 5};
    case SynthPattern::Wave:
      return {1, 5};
    case SynthPattern::Follow:
      return {2, 4};
    case SynthPattern::Huddle:
      return {2, 5};
  }
  return {1, 1};
}

double min_root_distance(const SocialMotion& scene) {
  double best = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(scene.persons.size());
  for (int f = 0; f < scene.frames(); ++f) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const Vec3 d = scene.persons[a].root_translation[f] - scene.persons[b].root_translation[f];
        best = std::min(best, std::hypot(d.x(), d.z()));
      }
    }
  }
  return best;
}

SceneFile synth_scene(const SynthSpec& spec, const SkeletonDef& skeleton) {
  const auto [lo, hi] = pattern_person_range(spec.pattern);
  if (spec.persons < lo || spec.persons > hi) {
    fail(ErrorCode::Infeasible, "pattern '" + std::string(pattern_name(spec.pattern)) + "' supports " +
                                    std::to_string(lo) + "-" + std::to_string(hi) + " persons, got " +
                                    std::to_string(spec.persons));
  }
  if (!(spec.duration_s >= 2.0)) {
    fail(ErrorCode::InvalidArgument, "synth_scene: duration must be at least 2 s");
  }
  if (!(spec.walk_speed > 0.0) || !(spec.fps > 0.0)) {
    fail(ErrorCode::InvalidArgument, "synth_scene: walk speed and fps must be positive");
  }
  skeleton.validate();
  Rng rng(spec.seed);
  const int n = spec.persons;
  const int frames = static_cast<int>(std::lround(spec.duration_s * spec.fps));
  const double v = spec.walk_speed;
  const double height = standing_height(skeleton);
  const Joints jn = joints_for(skeleton);
  const double cadence = v / kStride; // cycles per second
  const double heading = rng.uniform(-kPi, kPi);
  const Vec3 center(rng.uniform(-1.0, 1.0), 0.0, rng.uniform(-1.0, 1.0));

  std::vector<double> amp(n), phase0(n);
  for (int k = 0; k < n; ++k) {
    amp[k] = rng.uniform(0.85, 1.15);
    phase0[k] = rng.uniform(0.0, 2.0 * kPi);
  }

  SceneFile scene;
  scene.skeleton_id = skeleton.id;
  scene.motion.fps = spec.fps;
  for (int k = 0; k < n; ++k) {
    scene.motion.persons.emplace_back(frames, skeleton.joint_count(), spec.fps);
  }

  // Ring spacing keeps neighbouring roots well over 0.3 m apart.
  auto ring_radius = [n](double minimum) {
    return n == 1 ? minimum : std::max(minimum, 0.25 / std::sin(kPi / n));
  };

  for (int f = 0; f < frames; ++f) {
    const double t = f / spec.fps;
    for (int k = 0; k < n; ++k) {
      Pose p;
      Gesture gesture = Gesture::None;
      p.phase = phase0[k] + 2.0 * kPi * cadence * t;
      switch (spec.pattern) {
        case SynthPattern::CircleWalk: {
          const double radius = ring_radius(1.5);
          const double a = heading + 2.0 * kPi * k / n + v * t / radius;
          p.root = center + radius * Vec3(std::cos(a), 0.0, std::sin(a));
          p.yaw = std::atan2(-std::sin(a), std::cos(a));
          p.gait = 1.0;
          break;
        }
        case SynthPattern::Follow: {
          const double gap = 1.2;
          const Vec3 dir(std::sin(heading), 0.0, std::cos(heading));
          p.root = center + (v * t - k * gap) * dir;
          p.yaw = heading;
          p.gait = 1.0;
          break;
        }
        case SynthPattern::Approach:
        case SynthPattern::Huddle: {
          const bool huddle = spec.pattern == SynthPattern::Huddle;
          const double start = huddle ? 2.0 : 3.0;
          const double stop = ring_radius(huddle ? 0.45 : 0.6);
          const double a = heading + 2.0 * kPi * k / n;
          const Vec3 out(std::cos(a), 0.0, std::sin(a));
          const double travelled = std::min(v * t, start - stop);
          p.root = center + (start - travelled) * out;
          p.yaw = std::atan2(-out.x(), -out.z());
          p.gait = v * t < start - stop ? 1.0 : 0.0;
          if (p.gait == 0.0) {
            gesture = huddle ? Gesture::Lean : Gesture::Handshake;
          }
          break;
        }
        case SynthPattern::Wave: {
          const Vec3 across(std::cos(heading), 0.0, -std::sin(heading));
          p.root = center + (k - 0.5 * (n - 1)) * 1.0 * across;
          p.yaw = heading;
          p.gait = 0.0;
          gesture = Gesture::WaveRight;
          break;
        }
      }
      write_frame(scene.motion.persons[k], f, p, gesture, t, amp[k], height, skeleton, jn);
    }
  }
  if (n > 1 && min_root_distance(scene.motion) < 0.3) {
    fail(ErrorCode::Infeasible, "synth_scene: roots came closer than 0.3 m");
  }
  scene.captions.push_back(caption_for(spec.pattern, n, rng));
  scene.validate();
  return scene;
}

std::vector<SceneFile> synth_corpus(const SynthCorpusSpec& spec, const SkeletonDef& skeleton) {
  if (spec.scenes < 1) {
    fail(ErrorCode::InvalidArgument, "synth_corpus: need at least one scene");
  }
  if (!(spec.min_duration_s >= 2.0) || spec.max_duration_s < spec.min_duration_s) {
    fail(ErrorCode::InvalidArgument, "synth_corpus: invalid duration range");
  }
  Rng rng(spec.seed);
  std::vector<SceneFile> out;
  out.reserve(spec.scenes);
  for (int i = 0; i < spec.scenes; ++i) {
    SynthSpec s;
    s.pattern = kSynthPatterns[rng.index(std::size(kSynthPatterns))];
    const auto [lo, hi] = pattern_person_range(s.pattern);
    s.persons = lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
    s.duration_s = rng.uniform(spec.min_duration_s, spec.max_duration_s);
    s.seed = rng.next_u64();
    s.fps = spec.fps;
    s.walk_speed = rng.uniform(1.0, 1.4);
    out.push_back(synth_scene(s, skeleton));
  }
  return out;
}

} // namespace socialmotion
