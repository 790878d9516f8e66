#include "socialmotion/preprocess.h"

#include <cmath>

#include "socialmotion/error.h"

namespace socialmotion {

RawMotion resample_fps(const RawMotion& motion, double target_fps) {
  motion.validate();
  if (!(target_fps > 0.0)) {
    fail(ErrorCode::InvalidArgument, "resample_fps: target fps must be positive");
  }
  const double src = motion.fps;
  if (src < target_fps - 1e-9) {
    fail(ErrorCode::InvalidArgument, "resample_fps: upsampling from " + std::to_string(src) + " to " +
                                         std::to_string(target_fps) + " fps is not supported");
  }
  const double ratio = src / target_fps;
  const int frames = motion.frames();
  const int joints = motion.joints;
  const long long step = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(step)) < 1e-9) {
    const int out_frames = static_cast<int>((frames + step - 1) / step);
    RawMotion out(out_frames, joints, target_fps);
    for (int f = 0; f < out_frames; ++f) {
      const int s = static_cast<int>(f * step);
      out.root_translation[f] = motion.root_translation[s];
      for (int j = 0; j < joints; ++j) {
        out.rotation(f, j) = motion.rotation(s, j);
      }
    }
    return out;
  }
  const double last = static_cast<double>(frames - 1);
  const int out_frames = static_cast<int>(std::floor(last / ratio + 1e-9)) + 1;
  RawMotion out(out_frames, joints, target_fps);
  for (int f = 0; f < out_frames; ++f) {
    const double s = std::min(f * ratio, last);
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, frames - 1);
    const double a = s - i0;
    out.root_translation[f] = (1.0 - a) * motion.root_translation[i0] + a * motion.root_translation[i1];
    for (int j = 0; j < joints; ++j) {
      out.rotation(f, j) = motion.rotation(i0, j).slerp(a, motion.rotation(i1, j)).normalized();
    }
  }
  return out;
}

SocialMotion resample_fps(const SocialMotion& scene, double target_fps) {
  scene.validate();
  SocialMotion out;
  out.fps = target_fps;
  for (const RawMotion& p : scene.persons) {
    out.persons.push_back(resample_fps(p, target_fps));
  }
  return out;
}

std::vector<std::pair<int, int>> clip_ranges(int frames, double fps, double max_seconds, int min_frames) {
  if (!(fps > 0.0) || !(max_seconds > 0.0)) {
    fail(ErrorCode::InvalidArgument, "clip_ranges: fps and max_seconds must be positive");
  }
  const int window = static_cast<int>(std::floor(max_seconds * fps + 1e-9));
  if (window < 1) {
    fail(ErrorCode::InvalidArgument, "clip_ranges: window shorter than one frame");
  }
  std::vector<std::pair<int, int>> out;
  for (int begin = 0; begin < frames; begin += window) {
    const int end = std::min(frames, begin + window);
    if (end - begin == window || end - begin >= min_frames) {
      out.emplace_back(begin, end);
    }
  }
  return out;
}

std::vector<SocialMotion> segment_clips(const SocialMotion& scene, double max_seconds, int min_frames) {
  scene.validate();
  std::vector<SocialMotion> out;
  for (const auto& [begin, end] : clip_ranges(scene.frames(), scene.fps, max_seconds, min_frames)) {
    SocialMotion clip;
    clip.fps = scene.fps;
    for (const RawMotion& p : scene.persons) {
      clip.persons.push_back(p.slice(begin, end));
    }
    out.push_back(std::move(clip));
  }
  return out;
}

std::vector<RawMotion> segment_clips(const RawMotion& motion, double max_seconds, int min_frames) {
  motion.validate();
  std::vector<RawMotion> out;
  for (const auto& [begin, end] : clip_ranges(motion.frames(), motion.fps, max_seconds, min_frames)) {
    out.push_back(motion.slice(begin, end));
  }
  return out;
}

} // namespace socialmotion
