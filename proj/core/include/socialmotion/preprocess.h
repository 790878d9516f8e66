#pragma once

#include <utility>
#include <vector>

#include "socialmotion/motion.h"

namespace socialmotion {

// Integer ratios keep every k-th frame; other ratios sample at 1/target
// spacing with linear root interpolation and slerped rotations. Throws when
// asked to upsample.
RawMotion resample_fps(const RawMotion& motion, double target_fps = 20.0);
SocialMotion resample_fps(const SocialMotion& scene, double target_fps = 20.0);

// Consecutive non-overlapping [begin, end) windows of at most
// floor(max_seconds * fps) frames; a window shorter than that is kept only
// when it has at least min_frames frames.
std::vector<std::pair<int, int>> clip_ranges(int frames, double fps, double max_seconds = 20.0,
                                             int min_frames = 40);
std::vector<SocialMotion> segment_clips(const SocialMotion& scene, double max_seconds = 20.0, int min_frames = 40);
std::vector<RawMotion> segment_clips(const RawMotion& motion, double max_seconds = 20.0, int min_frames = 40);

} // namespace socialmotion
