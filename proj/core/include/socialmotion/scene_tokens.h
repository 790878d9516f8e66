#pragma once

#include <cstdint>
#include <string>

#include "socialmotion/container.h"
#include "socialmotion/relpose_bins.h"
#include "socialmotion/scene_file.h"
#include "socialmotion/tasks.h"
#include "socialmotion/vq.h"
#include "socialmotion/xh3d.h"

namespace socialmotion {

// Scene -> XH3D -> VQ codes per person plus binned relative poses.
TokenizedScene tokenize_scene(const SceneFile& scene, const VQModel& vq, const BinSpec& bins,
                              ReferenceChoice reference = ReferenceChoice::fixed(0),
                              const SkeletonDef& skeleton = default_skeleton());

// Inverse path: codes -> XH3D -> motion, persons placed at the bin centers.
// Frames default to 4 per code of the first person.
SocialMotion detokenize_scene(const SocialTokens& tokens, const VQModel& vq, const BinSpec& bins,
                              int frames = 0, double fps = 20.0, const SkeletonDef& skeleton = default_skeleton());

std::string tokenized_scene_to_json(const TokenizedScene& scene);
TokenizedScene tokenized_scene_from_json(const std::string& text);

// XH3D feature file: container with magic "XHFT".
inline constexpr std::uint32_t kFeatureFileVersion = 1;
Container social_features_to_container(const SocialFeatures& features);
SocialFeatures social_features_from_container(const Container& c);
void write_social_features(const std::string& path, const SocialFeatures& features);
SocialFeatures read_social_features(const std::string& path);

} // namespace socialmotion
