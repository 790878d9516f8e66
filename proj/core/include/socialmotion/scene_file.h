#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socialmotion/motion.h"

namespace socialmotion {

// Binary scene file, little-endian:
//   "XHSC" | u32 version | f32 fps | u32 len + skeleton id |
//   u32 persons | u32 frames | u32 joints |
//   per person: frames x (f32 x, y, z) root translation, then
//               frames x joints x (f32 w, x, y, z) local rotations |
//   u32 caption count | per caption: u32 len + UTF-8 bytes |
//   u32 CRC-32 of all preceding bytes.
struct SceneFile {
  std::string skeleton_id = "smpl22";
  SocialMotion motion;
  std::vector<std::string> captions;

  void validate() const;
};

inline constexpr std::uint32_t kSceneFileVersion = 1;

std::vector<std::uint8_t> encode_scene(const SceneFile& scene);
SceneFile decode_scene(const std::vector<std::uint8_t>& bytes, const std::string& source = "scene");

void write_scene(const std::string& path, const SceneFile& scene);
SceneFile read_scene(const std::string& path);

} // namespace socialmotion
