#include "socialmotion/scene_file.h"

#include "binary_io.h"
#include "socialmotion/error.h"

namespace socialmotion {

void SceneFile::validate() const {
  if (motion.persons.empty()) {
    fail(ErrorCode::InvalidArgument, "scene has no persons");
  }
  motion.validate();
}

std::vector<std::uint8_t> encode_scene(const SceneFile& scene) {
  scene.validate();
  const SocialMotion& m = scene.motion;
  const int frames = m.frames();
  const int joints = m.persons.front().joints;
  detail::ByteWriter w;
  w.raw("XHSC");
  w.u32(kSceneFileVersion);
  w.f32(static_cast<float>(m.fps));
  w.str(scene.skeleton_id);
  w.u32(static_cast<std::uint32_t>(m.persons.size()));
  w.u32(static_cast<std::uint32_t>(frames));
  w.u32(static_cast<std::uint32_t>(joints));
  for (const RawMotion& p : m.persons) {
    if (p.joints != joints) {
      fail(ErrorCode::ShapeMismatch, "scene persons differ in joint count");
    }
    for (const Vec3& t : p.root_translation) {
      w.f32(static_cast<float>(t.x()));
      w.f32(static_cast<float>(t.y()));
      w.f32(static_cast<float>(t.z()));
    }
    for (const Quat& q : p.rotations) {
      w.f32(static_cast<float>(q.w()));
      w.f32(static_cast<float>(q.x()));
      w.f32(static_cast<float>(q.y()));
      w.f32(static_cast<float>(q.z()));
    }
  }
  w.u32(static_cast<std::uint32_t>(scene.captions.size()));
  for (const std::string& c : scene.captions) {
    w.str(c);
  }
  w.crc();
  return w.bytes();
}

SceneFile decode_scene(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  if (bytes.size() < 12) {
    fail(ErrorCode::Format, source + ": truncated file");
  }
  detail::ByteReader r(bytes.data(), bytes.size() - 4, source);
  if (r.raw(4, "magic") != "XHSC") {
    fail(ErrorCode::Format, source + ": bad magic (not a scene file)");
  }
  const std::uint32_t version = r.u32("version");
  if (version == 0 || version > kSceneFileVersion) {
    fail(ErrorCode::UnsupportedVersion, source + ": unsupported version " + std::to_string(version) +
                                            " (supported up to " + std::to_string(kSceneFileVersion) + ")");
  }
  SceneFile scene;
  scene.motion.fps = r.f32("fps");
  scene.skeleton_id = r.str("skeleton id");
  const std::uint32_t persons = r.u32("person count");
  const std::uint32_t frames = r.u32("frame count");
  const std::uint32_t joints = r.u32("joint count");
  const std::uint64_t per_person = static_cast<std::uint64_t>(frames) * (3 + 4ULL * joints) * 4;
  if (persons == 0 || per_person * persons > r.remaining()) {
    fail(ErrorCode::Format, source + ": truncated motion payload");
  }
  for (std::uint32_t p = 0; p < persons; ++p) {
    RawMotion m(static_cast<int>(frames), static_cast<int>(joints), scene.motion.fps);
    for (auto& t : m.root_translation) {
      const double x = r.f32("root"), y = r.f32("root"), z = r.f32("root");
      t = Vec3(x, y, z);
    }
    for (auto& q : m.rotations) {
      const double qw = r.f32("rotation"), qx = r.f32("rotation"), qy = r.f32("rotation"), qz = r.f32("rotation");
      q = Quat(qw, qx, qy, qz);
    }
    scene.motion.persons.push_back(std::move(m));
  }
  const std::uint32_t captions = r.u32("caption count");
  for (std::uint32_t i = 0; i < captions; ++i) {
    scene.captions.push_back(r.str("caption"));
  }
  if (r.remaining() != 0) {
    fail(ErrorCode::Format, source + ": unexpected trailing bytes");
  }
  detail::verify_trailing_crc(bytes, source);
  scene.validate();
  return scene;
}

void write_scene(const std::string& path, const SceneFile& scene) {
  detail::write_file_bytes(path, encode_scene(scene));
}

SceneFile read_scene(const std::string& path) {
  return decode_scene(detail::read_file_bytes(path), path);
}

} // namespace socialmotion
