#include "socialmotion/scene_tokens.h"

#include <json.hpp>

#include "socialmotion/error.h"

namespace socialmotion {

using nlohmann::json;

TokenizedScene tokenize_scene(const SceneFile& scene, const VQModel& vq, const BinSpec& bins,
                              ReferenceChoice reference, const SkeletonDef& skeleton) {
  const SocialFeatures f = encode_social(scene.motion, skeleton, reference);
  TokenizedScene out;
  out.caption = scene.captions.empty() ? std::string() : scene.captions.front();
  out.frames = scene.motion.frames();
  out.fps = scene.motion.fps;
  for (const PersonFeatures& p : f.persons) {
    out.motion.persons.push_back(vq_encode(p, vq));
  }
  for (const RelPose& r : f.relposes) {
    out.motion.relposes.push_back(bins.encode(r));
  }
  return out;
}

SocialMotion detokenize_scene(const SocialTokens& tokens, const VQModel& vq, const BinSpec& bins, int frames,
                              double fps, const SkeletonDef& skeleton) {
  if (tokens.persons.empty()) {
    fail(ErrorCode::InvalidArgument, "detokenize_scene: no persons");
  }
  if (tokens.relposes.size() + 1 != tokens.persons.size()) {
    fail(ErrorCode::ShapeMismatch, "detokenize_scene: need one relative pose per non-reference person");
  }
  const int length = frames > 0 ? frames : 4 * static_cast<int>(tokens.persons.front().size());
  SocialFeatures f;
  f.fps = fps;
  for (std::size_t k = 0; k < tokens.persons.size(); ++k) {
    if (4 * static_cast<int>(tokens.persons[k].size()) < length) {
      fail(ErrorCode::ShapeMismatch, "detokenize_scene: person " + std::to_string(k) + " has " +
                                         std::to_string(tokens.persons[k].size()) + " codes, too few for " +
                                         std::to_string(length) + " frames");
    }
    PersonFeatures p = vq_decode(tokens.persons[k], vq, length);
    p.fps = fps;
    f.persons.push_back(std::move(p));
    f.order.push_back(static_cast<int>(k));
  }
  for (const auto& b : tokens.relposes) {
    f.relposes.push_back(bins.decode(b));
  }
  return decode_social(f, skeleton);
}

std::string tokenized_scene_to_json(const TokenizedScene& scene) {
  json j;
  j["caption"] = scene.caption;
  j["frames"] = scene.frames;
  j["fps"] = scene.fps;
  j["persons"] = scene.motion.persons;
  j["relposes"] = scene.motion.relposes;
  return j.dump(2);
}

TokenizedScene tokenized_scene_from_json(const std::string& text) {
  TokenizedScene s;
  try {
    const json j = json::parse(text);
    s.caption = j.value("caption", std::string());
    s.frames = j.at("frames").get<int>();
    s.fps = j.at("fps").get<double>();
    s.motion.persons = j.at("persons").get<std::vector<std::vector<int>>>();
    s.motion.relposes = j.at("relposes").get<std::vector<std::array<int, 3>>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("tokens file: ") + e.what());
  }
  return s;
}

Container social_features_to_container(const SocialFeatures& features) {
  features.validate();
  Container c;
  c.magic = "XHFT";
  c.version = kFeatureFileVersion;
  json meta;
  meta["fps"] = features.fps;
  meta["order"] = features.order;
  meta["joints"] = features.persons.front().joints;
  c.config_json = meta.dump();
  for (std::size_t k = 0; k < features.persons.size(); ++k) {
    c.tensors.push_back({"person" + std::to_string(k), features.persons[k].data});
  }
  Eigen::MatrixXd rel(static_cast<Eigen::Index>(features.relposes.size()), 3);
  for (std::size_t k = 0; k < features.relposes.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    rel(i, 0) = features.relposes[k].x;
    rel(i, 1) = features.relposes[k].z;
    rel(i, 2) = features.relposes[k].theta;
  }
  c.tensors.push_back({"relposes", rel});
  return c;
}

SocialFeatures social_features_from_container(const Container& c) {
  SocialFeatures f;
  int joints = 0;
  try {
    const json meta = json::parse(c.config_json);
    f.fps = meta.at("fps").get<double>();
    f.order = meta.at("order").get<std::vector<int>>();
    joints = meta.at("joints").get<int>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("feature file metadata: ") + e.what());
  }
  for (std::size_t k = 0; k < f.order.size(); ++k) {
    f.persons.push_back({joints, f.fps, c.tensor("person" + std::to_string(k)).value});
  }
  const Eigen::MatrixXd& rel = c.tensor("relposes").value;
  for (Eigen::Index i = 0; i < rel.rows(); ++i) {
    f.relposes.push_back({rel(i, 0), rel(i, 1), rel(i, 2)});
  }
  f.validate();
  return f;
}

void write_social_features(const std::string& path, const SocialFeatures& features) {
  write_container(path, social_features_to_container(features));
}

SocialFeatures read_social_features(const std::string& path) {
  return social_features_from_container(read_container(path, "XHFT", kFeatureFileVersion));
}

} // namespace socialmotion
