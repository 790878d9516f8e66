#include "socialmotion/skeleton.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "socialmotion/error.h"

namespace socialmotion {

namespace {

SkeletonDef make_default_skeleton() {
  struct JointSpec {
    const char* name;
    int parent;
    double x, y, z;
  };
  // Left-side offsets are mirrored to the right so the rest pose faces
  // exactly +Z.
  const JointSpec joints[] = {
      {"pelvis", -1, 0.0, 0.0, 0.0},
      {"left_hip", 0, 0.059, -0.086, -0.015},
      {"right_hip", 0, -0.059, -0.086, -0.015},
      {"spine1", 0, 0.0, 0.124, -0.038},
      {"left_knee", 1, 0.043, -0.385, 0.002},
      {"right_knee", 2, -0.043, -0.385, 0.002},
      {"spine2", 3, 0.0, 0.138, 0.027},
      {"left_ankle", 4, -0.017, -0.423, -0.036},
      {"right_ankle", 5, 0.017, -0.423, -0.036},
      {"spine3", 6, 0.0, 0.056, 0.003},
      {"left_foot", 7, 0.038, -0.061, 0.126},
      {"right_foot", 8, -0.038, -0.061, 0.126},
      {"neck", 9, 0.0, 0.212, -0.034},
      {"left_collar", 9, 0.077, 0.113, -0.021},
      {"right_collar", 9, -0.077, 0.113, -0.021},
      {"head", 12, 0.0, 0.089, 0.050},
      {"left_shoulder", 13, 0.118, 0.046, -0.014},
      {"right_shoulder", 14, -0.118, 0.046, -0.014},
      {"left_elbow", 16, 0.258, -0.015, -0.027},
      {"right_elbow", 17, -0.258, -0.015, -0.027},
      {"left_wrist", 18, 0.267, 0.010, -0.007},
      {"right_wrist", 19, -0.267, 0.010, -0.007},
  };
  SkeletonDef s;
  s.id = "smpl22";
  for (const auto& j : joints) {
    s.joint_names.emplace_back(j.name);
    s.parents.push_back(j.parent);
    s.offsets.emplace_back(j.x, j.y, j.z);
  }
  // Heel/toe = ankle and foot joints of each leg.
  s.heels = {7, 8};
  s.toes = {10, 11};
  s.hips = {1, 2};
  s.shoulders = {16, 17};
  s.validate();
  return s;
}

void check_index(const SkeletonDef& s, int index, const char* what) {
  if (index <= 0 || index >= s.joint_count()) {
    fail(ErrorCode::InvalidArgument,
         std::string("skeleton ") + what + " index " + std::to_string(index) +
             " must be a non-root joint");
  }
}

} // namespace

void SkeletonDef::validate() const {
  const int n = joint_count();
  if (n < 2) {
    fail(ErrorCode::InvalidArgument, "skeleton needs at least 2 joints");
  }
  if (offsets.size() != parents.size() ||
      (!joint_names.empty() && joint_names.size() != parents.size())) {
    fail(ErrorCode::InvalidArgument, "skeleton arrays have inconsistent lengths");
  }
  if (parents[0] != -1) {
    fail(ErrorCode::InvalidArgument, "joint 0 must be the root");
  }
  for (int i = 1; i < n; ++i) {
    if (parents[i] < 0 || parents[i] >= i) {
      fail(ErrorCode::InvalidArgument,
           "joint " + std::to_string(i) + " has parent " + std::to_string(parents[i]) +
               "; parents must precede children");
    }
  }
  for (const auto& o : offsets) {
    if (!o.allFinite()) {
      fail(ErrorCode::NonFinite, "skeleton offset is non-finite");
    }
  }
  for (int k = 0; k < 2; ++k) {
    check_index(*this, heels[k], "heel");
    check_index(*this, toes[k], "toe");
    check_index(*this, hips[k], "hip");
    check_index(*this, shoulders[k], "shoulder");
  }
  if (heels[0] == heels[1] || toes[0] == toes[1]) {
    fail(ErrorCode::InvalidArgument, "heel and toe sets need two distinct joints each");
  }
}

const SkeletonDef& default_skeleton() {
  static const SkeletonDef skeleton = make_default_skeleton();
  return skeleton;
}

const SkeletonDef& skeleton_by_id(std::string_view id) {
  if (id == default_skeleton().id) {
    return default_skeleton();
  }
  fail(ErrorCode::InvalidArgument, "unknown skeleton id '" + std::string(id) + "'");
}

SkeletonDef skeleton_from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("skeleton JSON: ") + e.what());
  }
  SkeletonDef s;
  try {
    s.id = doc.value("id", std::string("custom"));
    for (const auto& j : doc.at("joints")) {
      s.joint_names.push_back(j.value("name", std::string()));
      s.parents.push_back(j.at("parent").get<int>());
      const auto off = j.at("offset").get<std::vector<double>>();
      if (off.size() != 3) {
        fail(ErrorCode::Format, "skeleton joint offset must have 3 components");
      }
      s.offsets.emplace_back(off[0], off[1], off[2]);
    }
    const auto pair = [&](const char* key) {
      const auto v = doc.at(key).get<std::vector<int>>();
      if (v.size() != 2) {
        fail(ErrorCode::Format, std::string("skeleton '") + key + "' needs 2 entries");
      }
      return std::array<int, 2>{v[0], v[1]};
    };
    s.heels = pair("heels");
    s.toes = pair("toes");
    s.hips = pair("hips");
    s.shoulders = pair("shoulders");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("skeleton JSON: ") + e.what());
  }
  s.validate();
  return s;
}

std::string skeleton_to_json(const SkeletonDef& s) {
  nlohmann::json doc;
  doc["id"] = s.id;
  auto& joints = doc["joints"];
  joints = nlohmann::json::array();
  for (int i = 0; i < s.joint_count(); ++i) {
    joints.push_back({
        {"name", i < static_cast<int>(s.joint_names.size()) ? s.joint_names[i] : ""},
        {"parent", s.parents[i]},
        {"offset", {s.offsets[i].x(), s.offsets[i].y(), s.offsets[i].z()}},
    });
  }
  doc["heels"] = s.heels;
  doc["toes"] = s.toes;
  doc["hips"] = s.hips;
  doc["shoulders"] = s.shoulders;
  return doc.dump(2);
}

SkeletonDef load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::Io, "cannot open skeleton file " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return skeleton_from_json(ss.str());
}

} // namespace socialmotion
