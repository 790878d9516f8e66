#include "socialmotion/manifest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "socialmotion/error.h"
#include "socialmotion/rng.h"
#include "socialmotion/scene_file.h"
#include "socialmotion/xh3d.h"

namespace socialmotion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json row_to_json(const Eigen::RowVectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::RowVectorXd row_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = values[i];
  }
  return v;
}

} // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") {
    return Split::Train;
  }
  if (name == "val") {
    return Split::Val;
  }
  if (name == "test") {
    return Split::Test;
  }
  fail(ErrorCode::Format, "unknown split tag '" + std::string(name) + "'");
}

void SplitRatios::validate() const {
  for (double r : {train, val, test}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      fail(ErrorCode::InvalidArgument, "split ratios must be finite and non-negative");
    }
  }
  if (std::abs(train + val + test - 1.0) > 1e-6) {
    fail(ErrorCode::InvalidArgument, "split ratios must sum to 1");
  }
}

std::array<int, 3> split_counts(int n, const SplitRatios& ratios) {
  ratios.validate();
  const int val = static_cast<int>(std::floor(n * ratios.val + 1e-9));
  const int test = static_cast<int>(std::floor(n * ratios.test + 1e-9));
  return {n - val - test, val, test};
}

std::vector<const ManifestEntry*> Manifest::split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : entries) {
    if (e.split == s) {
      out.push_back(&e);
    }
  }
  return out;
}

std::string Manifest::absolute_path(const ManifestEntry& e) const {
  return (fs::path(root) / e.path).string();
}

std::string Manifest::to_json() const {
  json j;
  j["format"] = "socialmotion-manifest";
  j["version"] = 1;
  j["root"] = root;
  j["fps"] = fps;
  j["seed"] = seed;
  j["ratios"] = {{"train", ratios.train}, {"val", ratios.val}, {"test", ratios.test}};
  j["bins"] = json::parse(bins.to_json());
  j["stats"] = {{"mean", row_to_json(stats.mean)}, {"std", row_to_json(stats.std)}};
  json list = json::array();
  for (const ManifestEntry& e : entries) {
    list.push_back({{"path", e.path},
                    {"frames", e.frames},
                    {"persons", e.persons},
                    {"captions", e.captions},
                    {"split", std::string(split_name(e.split))}});
  }
  j["entries"] = std::move(list);
  return j.dump(2);
}

Manifest Manifest::from_json(const std::string& text, const std::string& root_override) {
  Manifest m;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "socialmotion-manifest") {
      fail(ErrorCode::Format, "not a manifest");
    }
    if (j.at("version").get<int>() != 1) {
      fail(ErrorCode::UnsupportedVersion,
           "unsupported version " + std::to_string(j.at("version").get<int>()) + " (supported up to 1)");
    }
    m.root = root_override.empty() ? j.at("root").get<std::string>() : root_override;
    m.fps = j.at("fps").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const json& r = j.at("ratios");
    m.ratios = {r.at("train").get<double>(), r.at("val").get<double>(), r.at("test").get<double>()};
    m.bins = BinSpec::from_json(j.at("bins").dump());
    m.stats.mean = row_from_json(j.at("stats").at("mean"));
    m.stats.std = row_from_json(j.at("stats").at("std"));
    for (const json& e : j.at("entries")) {
      ManifestEntry entry;
      entry.path = e.at("path").get<std::string>();
      entry.frames = e.at("frames").get<int>();
      entry.persons = e.at("persons").get<int>();
      entry.captions = e.at("captions").get<std::vector<std::string>>();
      entry.split = parse_split(e.at("split").get<std::string>());
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, std::string("manifest: ") + e.what());
  }
  if (m.stats.mean.size() != m.stats.std.size()) {
    fail(ErrorCode::Format, "manifest: stats mean/std widths differ");
  }
  return m;
}

void Manifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    fail(ErrorCode::Io, "cannot write manifest '" + path + "'");
  }
  out << to_json() << '\n';
  if (!out) {
    fail(ErrorCode::Io, "failed writing manifest '" + path + "'");
  }
}

Manifest Manifest::load(const std::string& path, const std::string& root_override) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::Io, "cannot read manifest '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  Manifest m = from_json(buffer.str(), root_override);
  for (const ManifestEntry& e : m.entries) {
    if (!fs::is_regular_file(m.absolute_path(e))) {
      fail(ErrorCode::Io, "manifest references missing scene file '" + m.absolute_path(e) + "'");
    }
  }
  return m;
}

bool Manifest::operator==(const Manifest& other) const {
  return to_json() == other.to_json();
}

std::vector<std::string> list_scene_files(const std::string& root) {
  if (!fs::is_directory(root)) {
    fail(ErrorCode::Io, "data root '" + root + "' is not a directory");
  }
  std::vector<std::string> out;
  for (const auto& item : fs::recursive_directory_iterator(root)) {
    if (item.is_regular_file() && item.path().extension() == ".xhsc") {
      out.push_back(fs::relative(item.path(), root).generic_string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ManifestStatistics fit_statistics(const std::string& root, const std::vector<std::string>& paths, int bins,
                                  const SkeletonDef& skeleton) {
  std::vector<RelPose> poses;
  std::vector<Eigen::MatrixXd> features;
  for (const std::string& p : paths) {
    const SceneFile scene = read_scene((fs::path(root) / p).string());
    const auto& persons = scene.motion.persons;
    for (std::size_t a = 0; a < persons.size(); ++a) {
      features.push_back(encode_person_h3d(canonicalize_person(persons[a], skeleton).motion, skeleton).data);
      for (std::size_t b = 0; b < persons.size(); ++b) {
        if (a != b) {
          poses.push_back(compute_relative_pose(persons[a], persons[b], skeleton));
        }
      }
    }
  }
  ManifestStatistics out;
  out.bins = BinSpec::fit(poses, bins);
  out.stats = features.empty() ? FeatureStats::identity(FeatureLayout{skeleton.joint_count()}.width())
                               : FeatureStats::fit(features);
  return out;
}

Manifest build_manifest(const std::string& root, const SplitRatios& ratios, std::uint64_t seed, int bins,
                        const SkeletonDef& skeleton) {
  const std::vector<std::string> paths = list_scene_files(root);
  if (paths.empty()) {
    fail(ErrorCode::InvalidArgument, "data root '" + root + "' holds no scene files");
  }
  const auto counts = split_counts(static_cast<int>(paths.size()), ratios);
  Rng rng(seed);
  const std::vector<std::size_t> order = rng.permutation(paths.size());

  Manifest m;
  m.root = root;
  m.seed = seed;
  m.ratios = ratios;
  m.entries.resize(paths.size());
  std::vector<std::string> train_paths;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t i = order[rank];
    ManifestEntry& e = m.entries[i];
    e.path = paths[i];
    const SceneFile scene = read_scene((fs::path(root) / e.path).string());
    e.frames = scene.motion.frames();
    e.persons = static_cast<int>(scene.motion.persons.size());
    e.captions = scene.captions;
    m.fps = scene.motion.fps;
    const int r = static_cast<int>(rank);
    e.split = r < counts[0] ? Split::Train : (r < counts[0] + counts[1] ? Split::Val : Split::Test);
  }
  for (const ManifestEntry& e : m.entries) {
    if (e.split == Split::Train) {
      train_paths.push_back(e.path);
    }
  }
  ManifestStatistics fitted = fit_statistics(root, train_paths, bins, skeleton);
  m.bins = fitted.bins;
  m.stats = fitted.stats;
  return m;
}

std::string default_data_root() {
  const char* env = std::getenv(kDataRootEnv);
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("data");
}

} // namespace socialmotion
