#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "socialmotion/relpose_bins.h"
#include "socialmotion/skeleton.h"
#include "socialmotion/vq.h"

namespace socialmotion {

enum class Split { Train, Val, Test };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const;
};

struct ManifestEntry {
  std::string path; // relative to the manifest root
  int frames = 0;
  int persons = 0;
  std::vector<std::string> captions;
  Split split = Split::Train;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::string root;
  std::vector<ManifestEntry> entries;
  BinSpec bins;
  FeatureStats stats;
  double fps = 20.0;
  std::uint64_t seed = 0;
  SplitRatios ratios;

  std::vector<const ManifestEntry*> split(Split s) const;
  std::string absolute_path(const ManifestEntry& e) const;

  std::string to_json() const;
  // Paths resolve against `root_override` when non-empty, else the stored root.
  static Manifest from_json(const std::string& text, const std::string& root_override = {});

  void save(const std::string& path) const;
  // Throws Error(Io) when any referenced scene file is missing.
  static Manifest load(const std::string& path, const std::string& root_override = {});

  bool operator==(const Manifest& other) const;
};

// Scene files (*.xhsc) under `root`, relative paths in sorted order.
std::vector<std::string> list_scene_files(const std::string& root);

// Scene counts per split: val and test get floor(n * ratio), train the rest.
std::array<int, 3> split_counts(int n, const SplitRatios& ratios);

struct ManifestStatistics {
  BinSpec bins;
  FeatureStats stats;
};

// Bins from all ordered person pairs' relative poses and feature statistics
// from per-person XH3D features of the given scenes.
ManifestStatistics fit_statistics(const std::string& root, const std::vector<std::string>& paths, int bins = 512,
                                  const SkeletonDef& skeleton = default_skeleton());

// Throws Error(InvalidArgument) when the root holds no scene files.
Manifest build_manifest(const std::string& root, const SplitRatios& ratios, std::uint64_t seed, int bins = 512,
                        const SkeletonDef& skeleton = default_skeleton());

inline constexpr const char* kDataRootEnv = "SOCIALMOTION_DATA_ROOT";

// $SOCIALMOTION_DATA_ROOT, or "data" when unset.
std::string default_data_root();

} // namespace socialmotion
