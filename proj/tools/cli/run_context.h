#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace socialmotion::cli {

// Flags shared by every subcommand plus the record written next to outputs.
struct RunContext {
  std::string subcommand;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool json = false;
  std::vector<std::string> argv;

  nlohmann::json config; // resolved configuration of the run
  std::vector<std::string> outputs;

  // Empty --config gives an empty object.
  nlohmann::json load_config() const;
  // --out, or `fallback` when not given; created if missing.
  std::string output_dir(const std::string& fallback = ".") const;
  std::string output_path(const std::string& name, const std::string& fallback = ".") const;

  // <artifact>.meta.json with tool version, argv, seed, config and outputs.
  void write_sidecar(const std::string& artifact) const;
  void record(const std::string& artifact);
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
void require_file(const std::string& path, const std::string& what);
std::string file_stem(const std::string& path);

// Scene files named directly or found under directories, sorted.
std::vector<std::string> expand_scene_paths(const std::vector<std::string>& inputs);

// Prints `summary` as JSON (--json) or as aligned key/value lines.
void emit(const RunContext& ctx, const nlohmann::json& summary);

} // namespace socialmotion::cli
