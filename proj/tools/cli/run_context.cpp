#include "run_context.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "socialmotion/error.h"
#include "socialmotion/manifest.h"

namespace socialmotion::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json RunContext::load_config() const {
  if (config_path.empty()) {
    return json::object();
  }
  try {
    return json::parse(read_text(config_path));
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, "config '" + config_path + "': " + e.what());
  }
}

std::string RunContext::output_dir(const std::string& fallback) const {
  const std::string dir = out_dir.empty() ? fallback : out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    fail(ErrorCode::Io, "cannot create output directory '" + dir + "'");
  }
  return dir;
}

std::string RunContext::output_path(const std::string& name, const std::string& fallback) const {
  return (fs::path(output_dir(fallback)) / name).string();
}

void RunContext::write_sidecar(const std::string& artifact) const {
  nlohmann::json meta;
  meta["tool"] = "socialmotion";
  meta["version"] = SOCIALMOTION_VERSION;
  meta["subcommand"] = subcommand;
  meta["seed"] = seed;
  meta["argv"] = argv;
  meta["config"] = config;
  meta["artifact"] = fs::path(artifact).filename().string();
  meta["outputs"] = outputs;
  meta["data_root"] = default_data_root();
  write_text(artifact + ".meta.json", meta.dump(2) + "\n");
}

void RunContext::record(const std::string& artifact) {
  outputs.push_back(artifact);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::Io, "cannot read '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    fail(ErrorCode::Io, "cannot write '" + path + "'");
  }
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) {
    fail(ErrorCode::InvalidArgument, what + " path is required");
  }
  if (!fs::is_regular_file(path)) {
    fail(ErrorCode::Io, what + " '" + path + "' does not exist");
  }
}

std::string file_stem(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

std::vector<std::string> expand_scene_paths(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      for (const std::string& rel : list_scene_files(in)) {
        out.push_back((fs::path(in) / rel).string());
      }
    } else {
      require_file(in, "scene file");
      out.push_back(in);
    }
  }
  return out;
}

void emit(const RunContext& ctx, const json& summary) {
  if (ctx.json) {
    std::cout << summary.dump(2) << "\n";
    return;
  }
  std::size_t width = 0;
  for (const auto& [key, value] : summary.items()) {
    width = std::max(width, key.size());
  }
  for (const auto& [key, value] : summary.items()) {
    std::cout << key << std::string(width - key.size() + 2, ' ')
              << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
  }
}

} // namespace socialmotion::cli
