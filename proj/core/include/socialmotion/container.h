#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace socialmotion {

// Versioned binary container used for model checkpoints:
//   magic[4] | u32 version | u32 len + config JSON | u32 tensor count |
//   per tensor: u32 len + name, u32 rows, u32 cols, rows*cols f32 (row-major) |
//   u32 CRC-32 of all preceding bytes.
// All integers and floats are little-endian.
struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value; // stored as 32-bit floats
};

struct Container {
  std::string magic; // exactly 4 bytes
  std::uint32_t version = 1;
  std::string config_json;
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(const std::string& name) const;
  bool has(const std::string& name) const;
};

std::vector<std::uint8_t> encode_container(const Container& c);
// Checks magic (when expected_magic is non-empty), version <= max_version,
// and checksum.
Container decode_container(const std::vector<std::uint8_t>& bytes, const std::string& expected_magic,
                           std::uint32_t max_version, const std::string& source = "container");

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path, const std::string& expected_magic,
                         std::uint32_t max_version);

} // namespace socialmotion
