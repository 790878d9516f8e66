#pragma once

#include <array>
#include <span>
#include <string>

#include "socialmotion/xh3d.h"

namespace socialmotion {

enum class RelComponent { X = 0, Z = 1, Theta = 2 };

struct BinRange {
  double min = 0.0;
  double max = 0.0;
};

// Uniform quantization of (x, z, theta). x and z ranges come from training
// data; theta always spans (-pi, pi].
struct BinSpec {
  int bins = 512;
  BinRange x;
  BinRange z;
  BinRange theta;

  // Data range widened by `margin` of its span on each side; a degenerate
  // range is widened to +-0.01 around its value.
  static BinSpec fit(std::span<const RelPose> poses, int bins = 512, double margin = 0.05);

  const BinRange& range(RelComponent c) const;
  double width(RelComponent c) const;
  // Values outside the range clamp to the first or last bin.
  int encode(RelComponent c, double value) const;
  // Bin center.
  double decode(RelComponent c, int bin) const;

  std::array<int, 3> encode(const RelPose& pose) const;
  RelPose decode(const std::array<int, 3>& bins) const;

  void validate() const;
  std::string to_json() const;
  static BinSpec from_json(const std::string& text);
};

} // namespace socialmotion
