#include "socialmotion/relpose_bins.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "socialmotion/error.h"
#include "socialmotion/rotation.h"

namespace socialmotion {

namespace {

BinRange widen(double lo, double hi, double margin) {
  const double span = hi - lo;
  if (span < 1e-9) {
    return {lo - 0.01, hi + 0.01};
  }
  return {lo - margin * span, hi + margin * span};
}

} // namespace

BinSpec BinSpec::fit(std::span<const RelPose> poses, int bins, double margin) {
  if (poses.empty()) {
    fail(ErrorCode::InvalidArgument, "BinSpec::fit: no relative poses");
  }
  if (bins < 1) {
    fail(ErrorCode::InvalidArgument, "BinSpec::fit: bin count must be positive");
  }
  if (!(margin >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "BinSpec::fit: margin must be non-negative");
  }
  double x_lo = poses[0].x, x_hi = poses[0].x, z_lo = poses[0].z, z_hi = poses[0].z;
  for (const RelPose& p : poses) {
    if (!std::isfinite(p.x) || !std::isfinite(p.z) || !std::isfinite(p.theta)) {
      fail(ErrorCode::NonFinite, "BinSpec::fit: non-finite relative pose");
    }
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    z_lo = std::min(z_lo, p.z);
    z_hi = std::max(z_hi, p.z);
  }
  BinSpec spec;
  spec.bins = bins;
  spec.x = widen(x_lo, x_hi, margin);
  spec.z = widen(z_lo, z_hi, margin);
  spec.theta = {-std::numbers::pi, std::numbers::pi};
  return spec;
}

const BinRange& BinSpec::range(RelComponent c) const {
  switch (c) {
    case RelComponent::X:
      return x;
    case RelComponent::Z:
      return z;
    case RelComponent::Theta:
      return theta;
  }
  fail(ErrorCode::InvalidArgument, "unknown relative-pose component");
}

double BinSpec::width(RelComponent c) const {
  const BinRange& r = range(c);
  return (r.max - r.min) / bins;
}

int BinSpec::encode(RelComponent c, double value) const {
  if (!std::isfinite(value)) {
    fail(ErrorCode::NonFinite, "BinSpec::encode: non-finite value");
  }
  if (c == RelComponent::Theta) {
    value = wrap_angle(value);
  }
  const BinRange& r = range(c);
  const double k = std::floor((value - r.min) / width(c));
  return static_cast<int>(std::clamp(k, 0.0, static_cast<double>(bins - 1)));
}

double BinSpec::decode(RelComponent c, int bin) const {
  if (bin < 0 || bin >= bins) {
    fail(ErrorCode::OutOfRange, "BinSpec::decode: bin " + std::to_string(bin) + " outside [0, " +
                                    std::to_string(bins) + ")");
  }
  return range(c).min + (bin + 0.5) * width(c);
}

std::array<int, 3> BinSpec::encode(const RelPose& pose) const {
  return {encode(RelComponent::X, pose.x), encode(RelComponent::Z, pose.z),
          encode(RelComponent::Theta, pose.theta)};
}

RelPose BinSpec::decode(const std::array<int, 3>& b) const {
  return {decode(RelComponent::X, b[0]), decode(RelComponent::Z, b[1]), decode(RelComponent::Theta, b[2])};
}

void BinSpec::validate() const {
  if (bins < 1) {
    fail(ErrorCode::InvalidArgument, "BinSpec: bin count must be positive");
  }
  for (const BinRange* r : {&x, &z, &theta}) {
    if (!std::isfinite(r->min) || !std::isfinite(r->max) || !(r->max > r->min)) {
      fail(ErrorCode::InvalidArgument, "BinSpec: each range needs finite min < max");
    }
  }
}

std::string BinSpec::to_json() const {
  nlohmann::json j;
  j["bins"] = bins;
  j["x"] = {x.min, x.max};
  j["z"] = {z.min, z.max};
  j["theta"] = {theta.min, theta.max};
  return j.dump(2);
}

BinSpec BinSpec::from_json(const std::string& text) {
  BinSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    spec.bins = j.at("bins").get<int>();
    auto read = [&j](const char* key) {
      const auto& a = j.at(key);
      return BinRange{a.at(0).get<double>(), a.at(1).get<double>()};
    };
    spec.x = read("x");
    spec.z = read("z");
    spec.theta = read("theta");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("BinSpec: ") + e.what());
  }
  spec.validate();
  return spec;
}

} // namespace socialmotion
