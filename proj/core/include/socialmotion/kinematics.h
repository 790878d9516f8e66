#pragma once

#include <span>
#include <vector>

#include "socialmotion/motion.h"
#include "socialmotion/skeleton.h"

namespace socialmotion {

// Global joint positions: p[j] = p[parent] + R_global[parent] * offset[j],
// with the root placed at the root translation.
JointPositions forward_kinematics(const RawMotion& motion, const SkeletonDef& skeleton);

// Global joint orientations for one frame.
std::vector<Quat> global_rotations(const RawMotion& motion, const SkeletonDef& skeleton, int frame);

// Body heading about +Y from the averaged left-minus-right hip and shoulder
// vectors. Facing +Z is 0; the result lies in (-pi, pi].
// Throws Error(Degenerate) when the across-body vector collapses.
double facing_yaw(std::span<const Vec3> frame_positions, const SkeletonDef& skeleton);

double facing_yaw(const JointPositions& positions, int frame, const SkeletonDef& skeleton);

} // namespace socialmotion
