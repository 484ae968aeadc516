#pragma once

#include "bevmotion/types.hpp"

namespace bevmotion {

// Re-expresses a frame in the coordinate system of target_pose, i.e. applies
// target_pose^-1 ∘ frame.pose to every point. Throws invalid_pose if either
// rotation is not orthonormal (determinant outside 1 ± 1e-6).
PointFrame sync_to_frame(const PointFrame& frame, const RigidPose& target_pose);

// Keeps exactly the points inside the half-open ranges [min, max) of the
// spec, preserving order.
PointFrame crop(const PointFrame& frame, const GridSpec& spec);

// Binary occupancy over the spec's voxel lattice. Points outside the ranges
// are ignored.
BevVoxelGrid voxelize(const PointFrame& frame, const GridSpec& spec);

// OR-reduces the voxel grid over z into 2D pillars with metric centers.
PillarSet pillarize(const BevVoxelGrid& grid);

// Convenience: crop + voxelize + pillarize in one step.
PillarSet pillarize_frame(const PointFrame& frame, const GridSpec& spec);

}  // namespace bevmotion
