#pragma once

#include <cstdint>
#include <vector>

#include "bevmotion/types.hpp"

namespace bevmotion {

struct GroundParams {
    double plane_z = -2.0;        // expected ground height
    double tolerance = 0.3;       // threshold-mode band around plane_z
    int ransac_iters = 0;         // 0 = pure threshold mode
    double inlier_threshold = 0.15;

    void validate() const;
};

struct GroundSplit {
    PointFrame non_ground;
    std::vector<size_t> ground_indices;  // indices into the input frame
};

// Splits a frame into ground and non-ground points. Threshold mode keeps
// |z - plane_z| <= tolerance as ground; RANSAC mode fits a single plane on
// low candidate points and takes its inliers. Falls back to threshold mode
// when fewer than 3 points are available.
GroundSplit remove_ground(const PointFrame& frame, const GroundParams& params,
                          uint64_t seed = 0);

}  // namespace bevmotion
