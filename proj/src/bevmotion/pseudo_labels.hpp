#pragma once

#include <optional>
#include <vector>

#include "bevmotion/transport.hpp"
#include "bevmotion/types.hpp"

namespace bevmotion {

// Motion pseudo labels for one frame pair via entropic OT matching.
//
// Source centers are pre-warped by `predicted` (where provided) before the
// cost matrix is built; labels are still measured from the original source
// centers: label_i = tgt.centers[T(i)] - src.centers[i]. Cells listed in
// `ground_cells` never take part in matching and carry zero labels on the
// output mask. horizon_seconds is recorded on the field.
MotionField generate_pseudo_motion(const PillarSet& src, const PillarSet& tgt,
                                   const MotionField* predicted, const TransportConfig& cfg,
                                   const std::vector<Cell>& ground_cells = {},
                                   double horizon_seconds = 0.2);

// Same matching against the frame two steps ahead. The pre-warp uses twice
// the one-step prediction; the recorded horizon is two steps.
MotionField generate_two_step(const PillarSet& src, const PillarSet& tgt2,
                              const MotionField* predicted, const TransportConfig& cfg,
                              const std::vector<Cell>& ground_cells = {},
                              double horizon_seconds = 0.4);

// Thresholds label speed into moving/static; cells off the mask are invalid.
StateMap pseudo_state_labels(const MotionField& labels, double step_seconds,
                             double threshold_mps);

}  // namespace bevmotion
