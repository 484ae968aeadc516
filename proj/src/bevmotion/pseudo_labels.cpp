#include "bevmotion/pseudo_labels.hpp"

#include <cmath>

namespace bevmotion {

namespace {

MotionField match_and_label(const PillarSet& src, const PillarSet& tgt,
                            const MotionField* predicted, double prewarp_scale,
                            const TransportConfig& cfg, const std::vector<Cell>& ground_cells,
                            double horizon_seconds) {
    if (src.empty() || tgt.empty()) {
        raise(ErrorKind::empty_input, "pseudo-label matching requires nonempty pillar sets");
    }

    std::vector<Vec2> warped = src.centers;
    if (predicted != nullptr) {
        std::vector<Vec2> motion(src.count());
        for (size_t k = 0; k < src.count(); ++k) {
            const Cell& cell = src.cells[k];
            motion[k] = {predicted->dx.at(cell.row, cell.col) * prewarp_scale,
                         predicted->dy.at(cell.row, cell.col) * prewarp_scale};
        }
        warped = prewarp(src.centers, motion);
    }

    const CostMatrix cost = cost_matrix(warped, tgt.centers);
    const TransportPlan plan = sinkhorn(cost, cfg);

    MotionField field(src.occupancy.rows(), src.occupancy.cols(), horizon_seconds);
    for (size_t k = 0; k < src.count(); ++k) {
        const Cell& cell = src.cells[k];
        const Vec2 label = tgt.centers[plan.hard[k]] - src.centers[k];
        field.dx.at(cell.row, cell.col) = label.x;
        field.dy.at(cell.row, cell.col) = label.y;
        field.valid.at(cell.row, cell.col) = 1;
    }
    // Removed ground points train toward zero motion.
    for (const Cell& cell : ground_cells) {
        field.dx.at(cell.row, cell.col) = 0.0;
        field.dy.at(cell.row, cell.col) = 0.0;
        field.valid.at(cell.row, cell.col) = 1;
    }
    return field;
}

}  // namespace

MotionField generate_pseudo_motion(const PillarSet& src, const PillarSet& tgt,
                                   const MotionField* predicted, const TransportConfig& cfg,
                                   const std::vector<Cell>& ground_cells,
                                   double horizon_seconds) {
    return match_and_label(src, tgt, predicted, 1.0, cfg, ground_cells, horizon_seconds);
}

MotionField generate_two_step(const PillarSet& src, const PillarSet& tgt2,
                              const MotionField* predicted, const TransportConfig& cfg,
                              const std::vector<Cell>& ground_cells,
                              double horizon_seconds) {
    return match_and_label(src, tgt2, predicted, 2.0, cfg, ground_cells, horizon_seconds);
}

StateMap pseudo_state_labels(const MotionField& labels, double step_seconds,
                             double threshold_mps) {
    if (!(step_seconds > 0.0)) {
        raise(ErrorKind::config, "step_seconds must be positive");
    }
    StateMap out(labels.rows(), labels.cols());
    for (int i = 0; i < labels.rows(); ++i) {
        for (int j = 0; j < labels.cols(); ++j) {
            if (!labels.valid.at(i, j)) {
                continue;
            }
            const double speed =
                std::hypot(labels.dx.at(i, j), labels.dy.at(i, j)) / step_seconds;
            out.set(i, j, speed >= threshold_mps ? MotionState::moving : MotionState::statics);
        }
    }
    return out;
}

}  // namespace bevmotion
