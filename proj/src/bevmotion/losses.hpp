#pragma once

#include <cstdint>
#include <optional>

#include "bevmotion/clustering.hpp"
#include "bevmotion/types.hpp"

namespace bevmotion {

struct LossWeights {
    double alpha = 0.05;  // cluster (or KNN) consistency
    double beta = 1.0;    // backward consistency
    double gamma = 0.1;   // forward consistency
    double sigma = 0.2;   // state cross-entropy
    double smooth_l1_beta = 1.0;  // meters, transition point of the smooth-L1 kernel

    void validate() const;
};

// Scalar value plus gradient grids with respect to the prediction inputs.
struct LossValue {
    double value = 0.0;
    GridD grad_dx;  // d value / d pred.dx
    GridD grad_dy;
};

struct PairLossValue {
    double value = 0.0;
    GridD grad_a_dx, grad_a_dy;
    GridD grad_b_dx, grad_b_dy;
};

struct StateLossValue {
    double value = 0.0;
    GridD grad_logit_static;
    GridD grad_logit_moving;
};

// Optional fingerprint sink: losses mix in their branch decisions so a
// finite-difference probe can detect kink crossings. Null disables it.
using Fingerprint = uint64_t;

// Per-component smooth-L1 of pred - target, averaged over masked cells and
// the two components. Empty mask yields 0 with zero gradients.
LossValue smooth_l1(const MotionField& pred, const MotionField& target, const GridU8& mask,
                    double beta, Fingerprint* fp = nullptr);

// Mean over occupied cells of the mean pairwise motion-difference norm within
// each cell's cluster. Gradients flow to the predicted one-step motion.
LossValue cluster_consistency(const MotionField& pred, const ClusterMap& clusters,
                              Fingerprint* fp = nullptr);

// Same statistic over k-nearest-neighbor graphs of occupied cell centers;
// ablation baseline. With fewer than k+1 occupied cells all available
// neighbors are used.
LossValue knn_consistency(const MotionField& pred, const PillarSet& pillars, int k,
                          Fingerprint* fp = nullptr);

// Smooth-L1 of (m_fwd + m_bwd) against zero over the shared valid mask,
// per-cell component sum averaged over cells. Gradients reach both inputs.
PairLossValue backward_consistency(const MotionField& m_fwd, const MotionField& m_bwd,
                                   double beta, Fingerprint* fp = nullptr);

// Smooth-L1 of (m2 - 2*m1) against zero, same reduction as above.
PairLossValue forward_consistency(const MotionField& m1, const MotionField& m2,
                                  double beta, Fingerprint* fp = nullptr);

// Softmax cross-entropy of the two state logits against pseudo state labels,
// averaged over valid cells.
StateLossValue state_cross_entropy(const GridD& logit_static, const GridD& logit_moving,
                                   const StateMap& labels);

// Cells whose argmax logit is `moving` and which are valid. Ties go to
// static, matching a conservative supervision mask.
GridU8 moving_mask(const GridD& logit_static, const GridD& logit_moving,
                   const GridU8& valid, Fingerprint* fp = nullptr);

struct LossReport {
    double total = 0.0;
    double sup = 0.0;
    double cluster = 0.0;
    double back = 0.0;
    double forward = 0.0;
    double state = 0.0;
    int sup_masked_cells = 0;  // cells the motion supervision averaged over
};

enum class SmoothnessKind { cluster, knn };

// Everything total_loss consumes, grouped to keep the call site readable.
struct TotalLossInputs {
    // predictions (forward pass)
    const GridD* pred_dx02 = nullptr;
    const GridD* pred_dy02 = nullptr;
    const GridD* pred_dx04 = nullptr;
    const GridD* pred_dy04 = nullptr;
    const GridD* logit_static = nullptr;
    const GridD* logit_moving = nullptr;
    // backward-pass one-step motion, null when the backward term is off
    const GridD* back_dx02 = nullptr;
    const GridD* back_dy02 = nullptr;
    // supervision targets
    const MotionField* pseudo_one_step = nullptr;
    const MotionField* pseudo_two_step = nullptr;  // null disables the 0.4s supervision
    const StateMap* state_labels = nullptr;
    const ClusterMap* clusters = nullptr;          // for SmoothnessKind::cluster
    const PillarSet* pillars = nullptr;            // for SmoothnessKind::knn
    // masks
    const GridU8* occupancy = nullptr;  // current-frame occupied cells
};

struct TotalLossOptions {
    LossWeights weights;
    bool msm_enabled = false;
    SmoothnessKind smoothness = SmoothnessKind::cluster;
    int knn_k = 4;
};

struct TotalLossResult {
    LossReport report;
    // gradients for the four network output groups
    GridD g_dx02, g_dy02, g_dx04, g_dy04;
    GridD g_logit_static, g_logit_moving;
    GridD g_back_dx02, g_back_dy02;
};

// Weighted total of Eq-style terms:
//   total = sup + alpha*smoothness + beta*back + gamma*forward + sigma*state
// Terms with zero weight (or missing inputs) are skipped entirely, which is
// numerically identical to omitting them. With msm_enabled the motion
// supervision mask is restricted to cells the state head predicts as moving.
TotalLossResult total_loss(const TotalLossInputs& in, const TotalLossOptions& opts,
                           Fingerprint* fp = nullptr);

}  // namespace bevmotion
