#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bevmotion/ground.hpp"
#include "bevmotion/losses.hpp"
#include "bevmotion/predictor.hpp"
#include "bevmotion/synth.hpp"
#include "bevmotion/transport.hpp"

namespace bevmotion {

struct TrainConfig {
    int epochs = 10;
    AdamConfig adam;                 // lr 0.004 halved every 10 epochs
    uint64_t seed = 1;
    LossWeights weights;
    bool msm_enabled = true;
    int msm_warmup_epochs = 2;
    bool two_step_enabled = true;
    bool backward_enabled = true;
    SmoothnessKind smoothness = SmoothnessKind::cluster;
    int knn_k = 4;
    NetConfig net;
    TransportConfig transport;
    GroundParams ground;
    int connectivity = 8;
    double state_speed_threshold = 0.2;  // m/s, static/moving split

    void validate() const;
};

// Everything one training step needs for a single anchor frame t, built once
// and reused across epochs (only the pseudo labels change as the prediction
// improves).
struct Sample {
    int t = 0;
    FrameStack fwd_input;            // pillar maps t-T+1 .. t, synced to t
    FrameStack bwd_input;            // pillar maps t+T-1 .. t, synced to t
    PillarSet src_ng;                // ground-removed pillars at t
    PillarSet tgt1_ng;               // ground-removed pillars at t+1
    PillarSet tgt2_ng;               // ground-removed pillars at t+2
    std::vector<Cell> ground_cells;  // occupied cells removed as ground
    GridU8 occupancy;                // full pillar occupancy at t
    ClusterMap clusters;             // clusters of src_ng
};

struct SamplePrep {
    std::vector<Sample> samples;
    std::vector<std::string> log;  // skipped-sample notes
};

// Builds all usable samples. Frames without enough history/future or with
// empty matching sets are skipped and logged.
SamplePrep prepare_samples(const LabeledSequence& seq, const TrainConfig& cfg);

struct EpochStats {
    double total = 0.0, sup = 0.0, cluster = 0.0, back = 0.0, forward = 0.0, state = 0.0;
    int samples = 0;
};

struct TrainResult {
    PredictorParams params;
    std::vector<EpochStats> curves;
    std::vector<std::string> log;
    int rows = 0, cols = 0;
};

TrainResult train(const LabeledSequence& seq, PredictorParams params, const TrainConfig& cfg);

// ---- evaluation ----

struct GroupStats {
    double mean = 0.0;
    double median = 0.0;
    size_t count = 0;
};

struct EvalReport {
    // speed groups: static < 0.2 m/s, slow in [0.2, 5), fast >= 5
    std::optional<GroupStats> group_static, group_slow, group_fast;
    std::optional<GroupStats> div_static, div_slow, div_fast;  // |m_fwd + m_bwd|
};

// Linear interpolation of the two horizons to 1 second:
// mean(5 * d02, 2.5 * d04) per cell. Masks must match.
MotionField interpolate_to_1s(const MotionField& d02, const MotionField& d04);

// Single-field evaluation per the speed grouping above. Cells are taken from
// pred.valid AND gt.valid. Empty groups are absent, not zero.
EvalReport evaluate(const MotionField& pred_1s, const MotionField& gt_1s,
                    const GridD& gt_speed);

// Mean forward/backward divergence per speed group.
EvalReport divergence(const MotionField& m_fwd, const MotionField& m_bwd,
                      const GridD& gt_speed);

// Accumulates per-cell errors and divergences across samples.
class EvalAccumulator {
public:
    void add_error(const MotionField& pred_1s, const MotionField& gt_1s,
                   const GridD& gt_speed);
    void add_divergence(const MotionField& m_fwd, const MotionField& m_bwd,
                        const GridD& gt_speed);
    EvalReport finalize() const;

private:
    std::vector<double> errors_[3];
    std::vector<double> divs_[3];
};

// Runs the trained model over every usable sample and aggregates metrics
// against the dataset's ground truth.
EvalReport evaluate_dataset(const LabeledSequence& seq, const PredictorParams& params,
                            const TrainConfig& cfg);

}  // namespace bevmotion
