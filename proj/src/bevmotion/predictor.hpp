#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bevmotion/types.hpp"

namespace bevmotion {

// Two 3x3 conv layers with ReLU feeding a 1x1 motion head (dx/dy at 0.2s and
// 0.4s) and a 1x1 state head (static/moving logits). Same-padding keeps the
// spatial dimensions.
struct NetConfig {
    int t_in = 5;     // stacked input frames
    int hidden = 16;  // feature channels

    void validate() const;
};

// Flat parameter vector in checkpoint declaration order:
// conv1_w [F][T][3][3], conv1_b [F], conv2_w [F][F][3][3], conv2_b [F],
// motion_w [4][F], motion_b [4], state_w [2][F], state_b [2].
struct ParamLayout {
    size_t conv1_w = 0, conv1_b = 0, conv2_w = 0, conv2_b = 0;
    size_t motion_w = 0, motion_b = 0, state_w = 0, state_b = 0;
    size_t total = 0;

    static ParamLayout make(const NetConfig& cfg);
};

class PredictorParams {
public:
    PredictorParams() = default;
    static PredictorParams zeros(const NetConfig& cfg);
    static PredictorParams he_init(const NetConfig& cfg, uint64_t seed);

    const NetConfig& config() const { return cfg_; }
    const ParamLayout& layout() const { return layout_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    uint64_t revision() const { return revision_; }
    void bump_revision() { ++revision_; }

private:
    NetConfig cfg_;
    ParamLayout layout_;
    std::vector<double> values_;
    uint64_t revision_ = 0;
};

using FrameStack = std::vector<GridU8>;  // t_in binary maps, oldest first

struct ForwardCache {
    std::vector<double> input;  // t_in * rows * cols
    std::vector<double> z1, a1, z2, a2;
    int rows = 0, cols = 0;
    uint64_t params_revision = 0;
};

struct NetOutput {
    GridD dx02, dy02, dx04, dy04;
    GridD logit_static, logit_moving;
    ForwardCache cache;
};

// Gradients flowing back into the network outputs. Missing grids (empty)
// are treated as zero.
struct OutputGrads {
    GridD dx02, dy02, dx04, dy04;
    GridD logit_static, logit_moving;
};

struct BackwardResult {
    std::vector<double> param_grads;
    std::vector<double> input_grads;  // filled only on request
};

NetOutput forward(const PredictorParams& params, const FrameStack& input);

// Exact gradients of the network function. The cache must come from a
// forward call on the current params revision.
BackwardResult backward(const PredictorParams& params, const ForwardCache& cache,
                        const OutputGrads& grads, bool want_input_grads = false);

// ---- optimizer ----

struct AdamConfig {
    double learning_rate = 0.004;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double decay_factor = 0.5;
    int decay_every_epochs = 10;
};

struct OptimizerState {
    AdamConfig cfg;
    std::vector<double> m, v;
    int64_t step = 0;
    int epoch = 0;

    static OptimizerState init(const AdamConfig& cfg, size_t param_count);
    double effective_lr() const;
};

void adam_step(PredictorParams& params, const std::vector<double>& grads,
               OptimizerState& state);

// ---- gradient checking ----

struct LossProbe {
    double value = 0.0;
    std::vector<double> param_grads;  // filled when requested
    uint64_t branch_fingerprint = 0;  // hash of every ReLU/kink branch taken
};

using LossFn = std::function<LossProbe(const PredictorParams&, bool want_grads)>;

struct GradCheckOptions {
    double step = 1e-4;
    double tolerance = 1e-4;
    int sample_count = 200;  // <= 0 checks every parameter
    uint64_t seed = 1;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    int checked = 0;
    int skipped = 0;  // finite-difference secant crossed a branch kink
    bool pass = false;
};

// Compares analytic parameter gradients against central finite differences on
// a sampled parameter subset. A coordinate is skipped when the +h and -h
// evaluations disagree on any branch fingerprint, i.e. the secant straddles a
// ReLU or smooth-L1 kink.
GradCheckReport grad_check(const PredictorParams& params, const LossFn& loss_fn,
                           const GradCheckOptions& opts = {});

// Mixes branch decisions into a fingerprint (FNV-1a over booleans).
inline void fingerprint_mix(uint64_t& fp, bool bit) {
    fp ^= bit ? 0x9e3779b97f4a7c15ULL : 0x2545f4914f6cdd1dULL;
    fp *= 1099511628211ULL;
}

// Fingerprint of both ReLU activation patterns in a forward cache.
uint64_t relu_fingerprint(const ForwardCache& cache);

// ---- checkpoints ----

struct Checkpoint {
    PredictorParams params;
    int rows = 0;
    int cols = 0;
};

void save_checkpoint(const PredictorParams& params, int rows, int cols,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bevmotion
