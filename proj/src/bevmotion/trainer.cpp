#include "bevmotion/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "bevmotion/clustering.hpp"
#include "bevmotion/geometry.hpp"
#include "bevmotion/pseudo_labels.hpp"
#include "bevmotion/rng.hpp"

namespace bevmotion {

void TrainConfig::validate() const {
    if (epochs < 1) {
        raise(ErrorKind::config, "epochs must be >= 1");
    }
    if (msm_warmup_epochs < 0) {
        raise(ErrorKind::config, "msm_warmup_epochs must be >= 0");
    }
    if (knn_k < 1) {
        raise(ErrorKind::config, "knn_k must be >= 1");
    }
    if (!(state_speed_threshold >= 0.0)) {
        raise(ErrorKind::config, "state_speed_threshold must be >= 0");
    }
    weights.validate();
    net.validate();
    transport.validate();
    ground.validate();
}

namespace {

// Wraps dense network output planes as a MotionField, zeroing values off the
// mask so the type's invariant holds.
MotionField wrap_motion(const GridD& dx, const GridD& dy, const GridU8& mask,
                        double horizon) {
    MotionField f(dx.rows(), dx.cols(), horizon);
    f.valid = mask;
    for (size_t k = 0; k < f.dx.size(); ++k) {
        if (mask[k]) {
            f.dx[k] = dx[k];
            f.dy[k] = dy[k];
        }
    }
    return f;
}

// sync + crop + ground split + pillar maps for one frame in the anchor pose
struct FrameView {
    PillarSet full;
    PillarSet non_ground;
};

FrameView build_view(const PointFrame& frame, const RigidPose& anchor_pose,
                     const GridSpec& grid, const GroundParams& ground, uint64_t seed) {
    const PointFrame synced = sync_to_frame(frame, anchor_pose);
    const PointFrame cropped = crop(synced, grid);
    FrameView view;
    view.full = pillarize_frame(cropped, grid);
    const GroundSplit split = remove_ground(cropped, ground, seed);
    view.non_ground = pillarize_frame(split.non_ground, grid);
    return view;
}

}  // namespace

SamplePrep prepare_samples(const LabeledSequence& seq, const TrainConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(seq.n_frames());
    const int t_in = cfg.net.t_in;
    const GridSpec& grid = seq.spec.grid;

    SamplePrep prep;
    const int t_lo = t_in - 1;
    const int t_hi = n - 1 - std::max(t_in - 1, 2);
    if (t_lo > t_hi) {
        prep.log.push_back("dataset too short for any training sample");
        return prep;
    }

    for (int t = t_lo; t <= t_hi; ++t) {
        Sample s;
        s.t = t;
        const RigidPose& anchor_pose = seq.frames[t].pose;

        const FrameView current =
            build_view(seq.frames[t], anchor_pose, grid, cfg.ground, seq.spec.seed + t);
        const FrameView next = build_view(seq.frames[t + 1], anchor_pose, grid, cfg.ground,
                                          seq.spec.seed + t + 1);
        const FrameView next2 = build_view(seq.frames[t + 2], anchor_pose, grid, cfg.ground,
                                           seq.spec.seed + t + 2);
        if (current.non_ground.empty() || next.non_ground.empty() ||
            (cfg.two_step_enabled && next2.non_ground.empty())) {
            prep.log.push_back("skip t=" + std::to_string(t) + ": empty matching pillar set");
            continue;
        }

        s.src_ng = current.non_ground;
        s.tgt1_ng = next.non_ground;
        s.tgt2_ng = next2.non_ground;
        s.occupancy = current.full.occupancy;
        for (const Cell& cell : current.full.cells) {
            if (!s.src_ng.occupancy.at(cell.row, cell.col)) {
                s.ground_cells.push_back(cell);
            }
        }
        s.clusters = bfs_clusters(s.src_ng, cfg.connectivity);

        s.fwd_input.reserve(t_in);
        for (int k = t - t_in + 1; k <= t; ++k) {
            s.fwd_input.push_back(
                build_view(seq.frames[k], anchor_pose, grid, cfg.ground, seq.spec.seed + k)
                    .full.occupancy);
        }
        if (cfg.backward_enabled) {
            s.bwd_input.reserve(t_in);
            for (int k = t + t_in - 1; k >= t; --k) {
                s.bwd_input.push_back(
                    build_view(seq.frames[k], anchor_pose, grid, cfg.ground, seq.spec.seed + k)
                        .full.occupancy);
            }
        }
        prep.samples.push_back(std::move(s));
    }
    return prep;
}

TrainResult train(const LabeledSequence& seq, PredictorParams params, const TrainConfig& cfg) {
    SamplePrep prep = prepare_samples(seq, cfg);
    if (prep.samples.empty()) {
        raise(ErrorKind::empty_input, "no usable training samples in dataset");
    }

    TrainResult result;
    result.log = std::move(prep.log);
    result.rows = seq.spec.grid.rows();
    result.cols = seq.spec.grid.cols();

    OptimizerState opt = OptimizerState::init(cfg.adam, params.values().size());
    const double step_seconds = seq.spec.frame_period;

    std::vector<size_t> order(prep.samples.size());
    for (size_t k = 0; k < order.size(); ++k) {
        order[k] = k;
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        opt.epoch = epoch;
        // deterministic shuffle per epoch
        Rng shuffle_rng(cfg.seed * 0x9e3779b9ULL + epoch);
        for (size_t k = order.size(); k > 1; --k) {
            std::swap(order[k - 1], order[shuffle_rng.next_below(k)]);
        }

        EpochStats stats;
        int empty_sup_masks = 0;
        const bool msm_active = cfg.msm_enabled && epoch >= cfg.msm_warmup_epochs;

        for (size_t oi : order) {
            const Sample& s = prep.samples[oi];
            NetOutput out_f = forward(params, s.fwd_input);
            std::optional<NetOutput> out_b;
            if (cfg.backward_enabled) {
                out_b = forward(params, s.bwd_input);
            }

            // Labels regenerate each epoch; pre-warping uses the current
            // prediction once the model has trained at least one epoch.
            MotionField prewarp_field;
            const MotionField* prewarp_ptr = nullptr;
            if (epoch > 0) {
                prewarp_field =
                    wrap_motion(out_f.dx02, out_f.dy02, s.src_ng.occupancy, step_seconds);
                prewarp_ptr = &prewarp_field;
            }
            const MotionField pseudo1 =
                generate_pseudo_motion(s.src_ng, s.tgt1_ng, prewarp_ptr, cfg.transport,
                                       s.ground_cells, step_seconds);
            std::optional<MotionField> pseudo2;
            if (cfg.two_step_enabled) {
                pseudo2 = generate_two_step(s.src_ng, s.tgt2_ng, prewarp_ptr, cfg.transport,
                                            s.ground_cells, 2.0 * step_seconds);
            }
            const StateMap state_labels =
                pseudo_state_labels(pseudo1, step_seconds, cfg.state_speed_threshold);

            TotalLossInputs in;
            in.pred_dx02 = &out_f.dx02;
            in.pred_dy02 = &out_f.dy02;
            in.pred_dx04 = &out_f.dx04;
            in.pred_dy04 = &out_f.dy04;
            in.logit_static = &out_f.logit_static;
            in.logit_moving = &out_f.logit_moving;
            if (out_b) {
                in.back_dx02 = &out_b->dx02;
                in.back_dy02 = &out_b->dy02;
            }
            in.pseudo_one_step = &pseudo1;
            in.pseudo_two_step = pseudo2 ? &*pseudo2 : nullptr;
            in.state_labels = &state_labels;
            in.clusters = &s.clusters;
            in.pillars = &s.src_ng;
            in.occupancy = &s.occupancy;

            TotalLossOptions opts;
            opts.weights = cfg.weights;
            opts.msm_enabled = msm_active;
            opts.smoothness = cfg.smoothness;
            opts.knn_k = cfg.knn_k;

            const TotalLossResult loss = total_loss(in, opts);

            OutputGrads fwd_grads;
            fwd_grads.dx02 = loss.g_dx02;
            fwd_grads.dy02 = loss.g_dy02;
            fwd_grads.dx04 = loss.g_dx04;
            fwd_grads.dy04 = loss.g_dy04;
            fwd_grads.logit_static = loss.g_logit_static;
            fwd_grads.logit_moving = loss.g_logit_moving;
            BackwardResult grads = backward(params, out_f.cache, fwd_grads);
            if (out_b) {
                OutputGrads bwd_grads;
                bwd_grads.dx02 = loss.g_back_dx02;
                bwd_grads.dy02 = loss.g_back_dy02;
                const BackwardResult extra = backward(params, out_b->cache, bwd_grads);
                for (size_t k = 0; k < grads.param_grads.size(); ++k) {
                    grads.param_grads[k] += extra.param_grads[k];
                }
            }
            adam_step(params, grads.param_grads, opt);

            stats.total += loss.report.total;
            stats.sup += loss.report.sup;
            stats.cluster += loss.report.cluster;
            stats.back += loss.report.back;
            stats.forward += loss.report.forward;
            stats.state += loss.report.state;
            stats.samples += 1;
            empty_sup_masks += loss.report.sup_masked_cells == 0 ? 1 : 0;
        }
        if (empty_sup_masks > 0) {
            result.log.push_back("epoch " + std::to_string(epoch) + ": " +
                                 std::to_string(empty_sup_masks) +
                                 " samples with an empty motion supervision mask");
        }
        if (stats.samples > 0) {
            const double inv = 1.0 / stats.samples;
            stats.total *= inv;
            stats.sup *= inv;
            stats.cluster *= inv;
            stats.back *= inv;
            stats.forward *= inv;
            stats.state *= inv;
        }
        result.curves.push_back(stats);
    }
    result.params = std::move(params);
    return result;
}

// ---- evaluation ----

MotionField interpolate_to_1s(const MotionField& d02, const MotionField& d04) {
    if (!d02.valid.same_shape(d04.valid) || d02.valid.data() != d04.valid.data()) {
        raise(ErrorKind::shape, "interpolate_to_1s masks must match");
    }
    MotionField out(d02.rows(), d02.cols(), 1.0);
    out.valid = d02.valid;
    for (size_t k = 0; k < out.dx.size(); ++k) {
        if (!out.valid[k]) {
            continue;
        }
        out.dx[k] = 0.5 * (5.0 * d02.dx[k] + 2.5 * d04.dx[k]);
        out.dy[k] = 0.5 * (5.0 * d02.dy[k] + 2.5 * d04.dy[k]);
    }
    return out;
}

namespace {

int speed_group(double speed_mps) {
    if (speed_mps < 0.2) {
        return 0;
    }
    return speed_mps < 5.0 ? 1 : 2;
}

GroupStats stats_of(std::vector<double> values) {
    GroupStats g;
    g.count = values.size();
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    g.mean = sum / values.size();
    const size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    if (values.size() % 2 == 1) {
        g.median = values[mid];
    } else {
        const double upper = values[mid];
        const double lower = *std::max_element(values.begin(), values.begin() + mid);
        g.median = 0.5 * (lower + upper);
    }
    return g;
}

}  // namespace

void EvalAccumulator::add_error(const MotionField& pred_1s, const MotionField& gt_1s,
                                const GridD& gt_speed) {
    if (!pred_1s.valid.same_shape(gt_1s.valid)) {
        raise(ErrorKind::shape, "evaluate mask shape mismatch");
    }
    for (int i = 0; i < pred_1s.rows(); ++i) {
        for (int j = 0; j < pred_1s.cols(); ++j) {
            if (!pred_1s.valid.at(i, j) || !gt_1s.valid.at(i, j)) {
                continue;
            }
            const double ex = pred_1s.dx.at(i, j) - gt_1s.dx.at(i, j);
            const double ey = pred_1s.dy.at(i, j) - gt_1s.dy.at(i, j);
            errors_[speed_group(gt_speed.at(i, j))].push_back(std::hypot(ex, ey));
        }
    }
}

void EvalAccumulator::add_divergence(const MotionField& m_fwd, const MotionField& m_bwd,
                                     const GridD& gt_speed) {
    if (!m_fwd.valid.same_shape(m_bwd.valid) || m_fwd.valid.data() != m_bwd.valid.data()) {
        raise(ErrorKind::shape, "divergence masks must match");
    }
    for (int i = 0; i < m_fwd.rows(); ++i) {
        for (int j = 0; j < m_fwd.cols(); ++j) {
            if (!m_fwd.valid.at(i, j)) {
                continue;
            }
            const double rx = m_fwd.dx.at(i, j) + m_bwd.dx.at(i, j);
            const double ry = m_fwd.dy.at(i, j) + m_bwd.dy.at(i, j);
            divs_[speed_group(gt_speed.at(i, j))].push_back(std::hypot(rx, ry));
        }
    }
}

EvalReport EvalAccumulator::finalize() const {
    EvalReport report;
    std::optional<GroupStats>* err_slots[3] = {&report.group_static, &report.group_slow,
                                               &report.group_fast};
    std::optional<GroupStats>* div_slots[3] = {&report.div_static, &report.div_slow,
                                               &report.div_fast};
    for (int g = 0; g < 3; ++g) {
        if (!errors_[g].empty()) {
            *err_slots[g] = stats_of(errors_[g]);
        }
        if (!divs_[g].empty()) {
            *div_slots[g] = stats_of(divs_[g]);
        }
    }
    return report;
}

EvalReport evaluate(const MotionField& pred_1s, const MotionField& gt_1s,
                    const GridD& gt_speed) {
    EvalAccumulator acc;
    acc.add_error(pred_1s, gt_1s, gt_speed);
    return acc.finalize();
}

EvalReport divergence(const MotionField& m_fwd, const MotionField& m_bwd,
                      const GridD& gt_speed) {
    EvalAccumulator acc;
    acc.add_divergence(m_fwd, m_bwd, gt_speed);
    return acc.finalize();
}

EvalReport evaluate_dataset(const LabeledSequence& seq, const PredictorParams& params,
                            const TrainConfig& cfg) {
    const SamplePrep prep = prepare_samples(seq, cfg);
    if (prep.samples.empty()) {
        raise(ErrorKind::empty_input, "no usable evaluation samples in dataset");
    }
    EvalAccumulator acc;
    for (const Sample& s : prep.samples) {
        const NetOutput out_f = forward(params, s.fwd_input);
        const MotionField d02 = wrap_motion(out_f.dx02, out_f.dy02, s.occupancy, 0.2);
        const MotionField d04 = wrap_motion(out_f.dx04, out_f.dy04, s.occupancy, 0.4);
        const MotionField pred_1s = interpolate_to_1s(d02, d04);

        MotionField gt_1s = seq.gt_motion_1s[s.t];
        // restrict to cells occupied in this sample's view
        for (size_t k = 0; k < gt_1s.valid.size(); ++k) {
            gt_1s.valid[k] = gt_1s.valid[k] && s.occupancy[k];
        }
        MotionField pred_masked = pred_1s;
        pred_masked.valid = gt_1s.valid;
        acc.add_error(pred_masked, gt_1s, seq.gt_speed[s.t]);

        if (cfg.backward_enabled) {
            const NetOutput out_b = forward(params, s.bwd_input);
            const MotionField bwd02 =
                wrap_motion(out_b.dx02, out_b.dy02, s.occupancy, 0.2);
            acc.add_divergence(d02, bwd02, seq.gt_speed[s.t]);
        }
    }
    return acc.finalize();
}

}  // namespace bevmotion
