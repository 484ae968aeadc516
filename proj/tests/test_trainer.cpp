#include "doctest.h"

#include <cmath>

#include "bevmotion/trainer.hpp"

using namespace bevmotion;

namespace {

MotionField constant_field(int rows, int cols, double dx, double dy, double horizon,
                           const GridU8& mask) {
    MotionField f(rows, cols, horizon);
    f.valid = mask;
    for (size_t k = 0; k < f.dx.size(); ++k) {
        if (mask[k]) {
            f.dx[k] = dx;
            f.dy[k] = dy;
        }
    }
    return f;
}

SceneSpec toy_scene() {
    SceneSpec spec;
    spec.grid.x_min = -4;
    spec.grid.x_max = 4;
    spec.grid.y_min = -4;
    spec.grid.y_max = 4;
    spec.n_movers = 3;
    spec.n_frames = 49;  // 40 usable samples with t_in = 5
    spec.speed_min = 1.25;
    spec.speed_max = 6.25;
    spec.mover_size_min = 0.4;
    spec.mover_size_max = 0.8;
    spec.ground_density = 1.0;
    spec.artifact_rate = 1.0;
    spec.ego_vx = 0.5;
    spec.seed = 11;
    return spec;
}

TrainConfig fast_train_config() {
    TrainConfig cfg;
    cfg.net.hidden = 8;
    cfg.transport.max_iters = 300;
    cfg.transport.marginal_tol = 1e-7;
    return cfg;
}

}  // namespace

TEST_CASE("interpolate_to_1s reproduces constant velocity") {
    GridU8 mask(2, 2, 1);
    SUBCASE("1 m/s straight line") {
        const MotionField d02 = constant_field(2, 2, 0.2, 0.0, 0.2, mask);
        const MotionField d04 = constant_field(2, 2, 0.4, 0.0, 0.4, mask);
        const MotionField out = interpolate_to_1s(d02, d04);
        CHECK(out.dx.at(0, 0) == doctest::Approx(1.0));
        CHECK(out.dy.at(0, 0) == doctest::Approx(0.0));
        CHECK(out.horizon_seconds == 1.0);
    }
    SUBCASE("zero stays zero") {
        const MotionField d02 = constant_field(2, 2, 0.0, 0.0, 0.2, mask);
        const MotionField d04 = constant_field(2, 2, 0.0, 0.0, 0.4, mask);
        CHECK(interpolate_to_1s(d02, d04).dx.at(1, 1) == 0.0);
    }
    SUBCASE("disagreeing horizons average") {
        const MotionField d02 = constant_field(2, 2, 0.2, 0.0, 0.2, mask);
        const MotionField d04 = constant_field(2, 2, 0.2, 0.0, 0.4, mask);
        // mean of (1, 0) and (0.5, 0)
        CHECK(interpolate_to_1s(d02, d04).dx.at(0, 0) == doctest::Approx(0.75));
    }
    SUBCASE("mask mismatch is a shape error") {
        GridU8 other(2, 2, 1);
        other.at(0, 0) = 0;
        const MotionField d02 = constant_field(2, 2, 0.2, 0.0, 0.2, mask);
        const MotionField d04 = constant_field(2, 2, 0.4, 0.0, 0.4, other);
        CHECK_THROWS_AS(interpolate_to_1s(d02, d04), Error);
    }
}

TEST_CASE("evaluate returns zero errors when predictions equal ground truth") {
    GridU8 mask(3, 3, 1);
    const MotionField gt = constant_field(3, 3, 1.5, -0.5, 1.0, mask);
    GridD speed(3, 3, 3.0);
    const EvalReport report = evaluate(gt, gt, speed);
    REQUIRE(report.group_slow.has_value());
    CHECK(report.group_slow->mean == 0.0);
    CHECK(report.group_slow->median == 0.0);
    CHECK(report.group_slow->count == 9);
    CHECK(!report.group_static.has_value());  // empty groups are absent
    CHECK(!report.group_fast.has_value());
}

TEST_CASE("a single fast cell off by one meter scores mean = median = 1") {
    GridU8 mask(2, 2);
    mask.at(0, 0) = 1;
    const MotionField gt = constant_field(2, 2, 6.0, 0.0, 1.0, mask);
    MotionField pred = gt;
    pred.dx.at(0, 0) += 1.0;
    GridD speed(2, 2);
    speed.at(0, 0) = 6.0;
    const EvalReport report = evaluate(pred, gt, speed);
    REQUIRE(report.group_fast.has_value());
    CHECK(report.group_fast->mean == doctest::Approx(1.0));
    CHECK(report.group_fast->median == doctest::Approx(1.0));
    CHECK(report.group_fast->count == 1);
}

TEST_CASE("speed exactly 5 m/s lands in the fast group") {
    GridU8 mask(1, 1, 1);
    const MotionField gt = constant_field(1, 1, 5.0, 0.0, 1.0, mask);
    GridD speed(1, 1, 5.0);
    const EvalReport report = evaluate(gt, gt, speed);
    CHECK(report.group_fast.has_value());
    CHECK(!report.group_slow.has_value());
}

TEST_CASE("divergence measures the forward/backward residual per group") {
    GridU8 mask(2, 2, 1);
    SUBCASE("negated backward zeroes the divergence") {
        const MotionField fwd = constant_field(2, 2, 0.8, -0.3, 0.2, mask);
        MotionField bwd = fwd;
        for (size_t k = 0; k < bwd.dx.size(); ++k) {
            bwd.dx[k] = -bwd.dx[k];
            bwd.dy[k] = -bwd.dy[k];
        }
        GridD speed(2, 2, 1.0);
        const EvalReport report = divergence(fwd, bwd, speed);
        REQUIRE(report.div_slow.has_value());
        CHECK(report.div_slow->mean == 0.0);
    }
    SUBCASE("constant residual gives constant group means") {
        const MotionField fwd = constant_field(2, 2, 1.0, 0.0, 0.2, mask);
        const MotionField bwd = constant_field(2, 2, 0.0, 0.0, 0.2, mask);
        GridD speed(2, 2);
        speed.at(0, 0) = 0.0;   // static
        speed.at(0, 1) = 1.0;   // slow
        speed.at(1, 0) = 6.0;   // fast
        speed.at(1, 1) = 10.0;  // fast
        const EvalReport report = divergence(fwd, bwd, speed);
        CHECK(report.div_static->mean == doctest::Approx(1.0));
        CHECK(report.div_slow->mean == doctest::Approx(1.0));
        CHECK(report.div_fast->mean == doctest::Approx(1.0));
    }
}

TEST_CASE("prepare_samples skips short datasets and empty matches") {
    SceneSpec spec = toy_scene();
    spec.n_frames = 6;  // too short for t_in = 5 plus two future frames
    const LabeledSequence seq = generate(spec);
    const TrainConfig cfg = fast_train_config();
    const SamplePrep prep = prepare_samples(seq, cfg);
    CHECK(prep.samples.empty());
    CHECK(!prep.log.empty());
    CHECK_THROWS_AS(train(seq, PredictorParams::he_init(cfg.net, 1), cfg), Error);
}

TEST_CASE("toy training decreases the sup-only loss over the first epochs") {
    const LabeledSequence seq = generate(toy_scene());
    TrainConfig cfg = fast_train_config();
    cfg.epochs = 5;
    cfg.weights.alpha = 0.0;
    cfg.weights.beta = 0.0;
    cfg.weights.gamma = 0.0;
    cfg.weights.sigma = 0.0;
    cfg.msm_enabled = false;
    cfg.backward_enabled = false;
    cfg.seed = 7;

    const TrainResult result =
        train(seq, PredictorParams::he_init(cfg.net, cfg.seed), cfg);
    REQUIRE(result.curves.size() == 5);
    CHECK(result.curves[0].samples >= 35);
    for (size_t e = 1; e < result.curves.size(); ++e) {
        CHECK(result.curves[e].total < result.curves[e - 1].total);
    }
}

TEST_CASE("training is epoch-deterministic under a fixed seed") {
    SceneSpec spec = toy_scene();
    spec.n_frames = 14;
    const LabeledSequence seq = generate(spec);
    TrainConfig cfg = fast_train_config();
    cfg.epochs = 2;

    const TrainResult a = train(seq, PredictorParams::he_init(cfg.net, cfg.seed), cfg);
    const TrainResult b = train(seq, PredictorParams::he_init(cfg.net, cfg.seed), cfg);
    REQUIRE(a.curves.size() == b.curves.size());
    for (size_t e = 0; e < a.curves.size(); ++e) {
        CHECK(a.curves[e].total == b.curves[e].total);
    }
    CHECK(a.params.values() == b.params.values());
}

TEST_CASE("two-step and backward passes can be disabled independently") {
    SceneSpec spec = toy_scene();
    spec.n_frames = 14;
    const LabeledSequence seq = generate(spec);
    TrainConfig cfg = fast_train_config();
    cfg.epochs = 1;
    cfg.two_step_enabled = false;
    cfg.backward_enabled = false;
    cfg.weights.beta = 0.0;
    cfg.weights.gamma = 0.0;
    const TrainResult result = train(seq, PredictorParams::he_init(cfg.net, 1), cfg);
    REQUIRE(result.curves.size() == 1);
    CHECK(result.curves[0].samples > 0);
    CHECK(result.curves[0].back == 0.0);
    const EvalReport report = evaluate_dataset(seq, result.params, cfg);
    CHECK(!report.div_static.has_value());  // no backward pass, no divergence
}

TEST_CASE("evaluate_dataset aggregates groups over samples") {
    SceneSpec spec = toy_scene();
    spec.n_frames = 16;
    const LabeledSequence seq = generate(spec);
    TrainConfig cfg = fast_train_config();
    const PredictorParams params = PredictorParams::he_init(cfg.net, 3);
    const EvalReport report = evaluate_dataset(seq, params, cfg);
    REQUIRE(report.group_static.has_value());
    CHECK(report.group_static->count > 50);
    CHECK(report.div_static.has_value());  // backward enabled by default
}
