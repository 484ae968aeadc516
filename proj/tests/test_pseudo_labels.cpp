#include "doctest.h"

#include <cmath>

#include "bevmotion/pseudo_labels.hpp"
#include "bevmotion/transport.hpp"

using namespace bevmotion;

namespace {

GridSpec small_spec() {
    GridSpec spec;
    spec.x_min = -8;
    spec.x_max = 8;
    spec.y_min = -8;
    spec.y_max = 8;
    return spec;
}

PillarSet pillars_at(const std::vector<Vec2>& metric_points) {
    PillarSet p;
    p.spec = small_spec();
    p.occupancy = GridU8(p.spec.rows(), p.spec.cols());
    for (const Vec2& pt : metric_points) {
        const int i = p.spec.row_of(pt.y);
        const int j = p.spec.col_of(pt.x);
        if (!p.occupancy.at(i, j)) {
            p.occupancy.at(i, j) = 1;
        }
    }
    for (int i = 0; i < p.occupancy.rows(); ++i) {
        for (int j = 0; j < p.occupancy.cols(); ++j) {
            if (p.occupancy.at(i, j)) {
                p.cells.push_back({i, j});
                p.centers.push_back(p.spec.cell_center(i, j));
            }
        }
    }
    return p;
}

TransportConfig tight_transport() {
    TransportConfig cfg;
    cfg.epsilon = 0.01;
    cfg.max_iters = 5000;
    cfg.marginal_tol = 1e-9;
    return cfg;
}

}  // namespace

TEST_CASE("single-pillar pair produces the forced label") {
    const PillarSet src = pillars_at({{0.125, 0.125}});
    const PillarSet tgt = pillars_at({{1.125, 0.125}});
    const MotionField field = generate_pseudo_motion(src, tgt, nullptr, tight_transport());
    const Cell c = src.cells[0];
    CHECK(field.dx.at(c.row, c.col) == doctest::Approx(1.0));
    CHECK(field.dy.at(c.row, c.col) == doctest::Approx(0.0));
    CHECK(field.valid.at(c.row, c.col) == 1);
}

TEST_CASE("rigid translation with good separation recovers identical labels") {
    // two pillars far apart, both moved by (0.5, 0): displacement well under
    // half the separation
    const PillarSet src = pillars_at({{0.125, 0.125}, {5.125, 0.125}});
    const PillarSet tgt = pillars_at({{0.625, 0.125}, {5.625, 0.125}});
    const CostMatrix cost = cost_matrix(src.centers, tgt.centers);
    // the assignment oracle confirms the identity matching is optimal
    CHECK(brute_force_assignment(cost) == std::vector<int>{0, 1});

    const MotionField field = generate_pseudo_motion(src, tgt, nullptr, tight_transport());
    for (const Cell& c : src.cells) {
        CHECK(field.dx.at(c.row, c.col) == doctest::Approx(0.5));
        CHECK(field.dy.at(c.row, c.col) == doctest::Approx(0.0));
    }
}

TEST_CASE("a spurious artifact pillar degrades at least one label") {
    const PillarSet src = pillars_at({{0.125, 0.125}, {5.125, 0.125}});
    const PillarSet tgt =
        pillars_at({{0.625, 0.125}, {5.625, 0.125}, {0.3, 0.125}});  // artifact near source
    const MotionField field = generate_pseudo_motion(src, tgt, nullptr, tight_transport());
    double worst = 0.0;
    for (const Cell& c : src.cells) {
        const double ex = field.dx.at(c.row, c.col) - 0.5;
        const double ey = field.dy.at(c.row, c.col) - 0.0;
        worst = std::max(worst, std::hypot(ex, ey));
    }
    CHECK(worst > 0.0);
}

TEST_CASE("labels point at actual target pillar centers") {
    const PillarSet src = pillars_at({{0.1, 0.1}, {2.3, -1.2}, {-3.4, 4.1}});
    const PillarSet tgt = pillars_at({{0.7, 0.3}, {2.9, -1.4}, {-2.8, 4.4}, {1.0, 1.0}});
    const MotionField field = generate_pseudo_motion(src, tgt, nullptr, tight_transport());
    for (size_t k = 0; k < src.count(); ++k) {
        const Cell& c = src.cells[k];
        const Vec2 endpoint{src.centers[k].x + field.dx.at(c.row, c.col),
                            src.centers[k].y + field.dy.at(c.row, c.col)};
        bool found = false;
        for (const Vec2& center : tgt.centers) {
            if (std::abs(center.x - endpoint.x) < 1e-12 &&
                std::abs(center.y - endpoint.y) < 1e-12) {
                found = true;
                break;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("pre-warping measures labels from the original source positions") {
    const PillarSet src = pillars_at({{0.125, 0.125}});
    const PillarSet tgt = pillars_at({{2.125, 0.125}});
    MotionField predicted(src.occupancy.rows(), src.occupancy.cols(), 0.2);
    const Cell c = src.cells[0];
    predicted.dx.at(c.row, c.col) = 2.0;
    predicted.valid.at(c.row, c.col) = 1;
    const MotionField field =
        generate_pseudo_motion(src, tgt, &predicted, tight_transport());
    CHECK(field.dx.at(c.row, c.col) == doctest::Approx(2.0));  // not 0 (residual)
}

TEST_CASE("ground cells carry zero labels and classify static") {
    const PillarSet src = pillars_at({{0.125, 0.125}});
    const PillarSet tgt = pillars_at({{1.125, 0.125}});
    const std::vector<Cell> ground = {{10, 10}, {11, 10}};
    const MotionField field =
        generate_pseudo_motion(src, tgt, nullptr, tight_transport(), ground);
    const StateMap state = pseudo_state_labels(field, 0.2, 0.2);
    for (const Cell& g : ground) {
        CHECK(field.valid.at(g.row, g.col) == 1);
        CHECK(field.dx.at(g.row, g.col) == 0.0);
        CHECK(field.dy.at(g.row, g.col) == 0.0);
        CHECK(state.at(g.row, g.col) == MotionState::statics);
    }
}

TEST_CASE("empty pillar sets propagate the empty-input error") {
    const PillarSet src = pillars_at({{0.125, 0.125}});
    PillarSet empty;
    empty.spec = small_spec();
    empty.occupancy = GridU8(empty.spec.rows(), empty.spec.cols());
    CHECK_THROWS_AS(generate_pseudo_motion(src, empty, nullptr, tight_transport()), Error);
    CHECK_THROWS_AS(generate_pseudo_motion(empty, src, nullptr, tight_transport()), Error);
}

TEST_CASE("two-step labels double the one-step labels under constant velocity") {
    const PillarSet src = pillars_at({{0.125, 0.125}, {4.125, 2.125}});
    const PillarSet tgt1 = pillars_at({{0.625, 0.125}, {4.625, 2.125}});
    const PillarSet tgt2 = pillars_at({{1.125, 0.125}, {5.125, 2.125}});
    const MotionField one =
        generate_pseudo_motion(src, tgt1, nullptr, tight_transport());
    const MotionField two = generate_two_step(src, tgt2, nullptr, tight_transport());
    CHECK(two.horizon_seconds == doctest::Approx(0.4));
    for (const Cell& c : src.cells) {
        CHECK(two.dx.at(c.row, c.col) ==
              doctest::Approx(2.0 * one.dx.at(c.row, c.col)));
        CHECK(two.dy.at(c.row, c.col) ==
              doctest::Approx(2.0 * one.dy.at(c.row, c.col)));
    }
}

TEST_CASE("two-step 1x1 label is the direct center difference") {
    const PillarSet src = pillars_at({{0.125, 0.125}});
    const PillarSet tgt2 = pillars_at({{3.125, 1.125}});
    const MotionField field = generate_two_step(src, tgt2, nullptr, tight_transport());
    const Cell c = src.cells[0];
    CHECK(field.dx.at(c.row, c.col) == doctest::Approx(3.0));
    CHECK(field.dy.at(c.row, c.col) == doctest::Approx(1.0));
}

TEST_CASE("stationary scenes give all-zero labels") {
    const PillarSet src = pillars_at({{0.125, 0.125}, {-2.875, 3.125}});
    const MotionField field = generate_two_step(src, src, nullptr, tight_transport());
    for (const Cell& c : src.cells) {
        CHECK(field.dx.at(c.row, c.col) == 0.0);
        CHECK(field.dy.at(c.row, c.col) == 0.0);
    }
}

TEST_CASE("two-step prewarp uses twice the one-step prediction") {
    const PillarSet src = pillars_at({{0.125, 0.125}});
    const PillarSet tgt2 = pillars_at({{4.125, 0.125}});
    MotionField predicted(src.occupancy.rows(), src.occupancy.cols(), 0.2);
    const Cell c = src.cells[0];
    predicted.dx.at(c.row, c.col) = 2.0;  // one-step prediction; two-step warp = 4.0
    predicted.valid.at(c.row, c.col) = 1;
    const MotionField field = generate_two_step(src, tgt2, &predicted, tight_transport());
    CHECK(field.dx.at(c.row, c.col) == doctest::Approx(4.0));
}

TEST_CASE("pseudo state labels threshold on speed") {
    MotionField labels(4, 4, 0.2);
    labels.valid.at(0, 0) = 1;  // zero motion -> static
    labels.valid.at(1, 1) = 1;
    labels.dx.at(1, 1) = 0.05;  // 0.25 m/s over 0.2 s -> moving
    labels.valid.at(2, 2) = 1;
    labels.dx.at(2, 2) = 0.03;  // 0.15 m/s -> static

    const StateMap state = pseudo_state_labels(labels, 0.2, 0.2);
    CHECK(state.at(0, 0) == MotionState::statics);
    CHECK(state.at(1, 1) == MotionState::moving);
    CHECK(state.at(2, 2) == MotionState::statics);
    CHECK(state.at(3, 3) == MotionState::invalid);
}

TEST_CASE("state labels require a positive step") {
    MotionField labels(2, 2, 0.2);
    CHECK_THROWS_AS(pseudo_state_labels(labels, 0.0, 0.2), Error);
}
