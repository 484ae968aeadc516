#include "bevmotion/synth.hpp"

#include <algorithm>
#include <cmath>

#include "bevmotion/geometry.hpp"
#include "bevmotion/rng.hpp"

namespace bevmotion {

void SceneSpec::validate() const {
    grid.validate();
    if (n_movers < 0) {
        raise(ErrorKind::config, "n_movers must be >= 0");
    }
    if (!(mover_size_min > 0.0) || mover_size_max < mover_size_min) {
        raise(ErrorKind::config, "mover size range is invalid");
    }
    if (speed_min < 0.0 || speed_max < speed_min) {
        raise(ErrorKind::config, "speed range is invalid");
    }
    if (ground_density < 0.0 || artifact_rate < 0.0) {
        raise(ErrorKind::config, "densities must be >= 0");
    }
    if (!(frame_period > 0.0)) {
        raise(ErrorKind::config, "frame_period must be positive");
    }
    if (n_frames < 1) {
        raise(ErrorKind::config, "n_frames must be >= 1");
    }
}

namespace {

// 1/1024 m lattice keeps coordinates exact in float32 and keeps whole-cell
// translations exact.
double quantize(double x) { return std::round(x * 1024.0) / 1024.0; }

struct Mover {
    Vec2 anchor;               // position of box center at anchor_frame
    int anchor_frame = 0;
    Vec2 step;                 // displacement per frame, meters
    std::vector<Vec3> local;   // body-frame points, quantized
};

}  // namespace

void derive_gt_horizons(LabeledSequence& seq) {
    const size_t n = seq.gt_motion_02.size();
    seq.gt_motion_04.assign(n, MotionField());
    seq.gt_motion_1s.assign(n, MotionField());
    seq.gt_speed.assign(n, GridD());
    for (size_t t = 0; t < n; ++t) {
        const MotionField& base = seq.gt_motion_02[t];
        MotionField m04(base.rows(), base.cols(), 2.0 * base.horizon_seconds);
        MotionField m1s(base.rows(), base.cols(), 1.0);
        GridD speed(base.rows(), base.cols());
        m04.valid = base.valid;
        m1s.valid = base.valid;
        for (size_t k = 0; k < base.dx.size(); ++k) {
            m04.dx[k] = 2.0 * base.dx[k];
            m04.dy[k] = 2.0 * base.dy[k];
            m1s.dx[k] = 5.0 * base.dx[k];
            m1s.dy[k] = 5.0 * base.dy[k];
            speed[k] = std::hypot(m1s.dx[k], m1s.dy[k]);
        }
        seq.gt_motion_04[t] = std::move(m04);
        seq.gt_motion_1s[t] = std::move(m1s);
        seq.gt_speed[t] = std::move(speed);
    }
}

LabeledSequence generate(const SceneSpec& spec) {
    spec.validate();
    const GridSpec& grid = spec.grid;
    Rng rng(spec.seed);

    // Mover setup. Anchor frames stagger visibility across the sequence so
    // fast movers do not all leave the window at once.
    std::vector<Mover> movers(spec.n_movers);
    const double x_span = grid.x_max - grid.x_min;
    const double y_span = grid.y_max - grid.y_min;
    for (Mover& m : movers) {
        const double lx = rng.uniform(spec.mover_size_min, spec.mover_size_max);
        const double ly = rng.uniform(spec.mover_size_min, spec.mover_size_max);
        const double speed = rng.uniform(spec.speed_min, spec.speed_max);
        const double angle = rng.uniform(0.0, 6.283185307179586);
        const double vx = speed * std::cos(angle);
        const double vy = speed * std::sin(angle);
        if (spec.snap_to_grid) {
            int sx = static_cast<int>(std::lround(vx * spec.frame_period / grid.cell_x));
            int sy = static_cast<int>(std::lround(vy * spec.frame_period / grid.cell_y));
            if (sx == 0 && sy == 0 && spec.speed_min > 0.0) {
                sx = vx >= 0.0 ? 1 : -1;
            }
            m.step = {sx * grid.cell_x, sy * grid.cell_y};
        } else {
            m.step = {quantize(vx * spec.frame_period), quantize(vy * spec.frame_period)};
        }
        m.anchor_frame = rng.uniform_int(0, spec.n_frames - 1);
        // anchor in the inner 70% of the window
        double ax = grid.x_min + x_span * rng.uniform(0.15, 0.85);
        double ay = grid.y_min + y_span * rng.uniform(0.15, 0.85);
        if (spec.snap_to_grid) {
            const Vec2 c = grid.cell_center(grid.row_of(ay), grid.col_of(ax));
            ax = c.x;
            ay = c.y;
        }
        m.anchor = {quantize(ax), quantize(ay)};

        const int n_points = std::clamp(static_cast<int>(std::ceil(60.0 * lx * ly)), 5, 400);
        m.local.reserve(n_points);
        for (int k = 0; k < n_points; ++k) {
            m.local.push_back({quantize(rng.uniform(-lx / 2, lx / 2)),
                               quantize(rng.uniform(-ly / 2, ly / 2)),
                               quantize(rng.uniform(-1.0, 0.0))});
        }
    }

    const double area = x_span * y_span;
    const int n_ground = static_cast<int>(std::lround(spec.ground_density * area));
    const double ground_z = -2.0;

    LabeledSequence seq;
    seq.spec = spec;
    seq.frames.resize(spec.n_frames);
    seq.point_is_ground.resize(spec.n_frames);
    seq.gt_motion_02.resize(spec.n_frames);

    for (int t = 0; t < spec.n_frames; ++t) {
        PointFrame& frame = seq.frames[t];
        frame.timestamp = t * spec.frame_period;
        const Vec3 ego{quantize(spec.ego_vx * spec.frame_period) * t,
                       quantize(spec.ego_vy * spec.frame_period) * t, 0.0};
        frame.pose = RigidPose::translate(ego.x, ego.y, ego.z);

        std::vector<uint8_t>& is_ground = seq.point_is_ground[t];
        // provenance per point: -1 ground, -2 artifact, >= 0 mover id
        std::vector<int> provenance;

        for (size_t mi = 0; mi < movers.size(); ++mi) {
            const Mover& m = movers[mi];
            const double cx = m.anchor.x + m.step.x * (t - m.anchor_frame);
            const double cy = m.anchor.y + m.step.y * (t - m.anchor_frame);
            for (const Vec3& p : m.local) {
                // world position minus ego translation = sensor coordinates
                frame.points.push_back({cx + p.x - ego.x, cy + p.y - ego.y, p.z});
                provenance.push_back(static_cast<int>(mi));
            }
        }
        for (int k = 0; k < n_ground; ++k) {
            frame.points.push_back({quantize(grid.x_min + x_span * rng.next_double()),
                                    quantize(grid.y_min + y_span * rng.next_double()),
                                    quantize(ground_z + rng.uniform(-0.05, 0.05))});
            provenance.push_back(-1);
        }
        int n_artifacts = static_cast<int>(std::floor(spec.artifact_rate));
        if (rng.next_double() < spec.artifact_rate - std::floor(spec.artifact_rate)) {
            ++n_artifacts;
        }
        for (int a = 0; a < n_artifacts; ++a) {
            const double cx = grid.x_min + x_span * rng.uniform(0.1, 0.9);
            const double cy = grid.y_min + y_span * rng.uniform(0.1, 0.9);
            const int n_pts = rng.uniform_int(3, 6);
            for (int k = 0; k < n_pts; ++k) {
                frame.points.push_back({quantize(cx + rng.uniform(-0.3, 0.3)),
                                        quantize(cy + rng.uniform(-0.3, 0.3)),
                                        quantize(rng.uniform(-1.4, -0.6))});
                provenance.push_back(-2);
            }
        }
        is_ground.resize(frame.points.size());
        for (size_t k = 0; k < frame.points.size(); ++k) {
            is_ground[k] = provenance[k] == -1 ? 1 : 0;
        }

        // Ground-truth motion on the BEV grid of this frame. Mover cells take
        // the mover's per-frame step; ground and artifact cells are static.
        MotionField gt(grid.rows(), grid.cols(), spec.frame_period);
        Grid<int32_t> cell_owner(grid.rows(), grid.cols(), -3);
        for (size_t k = 0; k < frame.points.size(); ++k) {
            const Vec3& p = frame.points[k];
            if (!grid.contains(p)) {
                continue;
            }
            const int i = grid.row_of(p.y);
            const int j = grid.col_of(p.x);
            gt.valid.at(i, j) = 1;
            int32_t& owner = cell_owner.at(i, j);
            const int prov = provenance[k];
            if (prov >= 0 && (owner < 0 || prov < owner)) {
                owner = prov;
            } else if (owner == -3) {
                owner = prov;
            }
        }
        for (int i = 0; i < grid.rows(); ++i) {
            for (int j = 0; j < grid.cols(); ++j) {
                const int32_t owner = cell_owner.at(i, j);
                if (owner >= 0) {
                    gt.dx.at(i, j) = movers[owner].step.x;
                    gt.dy.at(i, j) = movers[owner].step.y;
                }
            }
        }
        seq.gt_motion_02[t] = std::move(gt);
    }

    derive_gt_horizons(seq);
    return seq;
}

}  // namespace bevmotion
