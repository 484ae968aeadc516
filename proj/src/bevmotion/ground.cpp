#include "bevmotion/ground.hpp"

#include <algorithm>
#include <cmath>

#include "bevmotion/rng.hpp"

namespace bevmotion {

void GroundParams::validate() const {
    if (!(tolerance > 0.0)) {
        raise(ErrorKind::config, "ground tolerance must be positive");
    }
    if (ransac_iters < 0) {
        raise(ErrorKind::config, "ransac_iters must be >= 0");
    }
    if (ransac_iters > 0 && !(inlier_threshold > 0.0)) {
        raise(ErrorKind::config, "inlier_threshold must be positive in RANSAC mode");
    }
}

namespace {

struct Plane {
    // z = a*x + b*y + c
    double a = 0.0, b = 0.0, c = 0.0;
    bool valid = false;

    double residual(const Vec3& p) const { return std::abs(p.z - (a * p.x + b * p.y + c)); }
};

Plane fit_plane(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    // Solve [x y 1] * [a b c]^T = z for the three points.
    const double d0x = p1.x - p0.x, d0y = p1.y - p0.y, d0z = p1.z - p0.z;
    const double d1x = p2.x - p0.x, d1y = p2.y - p0.y, d1z = p2.z - p0.z;
    const double det = d0x * d1y - d0y * d1x;
    Plane pl;
    if (std::abs(det) < 1e-9) {
        return pl;  // collinear sample
    }
    pl.a = (d0z * d1y - d0y * d1z) / det;
    pl.b = (d0x * d1z - d0z * d1x) / det;
    pl.c = p0.z - pl.a * p0.x - pl.b * p0.y;
    // Reject steep planes; ground is near-horizontal.
    if (std::abs(pl.a) > 0.6 || std::abs(pl.b) > 0.6) {
        return pl;
    }
    pl.valid = true;
    return pl;
}

GroundSplit split_by_flags(const PointFrame& frame, const std::vector<char>& is_ground) {
    GroundSplit out;
    out.non_ground.timestamp = frame.timestamp;
    out.non_ground.pose = frame.pose;
    for (size_t i = 0; i < frame.points.size(); ++i) {
        if (is_ground[i]) {
            out.ground_indices.push_back(i);
        } else {
            out.non_ground.points.push_back(frame.points[i]);
        }
    }
    return out;
}

GroundSplit threshold_split(const PointFrame& frame, const GroundParams& params) {
    std::vector<char> is_ground(frame.points.size(), 0);
    for (size_t i = 0; i < frame.points.size(); ++i) {
        is_ground[i] = std::abs(frame.points[i].z - params.plane_z) <= params.tolerance;
    }
    return split_by_flags(frame, is_ground);
}

}  // namespace

GroundSplit remove_ground(const PointFrame& frame, const GroundParams& params, uint64_t seed) {
    params.validate();
    const size_t n = frame.points.size();
    if (params.ransac_iters == 0 || n < 3) {
        return threshold_split(frame, params);
    }

    // Candidates: lowest 40% of points by z. The ground plane, when present,
    // dominates the low band.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return frame.points[a].z < frame.points[b].z;
    });
    const size_t n_candidates = std::max<size_t>(3, (n * 2) / 5);
    Rng rng(seed ^ 0x67726f756e64ULL);

    Plane best;
    size_t best_inliers = 0;
    for (int iter = 0; iter < params.ransac_iters; ++iter) {
        const size_t i0 = order[rng.next_below(n_candidates)];
        const size_t i1 = order[rng.next_below(n_candidates)];
        const size_t i2 = order[rng.next_below(n_candidates)];
        if (i0 == i1 || i0 == i2 || i1 == i2) {
            continue;
        }
        const Plane plane = fit_plane(frame.points[i0], frame.points[i1], frame.points[i2]);
        if (!plane.valid) {
            continue;
        }
        size_t inliers = 0;
        for (const Vec3& p : frame.points) {
            if (plane.residual(p) <= params.inlier_threshold) {
                ++inliers;
            }
        }
        if (inliers > best_inliers) {
            best_inliers = inliers;
            best = plane;
        }
    }

    if (!best.valid) {
        return threshold_split(frame, params);
    }
    std::vector<char> is_ground(n, 0);
    for (size_t i = 0; i < n; ++i) {
        is_ground[i] = best.residual(frame.points[i]) <= params.inlier_threshold;
    }
    return split_by_flags(frame, is_ground);
}

}  // namespace bevmotion
