#include "bevmotion/geometry.hpp"

#include <cmath>

namespace bevmotion {

RigidPose RigidPose::rotate_z(double radians) {
    RigidPose p;
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    p.rotation = {c, -s, 0, s, c, 0, 0, 0, 1};
    return p;
}

double RigidPose::rotation_determinant() const {
    const auto& r = rotation;
    return r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
           r[2] * (r[3] * r[7] - r[4] * r[6]);
}

RigidPose RigidPose::inverse() const {
    RigidPose inv;
    const auto& r = rotation;
    // transpose of an orthonormal rotation is its inverse
    inv.rotation = {r[0], r[3], r[6], r[1], r[4], r[7], r[2], r[5], r[8]};
    const Vec3 t = translation;
    inv.translation = {-(inv.rotation[0] * t.x + inv.rotation[1] * t.y + inv.rotation[2] * t.z),
                       -(inv.rotation[3] * t.x + inv.rotation[4] * t.y + inv.rotation[5] * t.z),
                       -(inv.rotation[6] * t.x + inv.rotation[7] * t.y + inv.rotation[8] * t.z)};
    return inv;
}

RigidPose RigidPose::compose(const RigidPose& inner) const {
    RigidPose out;
    const auto& a = rotation;
    const auto& b = inner.rotation;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            out.rotation[i * 3 + j] =
                a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
        }
    }
    out.translation = apply(inner.translation);
    return out;
}

void GridSpec::validate() const {
    if (!(x_max > x_min) || !(y_max > y_min) || !(z_max > z_min)) {
        raise(ErrorKind::config, "grid ranges must be nonempty");
    }
    if (!(cell_x > 0.0) || !(cell_y > 0.0) || !(cell_z > 0.0)) {
        raise(ErrorKind::config, "grid cell sizes must be positive");
    }
    if (rows() <= 0 || cols() <= 0 || channels() <= 0) {
        raise(ErrorKind::config, "grid dimensions must be positive");
    }
}

namespace {

void check_orthonormal(const RigidPose& pose, const char* which) {
    const double det = pose.rotation_determinant();
    if (std::abs(det - 1.0) > 1e-6) {
        raise(ErrorKind::invalid_pose,
              std::string(which) + " rotation is not orthonormal (det=" + std::to_string(det) + ")");
    }
}

}  // namespace

PointFrame sync_to_frame(const PointFrame& frame, const RigidPose& target_pose) {
    check_orthonormal(frame.pose, "frame");
    check_orthonormal(target_pose, "target");

    const RigidPose relative = target_pose.inverse().compose(frame.pose);
    PointFrame out;
    out.timestamp = frame.timestamp;
    out.pose = target_pose;
    out.points.reserve(frame.points.size());
    for (const Vec3& p : frame.points) {
        out.points.push_back(relative.apply(p));
    }
    return out;
}

PointFrame crop(const PointFrame& frame, const GridSpec& spec) {
    PointFrame out;
    out.timestamp = frame.timestamp;
    out.pose = frame.pose;
    out.points.reserve(frame.points.size());
    for (const Vec3& p : frame.points) {
        if (spec.contains(p)) {
            out.points.push_back(p);
        }
    }
    return out;
}

BevVoxelGrid voxelize(const PointFrame& frame, const GridSpec& spec) {
    spec.validate();
    BevVoxelGrid grid;
    grid.spec = spec;
    grid.occupancy.assign(
        static_cast<size_t>(spec.rows()) * spec.cols() * spec.channels(), 0);
    for (const Vec3& p : frame.points) {
        if (!spec.contains(p)) {
            continue;
        }
        grid.occupancy[grid.index(spec.row_of(p.y), spec.col_of(p.x), spec.channel_of(p.z))] = 1;
    }
    return grid;
}

PillarSet pillarize(const BevVoxelGrid& grid) {
    const GridSpec& spec = grid.spec;
    PillarSet out;
    out.spec = spec;
    out.occupancy = GridU8(spec.rows(), spec.cols());
    const int channels = spec.channels();
    for (int i = 0; i < spec.rows(); ++i) {
        for (int j = 0; j < spec.cols(); ++j) {
            const size_t base = grid.index(i, j, 0);
            uint8_t any = 0;
            for (int k = 0; k < channels; ++k) {
                any |= grid.occupancy[base + k];
            }
            if (any) {
                out.occupancy.at(i, j) = 1;
                out.cells.push_back({i, j});
                out.centers.push_back(spec.cell_center(i, j));
            }
        }
    }
    return out;
}

PillarSet pillarize_frame(const PointFrame& frame, const GridSpec& spec) {
    return pillarize(voxelize(frame, spec));
}

}  // namespace bevmotion
