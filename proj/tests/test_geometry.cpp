#include "doctest.h"

#include <cmath>

#include "bevmotion/geometry.hpp"
#include "bevmotion/rng.hpp"

using namespace bevmotion;

namespace {

GridSpec desk_spec() {
    GridSpec spec;  // defaults: [-8,8]^2 x [-3,2], cells 0.25/0.25/0.4
    return spec;
}

PointFrame frame_of(std::vector<Vec3> points) {
    PointFrame f;
    f.points = std::move(points);
    return f;
}

}  // namespace

TEST_CASE("sync_to_frame identity poses leave points unchanged") {
    PointFrame f = frame_of({{1, 2, 3}});
    const PointFrame out = sync_to_frame(f, RigidPose::identity());
    CHECK(out.points[0].x == doctest::Approx(1.0));
    CHECK(out.points[0].y == doctest::Approx(2.0));
    CHECK(out.points[0].z == doctest::Approx(3.0));
}

TEST_CASE("sync_to_frame applies pure translation") {
    PointFrame f = frame_of({{0, 0, 0}});
    f.pose = RigidPose::translate(1, 0, 0);
    const PointFrame out = sync_to_frame(f, RigidPose::identity());
    CHECK(out.points[0].x == doctest::Approx(1.0));
    CHECK(out.points[0].y == doctest::Approx(0.0));
}

TEST_CASE("sync_to_frame applies z rotation") {
    PointFrame f = frame_of({{1, 0, 0}});
    f.pose = RigidPose::rotate_z(M_PI / 2);
    const PointFrame out = sync_to_frame(f, RigidPose::identity());
    CHECK(out.points[0].x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(out.points[0].y == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.points[0].z == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sync_to_frame rejects non-orthonormal rotations") {
    PointFrame f = frame_of({{0, 0, 0}});
    f.pose.rotation = {2, 0, 0, 0, 1, 0, 0, 0, 1};  // det = 2
    CHECK_THROWS_AS(sync_to_frame(f, RigidPose::identity()), Error);
    try {
        sync_to_frame(f, RigidPose::identity());
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_pose);
    }
}

TEST_CASE("sync round-trips points through an arbitrary pose") {
    Rng rng(7);
    PointFrame f;
    for (int k = 0; k < 50; ++k) {
        f.points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-2, 2)});
    }
    RigidPose pose = RigidPose::rotate_z(0.83);
    pose.translation = {1.5, -2.25, 0.5};
    f.pose = pose;

    const PointFrame there = sync_to_frame(f, RigidPose::identity());
    const PointFrame back = sync_to_frame(there, pose);
    for (size_t k = 0; k < f.points.size(); ++k) {
        CHECK(std::abs(back.points[k].x - f.points[k].x) < 1e-9);
        CHECK(std::abs(back.points[k].y - f.points[k].y) < 1e-9);
        CHECK(std::abs(back.points[k].z - f.points[k].z) < 1e-9);
    }
}

TEST_CASE("crop keeps interior points and drops out-of-range ones") {
    const GridSpec spec = desk_spec();
    const PointFrame f = frame_of({{0, 0, 0}, {33, 0, 0}, {0, 0, 2.0}});
    const PointFrame out = crop(f, spec);
    REQUIRE(out.points.size() == 1);  // z = 2.0 dropped: half-open [z_min, z_max)
    CHECK(out.points[0].x == 0.0);
}

TEST_CASE("crop preserves point order") {
    const GridSpec spec = desk_spec();
    const PointFrame f = frame_of({{1, 1, 0}, {99, 0, 0}, {-2, 3, 1}, {0, 0, -2.5}});
    const PointFrame out = crop(f, spec);
    REQUIRE(out.points.size() == 3);
    CHECK(out.points[0].x == 1.0);
    CHECK(out.points[1].x == -2.0);
    CHECK(out.points[2].z == -2.5);
}

TEST_CASE("voxelize derives desk grid dimensions") {
    const GridSpec spec = desk_spec();
    CHECK(spec.rows() == 64);
    CHECK(spec.cols() == 64);
    CHECK(spec.channels() == 13);  // ceil(5 / 0.4)
}

TEST_CASE("voxelize sets one voxel per occupied cell") {
    const GridSpec spec = desk_spec();
    SUBCASE("single point at a cell center") {
        const BevVoxelGrid grid = voxelize(frame_of({{0.125, 0.125, 0.2}}), spec);
        size_t set = 0;
        for (uint8_t v : grid.occupancy) {
            set += v;
        }
        CHECK(set == 1);
    }
    SUBCASE("two points in the same voxel occupy it once") {
        const BevVoxelGrid grid =
            voxelize(frame_of({{0.1, 0.1, 0.2}, {0.12, 0.11, 0.21}}), spec);
        size_t set = 0;
        for (uint8_t v : grid.occupancy) {
            set += v;
        }
        CHECK(set == 1);
    }
}

TEST_CASE("pillarize OR-reduces columns") {
    const GridSpec spec = desk_spec();
    SUBCASE("empty grid gives an empty pillar set") {
        const PillarSet p = pillarize(voxelize(frame_of({}), spec));
        CHECK(p.empty());
        CHECK(p.cells.empty());
    }
    SUBCASE("one voxel gives one pillar") {
        const PillarSet p = pillarize(voxelize(frame_of({{1.0, 2.0, 0.0}}), spec));
        REQUIRE(p.count() == 1);
        CHECK(p.occupancy.at(p.cells[0].row, p.cells[0].col) == 1);
    }
    SUBCASE("a full column of voxels gives exactly one pillar") {
        std::vector<Vec3> column;
        for (int k = 0; k < spec.channels(); ++k) {
            column.push_back({1.0, 2.0, spec.z_min + (k + 0.5) * spec.cell_z});
        }
        const PillarSet p = pillarize(voxelize(frame_of(column), spec));
        CHECK(p.count() == 1);
    }
}

TEST_CASE("pillar centers are the geometric cell centers") {
    const GridSpec spec = desk_spec();
    const PillarSet p = pillarize(voxelize(frame_of({{0.1, 0.1, 0.0}}), spec));
    REQUIRE(p.count() == 1);
    CHECK(p.centers[0].x == doctest::Approx(0.125));
    CHECK(p.centers[0].y == doctest::Approx(0.125));
}

TEST_CASE("voxelize-then-pillarize equals pillarize of a z-flattened frame") {
    const GridSpec spec = desk_spec();
    Rng rng(11);
    PointFrame f;
    for (int k = 0; k < 300; ++k) {
        f.points.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-3, 2)});
    }
    PointFrame flattened = f;
    for (Vec3& p : flattened.points) {
        p.z = spec.z_min;
    }
    const PillarSet a = pillarize(voxelize(f, spec));
    const PillarSet b = pillarize(voxelize(flattened, spec));
    CHECK(a.occupancy == b.occupancy);
}

TEST_CASE("occupancy is invariant under point permutation") {
    const GridSpec spec = desk_spec();
    Rng rng(13);
    PointFrame f;
    for (int k = 0; k < 200; ++k) {
        f.points.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-3, 2)});
    }
    PointFrame shuffled = f;
    for (size_t k = shuffled.points.size(); k > 1; --k) {
        std::swap(shuffled.points[k - 1], shuffled.points[rng.next_below(k)]);
    }
    const PillarSet a = pillarize(voxelize(f, spec));
    const PillarSet b = pillarize(voxelize(shuffled, spec));
    CHECK(a.occupancy == b.occupancy);
    CHECK(a.cells.size() == b.cells.size());
}
