#include "doctest.h"

#include "bevmotion/ground.hpp"
#include "bevmotion/rng.hpp"

using namespace bevmotion;

TEST_CASE("threshold mode splits by distance to the plane") {
    PointFrame f;
    f.points = {{0, 0, -1.9}, {0, 0, 0.5}};
    GroundParams params;
    params.plane_z = -2.0;
    params.tolerance = 0.3;
    params.ransac_iters = 0;

    const GroundSplit split = remove_ground(f, params);
    REQUIRE(split.ground_indices.size() == 1);
    CHECK(split.ground_indices[0] == 0);
    REQUIRE(split.non_ground.points.size() == 1);
    CHECK(split.non_ground.points[0].z == 0.5);
}

TEST_CASE("empty frame yields empty outputs") {
    const GroundSplit split = remove_ground(PointFrame{}, GroundParams{});
    CHECK(split.non_ground.points.empty());
    CHECK(split.ground_indices.empty());
}

TEST_CASE("partition property holds on random frames") {
    Rng rng(5);
    PointFrame f;
    for (int k = 0; k < 500; ++k) {
        f.points.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-3, 2)});
    }
    GroundParams params;
    SUBCASE("threshold mode") { params.ransac_iters = 0; }
    SUBCASE("ransac mode") { params.ransac_iters = 50; }
    const GroundSplit split = remove_ground(f, params, 9);
    CHECK(split.non_ground.points.size() + split.ground_indices.size() == f.points.size());
}

TEST_CASE("ransac recovers a synthetic ground plane with high recall") {
    Rng rng(17);
    PointFrame f;
    std::vector<bool> truth;  // true = ground
    for (int k = 0; k < 600; ++k) {
        f.points.push_back(
            {rng.uniform(-8, 8), rng.uniform(-8, 8), -2.0 + rng.uniform(-0.05, 0.05)});
        truth.push_back(true);
    }
    // box-shaped object well above the plane
    for (int k = 0; k < 150; ++k) {
        f.points.push_back(
            {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5)});
        truth.push_back(false);
    }

    GroundParams params;
    params.ransac_iters = 100;
    params.inlier_threshold = 0.15;
    const GroundSplit split = remove_ground(f, params, 3);

    std::vector<bool> classified(f.points.size(), false);
    for (size_t idx : split.ground_indices) {
        classified[idx] = true;
    }
    size_t hits = 0, ground_total = 0, false_positives = 0;
    for (size_t k = 0; k < truth.size(); ++k) {
        if (truth[k]) {
            ++ground_total;
            hits += classified[k] ? 1 : 0;
        } else {
            false_positives += classified[k] ? 1 : 0;
        }
    }
    CHECK(static_cast<double>(hits) / ground_total >= 0.95);
    CHECK(false_positives == 0);
}

TEST_CASE("ransac mode falls back to threshold with fewer than 3 points") {
    PointFrame f;
    f.points = {{0, 0, -2.0}, {0, 0, 1.0}};
    GroundParams params;
    params.ransac_iters = 25;
    const GroundSplit split = remove_ground(f, params, 1);
    REQUIRE(split.ground_indices.size() == 1);
    CHECK(split.ground_indices[0] == 0);
}

TEST_CASE("ransac is deterministic given a seed") {
    Rng rng(23);
    PointFrame f;
    for (int k = 0; k < 400; ++k) {
        f.points.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8),
                            k % 3 == 0 ? rng.uniform(-0.5, 0.5)
                                       : -2.0 + rng.uniform(-0.05, 0.05)});
    }
    GroundParams params;
    params.ransac_iters = 60;
    const GroundSplit a = remove_ground(f, params, 42);
    const GroundSplit b = remove_ground(f, params, 42);
    CHECK(a.ground_indices == b.ground_indices);
}

TEST_CASE("invalid ground params are rejected") {
    GroundParams params;
    params.tolerance = 0.0;
    CHECK_THROWS_AS(remove_ground(PointFrame{}, params), Error);
}
