#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "bevmotion/io_util.hpp"
#include "bevmotion/synth.hpp"

using namespace bevmotion;

namespace {

SceneSpec small_scene() {
    SceneSpec spec;
    spec.grid.x_min = -4;
    spec.grid.x_max = 4;
    spec.grid.y_min = -4;
    spec.grid.y_max = 4;
    spec.n_movers = 2;
    spec.n_frames = 8;
    spec.ground_density = 0.5;
    spec.seed = 5;
    return spec;
}

bool frames_equal(const LabeledSequence& a, const LabeledSequence& b) {
    if (a.n_frames() != b.n_frames()) {
        return false;
    }
    for (size_t t = 0; t < a.n_frames(); ++t) {
        if (a.frames[t].points.size() != b.frames[t].points.size()) {
            return false;
        }
        if (a.frames[t].timestamp != b.frames[t].timestamp) {
            return false;
        }
        for (size_t k = 0; k < a.frames[t].points.size(); ++k) {
            const Vec3& p = a.frames[t].points[k];
            const Vec3& q = b.frames[t].points[k];
            if (p.x != q.x || p.y != q.y || p.z != q.z) {
                return false;
            }
        }
        if (a.frames[t].pose.rotation != b.frames[t].pose.rotation) {
            return false;
        }
        if (a.point_is_ground[t] != b.point_is_ground[t]) {
            return false;
        }
        if (!(a.gt_motion_02[t].dx == b.gt_motion_02[t].dx) ||
            !(a.gt_motion_02[t].dy == b.gt_motion_02[t].dy) ||
            !(a.gt_motion_02[t].valid == b.gt_motion_02[t].valid)) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("generation is bit-identical for the same seed") {
    const SceneSpec spec = small_scene();
    CHECK(frames_equal(generate(spec), generate(spec)));
}

TEST_CASE("different seeds give different scenes") {
    SceneSpec a = small_scene();
    SceneSpec b = small_scene();
    b.seed = 6;
    CHECK(!frames_equal(generate(a), generate(b)));
}

TEST_CASE("one mover at 2 m/s displaces 0.4 m per 0.2 s step") {
    SceneSpec spec = small_scene();
    spec.n_movers = 1;
    spec.speed_min = spec.speed_max = 2.0;
    spec.ground_density = 0.0;
    spec.snap_to_grid = false;  // keep the literal speed
    const LabeledSequence seq = generate(spec);

    bool saw_mover = false;
    for (size_t t = 0; t < seq.n_frames(); ++t) {
        const MotionField& gt = seq.gt_motion_02[t];
        for (size_t k = 0; k < gt.dx.size(); ++k) {
            if (gt.valid[k] && (gt.dx[k] != 0.0 || gt.dy[k] != 0.0)) {
                saw_mover = true;
                CHECK(std::hypot(gt.dx[k], gt.dy[k]) == doctest::Approx(0.4).epsilon(0.01));
            }
        }
    }
    CHECK(saw_mover);
}

TEST_CASE("zero movers and artifacts give all-zero ground truth") {
    SceneSpec spec = small_scene();
    spec.n_movers = 0;
    spec.artifact_rate = 0.0;
    const LabeledSequence seq = generate(spec);
    for (const MotionField& gt : seq.gt_motion_02) {
        for (size_t k = 0; k < gt.dx.size(); ++k) {
            CHECK(gt.dx[k] == 0.0);
            CHECK(gt.dy[k] == 0.0);
        }
    }
}

TEST_CASE("ground-truth horizons scale exactly") {
    const LabeledSequence seq = generate(small_scene());
    for (size_t t = 0; t < seq.n_frames(); ++t) {
        for (size_t k = 0; k < seq.gt_motion_02[t].dx.size(); ++k) {
            CHECK(seq.gt_motion_04[t].dx[k] == 2.0 * seq.gt_motion_02[t].dx[k]);
            CHECK(seq.gt_motion_04[t].dy[k] == 2.0 * seq.gt_motion_02[t].dy[k]);
            CHECK(seq.gt_motion_1s[t].dx[k] == 5.0 * seq.gt_motion_02[t].dx[k]);
            CHECK(seq.gt_motion_1s[t].dy[k] == 5.0 * seq.gt_motion_02[t].dy[k]);
        }
    }
}

TEST_CASE("ego motion is reflected in the emitted poses") {
    SceneSpec spec = small_scene();
    spec.ego_vx = 1.0;
    const LabeledSequence seq = generate(spec);
    CHECK(seq.frames[0].pose.translation.x == 0.0);
    CHECK(seq.frames[5].pose.translation.x ==
          doctest::Approx(5.0 * 1.0 * spec.frame_period).epsilon(0.01));
}

TEST_CASE("degenerate specs are rejected") {
    SceneSpec spec = small_scene();
    spec.n_frames = 0;
    CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("dataset files round-trip exactly") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "bm_ds_roundtrip").string();
    std::filesystem::remove_all(dir);
    SceneSpec spec = small_scene();
    spec.artifact_rate = 1.0;
    spec.ego_vx = 0.5;
    const LabeledSequence seq = generate(spec);
    write_dataset(seq, dir);
    const LabeledSequence loaded = read_dataset(dir);

    CHECK(loaded.spec.n_frames == spec.n_frames);
    CHECK(loaded.spec.seed == spec.seed);
    CHECK(loaded.spec.grid.x_min == spec.grid.x_min);
    CHECK(frames_equal(seq, loaded));
    // derived horizons are rebuilt identically
    for (size_t t = 0; t < seq.n_frames(); ++t) {
        CHECK(loaded.gt_motion_1s[t].dx == seq.gt_motion_1s[t].dx);
        CHECK(loaded.gt_speed[t] == seq.gt_speed[t]);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("payload corruption is a checksum error") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "bm_ds_corrupt").string();
    std::filesystem::remove_all(dir);
    write_dataset(generate(small_scene()), dir);

    const std::string victim = dir + "/frame_0002.bin";
    std::vector<uint8_t> blob = read_file(victim);
    blob[blob.size() / 2] ^= 0xFF;
    write_file(victim, blob);
    try {
        read_dataset(dir);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::checksum);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("future major versions are a version error, not a crash") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "bm_ds_version").string();
    std::filesystem::remove_all(dir);
    write_dataset(generate(small_scene()), dir);

    std::string manifest = read_text_file(dir + "/manifest.txt");
    const size_t pos = manifest.find("version = 1.0");
    REQUIRE(pos != std::string::npos);
    manifest.replace(pos, 13, "version = 2.0");
    write_text_file(dir + "/manifest.txt", manifest);
    try {
        read_dataset(dir);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::version);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("truncated blobs are an io error") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "bm_ds_trunc").string();
    std::filesystem::remove_all(dir);
    write_dataset(generate(small_scene()), dir);

    const std::string victim = dir + "/labels_0001.bin";
    std::vector<uint8_t> blob = read_file(victim);
    blob.resize(blob.size() / 2);
    write_file(victim, blob);
    try {
        read_dataset(dir);
        CHECK(false);
    } catch (const Error& e) {
        const bool io_or_checksum =
            e.kind() == ErrorKind::io || e.kind() == ErrorKind::checksum;
        CHECK(io_or_checksum);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("snapped scenes translate occupancy patterns exactly") {
    SceneSpec spec = small_scene();
    spec.n_movers = 1;
    spec.ground_density = 0.0;
    spec.mover_size_min = spec.mover_size_max = 0.12;  // single-cell mover
    spec.speed_min = spec.speed_max = 2.5;             // 2 cells per frame
    spec.n_frames = 6;
    const LabeledSequence seq = generate(spec);
    // every frame's mover occupies exactly one cell and the gt displacement
    // is a whole number of cells
    for (size_t t = 0; t < seq.n_frames(); ++t) {
        const MotionField& gt = seq.gt_motion_02[t];
        for (size_t k = 0; k < gt.dx.size(); ++k) {
            if (!gt.valid[k]) {
                continue;
            }
            const double cells_x = gt.dx[k] / spec.grid.cell_x;
            const double cells_y = gt.dy[k] / spec.grid.cell_y;
            CHECK(cells_x == std::round(cells_x));
            CHECK(cells_y == std::round(cells_y));
        }
    }
}
