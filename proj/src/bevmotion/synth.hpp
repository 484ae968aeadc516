#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bevmotion/types.hpp"

namespace bevmotion {

// Deterministic synthetic world: rigid box movers at constant velocity over a
// resampled ground plane, optional single-frame artifact clusters, and a
// translating ego sensor. Every emitted coordinate is quantized to 1/1024 m
// so values are exact in 32-bit floats and rigid translations by whole cells
// preserve occupancy patterns bit-exactly.
struct SceneSpec {
    int n_movers = 3;
    double mover_size_min = 0.4;   // box edge length range, meters
    double mover_size_max = 0.8;
    double speed_min = 1.25;       // m/s, per mover, constant velocity
    double speed_max = 6.25;
    double ground_density = 1.0;   // points per square meter, resampled per frame
    double artifact_rate = 0.0;    // expected spurious clusters per frame
    double ego_vx = 0.0;           // m/s
    double ego_vy = 0.0;
    double frame_period = 0.2;     // seconds
    int n_frames = 12;
    uint64_t seed = 1;
    GridSpec grid;
    // Snap mover velocities to whole cells per frame and anchors to cell
    // centers. Keeps cell-to-cell pseudo labels exactly recoverable.
    bool snap_to_grid = true;

    void validate() const;
};

struct LabeledSequence {
    SceneSpec spec;
    std::vector<PointFrame> frames;            // sensor-frame coordinates
    std::vector<std::vector<uint8_t>> point_is_ground;  // per frame, per point
    std::vector<MotionField> gt_motion_02;     // displacement over 0.2s
    std::vector<MotionField> gt_motion_04;     // exactly 2x the 0.2s field
    std::vector<MotionField> gt_motion_1s;     // exactly 5x the 0.2s field
    std::vector<GridD> gt_speed;               // m/s per occupied cell

    size_t n_frames() const { return frames.size(); }
};

LabeledSequence generate(const SceneSpec& spec);

// Derives the 0.4s/1s fields and per-cell speed from the 0.2s ground truth.
// Shared by the generator and the dataset reader so both produce identical
// values.
void derive_gt_horizons(LabeledSequence& seq);

// Directory layout: manifest.txt plus frame_%04d.bin (pose + points, CRC32)
// and labels_%04d.bin (ground-truth grids + point flags, CRC32).
void write_dataset(const LabeledSequence& seq, const std::string& dir);
LabeledSequence read_dataset(const std::string& dir);

}  // namespace bevmotion
