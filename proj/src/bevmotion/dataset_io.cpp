#include <cinttypes>
#include <cstdio>
#include <filesystem>

#include "bevmotion/io_util.hpp"
#include "bevmotion/kv.hpp"
#include "bevmotion/synth.hpp"

namespace bevmotion {

namespace {

constexpr int kDatasetMajor = 1;
constexpr int kDatasetMinor = 0;

std::string frame_path(const std::string& dir, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04d.bin", index);
    return dir + "/" + buf;
}

std::string labels_path(const std::string& dir, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "labels_%04d.bin", index);
    return dir + "/" + buf;
}

void write_blob_with_crc(const std::string& path, ByteWriter& writer) {
    ByteWriter out = std::move(writer);
    const uint32_t crc = crc32(out.buffer().data(), out.buffer().size());
    out.u32(crc);
    write_file(path, out.buffer());
}

std::vector<uint8_t> read_blob_with_crc(const std::string& path) {
    std::vector<uint8_t> blob = read_file(path);
    if (blob.size() < 4) {
        raise(ErrorKind::io, "truncated blob: " + path);
    }
    const size_t payload = blob.size() - 4;
    uint32_t stored = 0;
    for (int k = 0; k < 4; ++k) {
        stored |= static_cast<uint32_t>(blob[payload + k]) << (8 * k);
    }
    if (crc32(blob.data(), payload) != stored) {
        raise(ErrorKind::checksum, "CRC mismatch: " + path);
    }
    blob.resize(payload);
    return blob;
}

void put_grid_f64(ByteWriter& out, const GridD& g) {
    for (double v : g.data()) {
        out.f64(v);
    }
}

GridD take_grid_f64(ByteReader& in, int rows, int cols) {
    GridD g(rows, cols);
    for (auto& v : g.data()) {
        v = in.f64();
    }
    return g;
}

KvMap spec_to_kv(const SceneSpec& spec) {
    KvMap kv;
    kv.set("format", "bevmotion-dataset");
    kv.set("version", std::to_string(kDatasetMajor) + "." + std::to_string(kDatasetMinor));
    kv.set_int("n_frames", spec.n_frames);
    kv.set_int("n_movers", spec.n_movers);
    kv.set_double("mover_size_min", spec.mover_size_min);
    kv.set_double("mover_size_max", spec.mover_size_max);
    kv.set_double("speed_min", spec.speed_min);
    kv.set_double("speed_max", spec.speed_max);
    kv.set_double("ground_density", spec.ground_density);
    kv.set_double("artifact_rate", spec.artifact_rate);
    kv.set_double("ego_vx", spec.ego_vx);
    kv.set_double("ego_vy", spec.ego_vy);
    kv.set_double("frame_period", spec.frame_period);
    kv.set_int("seed", static_cast<int64_t>(spec.seed));
    kv.set_bool("snap_to_grid", spec.snap_to_grid);
    kv.set_double("grid.x_min", spec.grid.x_min);
    kv.set_double("grid.x_max", spec.grid.x_max);
    kv.set_double("grid.y_min", spec.grid.y_min);
    kv.set_double("grid.y_max", spec.grid.y_max);
    kv.set_double("grid.z_min", spec.grid.z_min);
    kv.set_double("grid.z_max", spec.grid.z_max);
    kv.set_double("grid.cell_x", spec.grid.cell_x);
    kv.set_double("grid.cell_y", spec.grid.cell_y);
    kv.set_double("grid.cell_z", spec.grid.cell_z);
    return kv;
}

SceneSpec spec_from_kv(const KvMap& kv) {
    if (kv.get("format").value_or("") != "bevmotion-dataset") {
        raise(ErrorKind::io, "not a dataset manifest");
    }
    const std::string version = kv.get_string("version");
    const size_t dot = version.find('.');
    const int major = std::atoi(version.substr(0, dot).c_str());
    if (major != kDatasetMajor) {
        raise(ErrorKind::version, "unsupported dataset major version " + version);
    }
    SceneSpec spec;
    spec.n_frames = static_cast<int>(kv.get_int("n_frames"));
    spec.n_movers = static_cast<int>(kv.get_int("n_movers"));
    spec.mover_size_min = kv.get_double("mover_size_min");
    spec.mover_size_max = kv.get_double("mover_size_max");
    spec.speed_min = kv.get_double("speed_min");
    spec.speed_max = kv.get_double("speed_max");
    spec.ground_density = kv.get_double("ground_density");
    spec.artifact_rate = kv.get_double("artifact_rate");
    spec.ego_vx = kv.get_double("ego_vx");
    spec.ego_vy = kv.get_double("ego_vy");
    spec.frame_period = kv.get_double("frame_period");
    spec.seed = static_cast<uint64_t>(kv.get_int("seed"));
    spec.snap_to_grid = kv.get_bool("snap_to_grid");
    spec.grid.x_min = kv.get_double("grid.x_min");
    spec.grid.x_max = kv.get_double("grid.x_max");
    spec.grid.y_min = kv.get_double("grid.y_min");
    spec.grid.y_max = kv.get_double("grid.y_max");
    spec.grid.z_min = kv.get_double("grid.z_min");
    spec.grid.z_max = kv.get_double("grid.z_max");
    spec.grid.cell_x = kv.get_double("grid.cell_x");
    spec.grid.cell_y = kv.get_double("grid.cell_y");
    spec.grid.cell_z = kv.get_double("grid.cell_z");
    return spec;
}

}  // namespace

void write_dataset(const LabeledSequence& seq, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        raise(ErrorKind::io, "cannot create dataset directory: " + dir);
    }
    write_text_file(dir + "/manifest.txt", spec_to_kv(seq.spec).serialize());

    for (size_t t = 0; t < seq.n_frames(); ++t) {
        const PointFrame& frame = seq.frames[t];
        ByteWriter out;
        out.u32(static_cast<uint32_t>(t));
        out.u32(static_cast<uint32_t>(frame.points.size()));
        for (double r : frame.pose.rotation) {
            out.f64(r);
        }
        out.f64(frame.pose.translation.x);
        out.f64(frame.pose.translation.y);
        out.f64(frame.pose.translation.z);
        for (const Vec3& p : frame.points) {
            out.f32(static_cast<float>(p.x));
            out.f32(static_cast<float>(p.y));
            out.f32(static_cast<float>(p.z));
        }
        write_blob_with_crc(frame_path(dir, static_cast<int>(t)), out);

        const MotionField& gt = seq.gt_motion_02[t];
        ByteWriter lab;
        lab.u32(static_cast<uint32_t>(t));
        lab.u32(static_cast<uint32_t>(gt.rows()));
        lab.u32(static_cast<uint32_t>(gt.cols()));
        put_grid_f64(lab, gt.dx);
        put_grid_f64(lab, gt.dy);
        lab.bytes(gt.valid.data().data(), gt.valid.size());
        lab.u32(static_cast<uint32_t>(seq.point_is_ground[t].size()));
        lab.bytes(seq.point_is_ground[t].data(), seq.point_is_ground[t].size());
        write_blob_with_crc(labels_path(dir, static_cast<int>(t)), lab);
    }
}

LabeledSequence read_dataset(const std::string& dir) {
    const KvMap manifest = KvMap::parse(read_text_file(dir + "/manifest.txt"));
    LabeledSequence seq;
    seq.spec = spec_from_kv(manifest);
    const int n = seq.spec.n_frames;
    seq.frames.resize(n);
    seq.point_is_ground.resize(n);
    seq.gt_motion_02.resize(n);

    for (int t = 0; t < n; ++t) {
        {
            const std::vector<uint8_t> blob = read_blob_with_crc(frame_path(dir, t));
            ByteReader in(blob);
            const uint32_t index = in.u32();
            if (index != static_cast<uint32_t>(t)) {
                raise(ErrorKind::io, "frame index mismatch in " + frame_path(dir, t));
            }
            const uint32_t count = in.u32();
            PointFrame& frame = seq.frames[t];
            frame.timestamp = t * seq.spec.frame_period;
            for (double& r : frame.pose.rotation) {
                r = in.f64();
            }
            frame.pose.translation.x = in.f64();
            frame.pose.translation.y = in.f64();
            frame.pose.translation.z = in.f64();
            frame.points.resize(count);
            for (uint32_t k = 0; k < count; ++k) {
                frame.points[k] = {static_cast<double>(in.f32()),
                                   static_cast<double>(in.f32()),
                                   static_cast<double>(in.f32())};
            }
        }
        {
            const std::vector<uint8_t> blob = read_blob_with_crc(labels_path(dir, t));
            ByteReader in(blob);
            in.u32();  // frame index
            const int rows = static_cast<int>(in.u32());
            const int cols = static_cast<int>(in.u32());
            MotionField gt(rows, cols, seq.spec.frame_period);
            gt.dx = take_grid_f64(in, rows, cols);
            gt.dy = take_grid_f64(in, rows, cols);
            in.bytes(gt.valid.data().data(), gt.valid.size());
            const uint32_t n_points = in.u32();
            seq.point_is_ground[t].resize(n_points);
            in.bytes(seq.point_is_ground[t].data(), n_points);
            seq.gt_motion_02[t] = std::move(gt);
        }
    }
    derive_gt_horizons(seq);
    return seq;
}

}  // namespace bevmotion
