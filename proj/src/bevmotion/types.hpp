#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bevmotion/error.hpp"

namespace bevmotion {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Row-major 3x3 rotation plus translation, mapping sensor to world.
struct RigidPose {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 translation{};

    static RigidPose identity() { return {}; }
    static RigidPose translate(double x, double y, double z) {
        RigidPose p;
        p.translation = {x, y, z};
        return p;
    }
    static RigidPose rotate_z(double radians);

    Vec3 apply(const Vec3& p) const {
        const auto& r = rotation;
        return {r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
                r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
                r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
    }

    double rotation_determinant() const;
    // Inverse assuming an orthonormal rotation block.
    RigidPose inverse() const;
    RigidPose compose(const RigidPose& inner) const;  // this ∘ inner
};

struct PointFrame {
    std::vector<Vec3> points;
    double timestamp = 0.0;
    RigidPose pose;
};

// BEV grid geometry. Rows (i) run along y, columns (j) along x,
// channels (k) along z. All binning uses half-open [min, max) intervals.
struct GridSpec {
    double x_min = -8.0, x_max = 8.0;
    double y_min = -8.0, y_max = 8.0;
    double z_min = -3.0, z_max = 2.0;
    double cell_x = 0.25, cell_y = 0.25, cell_z = 0.4;

    int rows() const { return static_cast<int>(std::ceil((y_max - y_min) / cell_y)); }
    int cols() const { return static_cast<int>(std::ceil((x_max - x_min) / cell_x)); }
    int channels() const { return static_cast<int>(std::ceil((z_max - z_min) / cell_z)); }

    bool contains(const Vec3& p) const {
        return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max &&
               p.z >= z_min && p.z < z_max;
    }

    int row_of(double y) const { return static_cast<int>(std::floor((y - y_min) / cell_y)); }
    int col_of(double x) const { return static_cast<int>(std::floor((x - x_min) / cell_x)); }
    int channel_of(double z) const { return static_cast<int>(std::floor((z - z_min) / cell_z)); }

    Vec2 cell_center(int row, int col) const {
        return {x_min + (col + 0.5) * cell_x, y_min + (row + 0.5) * cell_y};
    }

    void validate() const;
};

template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    T& at(int row, int col) { return data_[static_cast<size_t>(row) * cols_ + col]; }
    const T& at(int row, int col) const { return data_[static_cast<size_t>(row) * cols_ + col]; }
    T& operator[](size_t flat) { return data_[flat]; }
    const T& operator[](size_t flat) const { return data_[flat]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool operator==(const Grid& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using GridD = Grid<double>;
using GridU8 = Grid<uint8_t>;

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell& o) const { return row == o.row && col == o.col; }
};

struct BevVoxelGrid {
    GridSpec spec;
    std::vector<uint8_t> occupancy;  // rows * cols * channels, channel fastest

    size_t index(int row, int col, int channel) const {
        return (static_cast<size_t>(row) * spec.cols() + col) * spec.channels() + channel;
    }
    bool occupied(int row, int col, int channel) const {
        return occupancy[index(row, col, channel)] != 0;
    }
};

struct PillarSet {
    GridSpec spec;
    GridU8 occupancy;          // rows x cols
    std::vector<Cell> cells;   // occupied cells, row-major order
    std::vector<Vec2> centers; // metric center of cells[k]

    size_t count() const { return cells.size(); }
    bool empty() const { return cells.empty(); }
};

// Per-cell displacement over a fixed horizon. Values are zero off-mask.
struct MotionField {
    GridD dx;
    GridD dy;
    GridU8 valid;
    double horizon_seconds = 0.2;

    MotionField() = default;
    MotionField(int rows, int cols, double horizon)
        : dx(rows, cols), dy(rows, cols), valid(rows, cols), horizon_seconds(horizon) {}

    int rows() const { return dx.rows(); }
    int cols() const { return dx.cols(); }
};

enum class MotionState : int8_t { invalid = -1, statics = 0, moving = 1 };

struct StateMap {
    Grid<int8_t> labels;  // MotionState values

    StateMap() = default;
    StateMap(int rows, int cols)
        : labels(rows, cols, static_cast<int8_t>(MotionState::invalid)) {}

    MotionState at(int row, int col) const {
        return static_cast<MotionState>(labels.at(row, col));
    }
    void set(int row, int col, MotionState s) {
        labels.at(row, col) = static_cast<int8_t>(s);
    }
};

}  // namespace bevmotion
