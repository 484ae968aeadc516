#pragma once

#include <vector>

#include "bevmotion/types.hpp"

namespace bevmotion {

struct ClusterMap {
    Grid<int32_t> cluster_id;                  // -1 on unoccupied cells
    std::vector<std::vector<Cell>> members;    // cells per cluster, id order

    int cluster_count() const { return static_cast<int>(members.size()); }
};

// Connected components of occupied pillars via breadth-first traversal.
// Seeds scan in row-major order with a FIFO queue, so ids are deterministic
// functions of the occupancy alone. Connectivity is 4 or 8.
ClusterMap bfs_clusters(const PillarSet& pillars, int connectivity = 8);

}  // namespace bevmotion
