#include "bevmotion/clustering.hpp"

#include <deque>

namespace bevmotion {

ClusterMap bfs_clusters(const PillarSet& pillars, int connectivity) {
    if (connectivity != 4 && connectivity != 8) {
        raise(ErrorKind::config, "connectivity must be 4 or 8");
    }
    const int rows = pillars.occupancy.rows();
    const int cols = pillars.occupancy.cols();

    ClusterMap out;
    out.cluster_id = Grid<int32_t>(rows, cols, -1);

    static constexpr int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dr4[] = {-1, 0, 0, 1};
    static constexpr int dc4[] = {0, -1, 1, 0};
    const int* dr = connectivity == 8 ? dr8 : dr4;
    const int* dc = connectivity == 8 ? dc8 : dc4;

    std::deque<Cell> queue;
    for (const Cell& seed : pillars.cells) {  // row-major by construction
        if (out.cluster_id.at(seed.row, seed.col) >= 0) {
            continue;
        }
        const int32_t id = static_cast<int32_t>(out.members.size());
        out.members.emplace_back();
        out.cluster_id.at(seed.row, seed.col) = id;
        queue.push_back(seed);
        while (!queue.empty()) {
            const Cell cell = queue.front();
            queue.pop_front();
            out.members[id].push_back(cell);
            for (int k = 0; k < connectivity; ++k) {
                const int r = cell.row + dr[k];
                const int c = cell.col + dc[k];
                if (r < 0 || r >= rows || c < 0 || c >= cols) {
                    continue;
                }
                if (pillars.occupancy.at(r, c) && out.cluster_id.at(r, c) < 0) {
                    out.cluster_id.at(r, c) = id;
                    queue.push_back({r, c});
                }
            }
        }
    }
    return out;
}

}  // namespace bevmotion
