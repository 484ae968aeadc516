#include "bevmotion/losses.hpp"

#include <algorithm>
#include <cmath>

#include "bevmotion/predictor.hpp"

namespace bevmotion {

void LossWeights::validate() const {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || sigma < 0.0) {
        raise(ErrorKind::config, "loss weights must be >= 0");
    }
    if (!(smooth_l1_beta > 0.0)) {
        raise(ErrorKind::config, "smooth_l1_beta must be positive");
    }
}

namespace {

constexpr double kNormKinkGuard = 1e-9;

inline double smooth_l1_value(double d, double beta, Fingerprint* fp) {
    const bool quadratic = std::abs(d) < beta;
    if (fp) {
        fingerprint_mix(*fp, quadratic);
    }
    return quadratic ? 0.5 * d * d / beta : std::abs(d) - 0.5 * beta;
}

inline double smooth_l1_slope(double d, double beta) {
    if (std::abs(d) < beta) {
        return d / beta;
    }
    return d > 0.0 ? 1.0 : -1.0;
}

void require_same_shape(const GridD& a, const GridD& b, const char* what) {
    if (!a.same_shape(b)) {
        raise(ErrorKind::shape, std::string("shape mismatch: ") + what);
    }
}

struct GridPairLoss {
    double value = 0.0;
    GridD gdx_a, gdy_a;
    GridD gdx_b, gdy_b;
};

// Shared kernel: smooth-L1 of the per-cell residual (a_dx*sa + b_dx*sb, ...)
// against zero, summed over components, averaged over masked cells.
GridPairLoss residual_smooth_l1(const GridD& a_dx, const GridD& a_dy, double sa,
                                const GridD& b_dx, const GridD& b_dy, double sb,
                                const GridU8& mask, double beta, Fingerprint* fp) {
    GridPairLoss out;
    const int rows = a_dx.rows(), cols = a_dx.cols();
    out.gdx_a = GridD(rows, cols);
    out.gdy_a = GridD(rows, cols);
    out.gdx_b = GridD(rows, cols);
    out.gdy_b = GridD(rows, cols);

    int count = 0;
    for (size_t k = 0; k < mask.size(); ++k) {
        count += mask[k] ? 1 : 0;
    }
    if (count == 0) {
        return out;
    }
    const double inv = 1.0 / count;
    double total = 0.0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (!mask.at(i, j)) {
                continue;
            }
            const double rx = sa * a_dx.at(i, j) + sb * b_dx.at(i, j);
            const double ry = sa * a_dy.at(i, j) + sb * b_dy.at(i, j);
            total += smooth_l1_value(rx, beta, fp) + smooth_l1_value(ry, beta, fp);
            const double gx = smooth_l1_slope(rx, beta) * inv;
            const double gy = smooth_l1_slope(ry, beta) * inv;
            out.gdx_a.at(i, j) = sa * gx;
            out.gdy_a.at(i, j) = sa * gy;
            out.gdx_b.at(i, j) = sb * gx;
            out.gdy_b.at(i, j) = sb * gy;
        }
    }
    out.value = total * inv;
    return out;
}

LossValue smooth_l1_grids(const GridD& pdx, const GridD& pdy, const GridD& tdx,
                          const GridD& tdy, const GridU8& mask, double beta,
                          Fingerprint* fp) {
    require_same_shape(pdx, tdx, "smooth_l1 prediction vs target");
    LossValue out;
    const int rows = pdx.rows(), cols = pdx.cols();
    out.grad_dx = GridD(rows, cols);
    out.grad_dy = GridD(rows, cols);

    int count = 0;
    for (size_t k = 0; k < mask.size(); ++k) {
        count += mask[k] ? 1 : 0;
    }
    if (count == 0) {
        return out;  // empty supervision mask contributes nothing
    }
    // average over cells and the two components
    const double inv = 1.0 / (2.0 * count);
    double total = 0.0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (!mask.at(i, j)) {
                continue;
            }
            const double dx = pdx.at(i, j) - tdx.at(i, j);
            const double dy = pdy.at(i, j) - tdy.at(i, j);
            total += smooth_l1_value(dx, beta, fp) + smooth_l1_value(dy, beta, fp);
            out.grad_dx.at(i, j) = smooth_l1_slope(dx, beta) * inv;
            out.grad_dy.at(i, j) = smooth_l1_slope(dy, beta) * inv;
        }
    }
    out.value = total * inv;
    return out;
}

// Mean over cells of the per-neighborhood mean motion-difference norm.
// `neighborhoods[i]` lists indices into `cells`; each ordered pair (i, j)
// carries weight 1/(|P| * divisor(i)). The cluster form divides by the full
// cluster size (self included, its pair contributing 0); the KNN form divides
// by the neighbor count.
LossValue neighborhood_consistency(const GridD& dx, const GridD& dy,
                                   const std::vector<Cell>& cells,
                                   const std::vector<std::vector<int>>& neighborhoods,
                                   bool count_self_in_divisor, Fingerprint* fp) {
    LossValue out;
    out.grad_dx = GridD(dx.rows(), dx.cols());
    out.grad_dy = GridD(dx.rows(), dx.cols());
    const size_t population = cells.size();
    if (population == 0) {
        return out;
    }
    double total = 0.0;
    for (size_t i = 0; i < population; ++i) {
        const auto& nbrs = neighborhoods[i];
        if (nbrs.empty()) {
            continue;
        }
        const double divisor = static_cast<double>(nbrs.size()) + (count_self_in_divisor ? 1.0 : 0.0);
        const double w = 1.0 / (static_cast<double>(population) * divisor);
        const Cell& ci = cells[i];
        const double mx = dx.at(ci.row, ci.col);
        const double my = dy.at(ci.row, ci.col);
        for (int jn : nbrs) {
            const Cell& cj = cells[jn];
            const double ux = mx - dx.at(cj.row, cj.col);
            const double uy = my - dy.at(cj.row, cj.col);
            const double norm = std::hypot(ux, uy);
            const bool degenerate = norm < kNormKinkGuard;
            if (fp) {
                fingerprint_mix(*fp, degenerate);
            }
            total += w * norm;
            if (degenerate) {
                continue;  // subgradient 0 at the kink
            }
            const double gx = w * ux / norm;
            const double gy = w * uy / norm;
            out.grad_dx.at(ci.row, ci.col) += gx;
            out.grad_dy.at(ci.row, ci.col) += gy;
            out.grad_dx.at(cj.row, cj.col) -= gx;
            out.grad_dy.at(cj.row, cj.col) -= gy;
        }
    }
    out.value = total;
    return out;
}

LossValue cluster_consistency_grids(const GridD& dx, const GridD& dy,
                                    const ClusterMap& clusters, Fingerprint* fp) {
    std::vector<Cell> cells;
    std::vector<std::vector<int>> neighborhoods;
    for (const auto& members : clusters.members) {
        const int base = static_cast<int>(cells.size());
        const int n = static_cast<int>(members.size());
        for (int k = 0; k < n; ++k) {
            cells.push_back(members[k]);
            std::vector<int> nbrs;
            nbrs.reserve(n - 1);
            for (int j = 0; j < n; ++j) {
                if (j != k) {
                    nbrs.push_back(base + j);  // self-pairs contribute 0, skip them
                }
            }
            neighborhoods.push_back(std::move(nbrs));
        }
    }
    return neighborhood_consistency(dx, dy, cells, neighborhoods, true, fp);
}

}  // namespace

LossValue smooth_l1(const MotionField& pred, const MotionField& target, const GridU8& mask,
                    double beta, Fingerprint* fp) {
    if (!(beta > 0.0)) {
        raise(ErrorKind::config, "smooth_l1 beta must be positive");
    }
    return smooth_l1_grids(pred.dx, pred.dy, target.dx, target.dy, mask, beta, fp);
}

LossValue cluster_consistency(const MotionField& pred, const ClusterMap& clusters,
                              Fingerprint* fp) {
    return cluster_consistency_grids(pred.dx, pred.dy, clusters, fp);
}

LossValue knn_consistency(const MotionField& pred, const PillarSet& pillars, int k,
                          Fingerprint* fp) {
    if (k < 1) {
        raise(ErrorKind::config, "knn k must be >= 1");
    }
    const auto& cells = pillars.cells;
    const int n = static_cast<int>(cells.size());
    std::vector<std::vector<int>> neighborhoods(n);
    std::vector<std::pair<double, int>> dist;
    for (int i = 0; i < n; ++i) {
        dist.clear();
        dist.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            dist.emplace_back((pillars.centers[i] - pillars.centers[j]).norm(), j);
        }
        const int take = std::min<int>(k, static_cast<int>(dist.size()));
        std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
        for (int t = 0; t < take; ++t) {
            neighborhoods[i].push_back(dist[t].second);
        }
    }
    return neighborhood_consistency(pred.dx, pred.dy, cells, neighborhoods, false, fp);
}

PairLossValue backward_consistency(const MotionField& m_fwd, const MotionField& m_bwd,
                                   double beta, Fingerprint* fp) {
    if (!m_fwd.valid.same_shape(m_bwd.valid) || m_fwd.valid.data() != m_bwd.valid.data()) {
        raise(ErrorKind::shape, "backward_consistency masks must match");
    }
    const GridPairLoss r = residual_smooth_l1(m_fwd.dx, m_fwd.dy, 1.0, m_bwd.dx, m_bwd.dy,
                                              1.0, m_fwd.valid, beta, fp);
    PairLossValue out;
    out.value = r.value;
    out.grad_a_dx = r.gdx_a;
    out.grad_a_dy = r.gdy_a;
    out.grad_b_dx = r.gdx_b;
    out.grad_b_dy = r.gdy_b;
    return out;
}

PairLossValue forward_consistency(const MotionField& m1, const MotionField& m2,
                                  double beta, Fingerprint* fp) {
    if (!m1.valid.same_shape(m2.valid) || m1.valid.data() != m2.valid.data()) {
        raise(ErrorKind::shape, "forward_consistency masks must match");
    }
    // residual m2 - 2*m1
    const GridPairLoss r = residual_smooth_l1(m1.dx, m1.dy, -2.0, m2.dx, m2.dy, 1.0,
                                              m1.valid, beta, fp);
    PairLossValue out;
    out.value = r.value;
    out.grad_a_dx = r.gdx_a;  // wrt m1
    out.grad_a_dy = r.gdy_a;
    out.grad_b_dx = r.gdx_b;  // wrt m2
    out.grad_b_dy = r.gdy_b;
    return out;
}

StateLossValue state_cross_entropy(const GridD& logit_static, const GridD& logit_moving,
                                   const StateMap& labels) {
    require_same_shape(logit_static, logit_moving, "state logits");
    if (logit_static.rows() != labels.labels.rows() ||
        logit_static.cols() != labels.labels.cols()) {
        raise(ErrorKind::shape, "state logits vs labels");
    }
    StateLossValue out;
    const int rows = logit_static.rows(), cols = logit_static.cols();
    out.grad_logit_static = GridD(rows, cols);
    out.grad_logit_moving = GridD(rows, cols);

    int count = 0;
    for (size_t k = 0; k < labels.labels.size(); ++k) {
        count += labels.labels[k] >= 0 ? 1 : 0;
    }
    if (count == 0) {
        return out;
    }
    const double inv = 1.0 / count;
    double total = 0.0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const MotionState label = labels.at(i, j);
            if (label == MotionState::invalid) {
                continue;
            }
            const double zs = logit_static.at(i, j);
            const double zm = logit_moving.at(i, j);
            const double mx = std::max(zs, zm);
            const double lse = mx + std::log(std::exp(zs - mx) + std::exp(zm - mx));
            const double z_label = label == MotionState::statics ? zs : zm;
            total += lse - z_label;
            const double p_static = std::exp(zs - lse);
            const double p_moving = std::exp(zm - lse);
            out.grad_logit_static.at(i, j) =
                (p_static - (label == MotionState::statics ? 1.0 : 0.0)) * inv;
            out.grad_logit_moving.at(i, j) =
                (p_moving - (label == MotionState::moving ? 1.0 : 0.0)) * inv;
        }
    }
    out.value = total * inv;
    return out;
}

GridU8 moving_mask(const GridD& logit_static, const GridD& logit_moving,
                   const GridU8& valid, Fingerprint* fp) {
    require_same_shape(logit_static, logit_moving, "state logits");
    GridU8 mask(logit_static.rows(), logit_static.cols());
    for (size_t k = 0; k < mask.size(); ++k) {
        if (!valid[k]) {
            continue;
        }
        const bool moving = logit_moving[k] > logit_static[k];
        if (fp) {
            fingerprint_mix(*fp, moving);
        }
        mask[k] = moving ? 1 : 0;
    }
    return mask;
}

TotalLossResult total_loss(const TotalLossInputs& in, const TotalLossOptions& opts,
                           Fingerprint* fp) {
    opts.weights.validate();
    if (!in.pred_dx02 || !in.pred_dy02 || !in.pred_dx04 || !in.pred_dy04 ||
        !in.logit_static || !in.logit_moving || !in.pseudo_one_step || !in.state_labels ||
        !in.occupancy) {
        raise(ErrorKind::shape, "total_loss missing required inputs");
    }
    const LossWeights& w = opts.weights;
    const int rows = in.pred_dx02->rows();
    const int cols = in.pred_dx02->cols();

    TotalLossResult res;
    res.g_dx02 = GridD(rows, cols);
    res.g_dy02 = GridD(rows, cols);
    res.g_dx04 = GridD(rows, cols);
    res.g_dy04 = GridD(rows, cols);
    res.g_logit_static = GridD(rows, cols);
    res.g_logit_moving = GridD(rows, cols);
    res.g_back_dx02 = GridD(rows, cols);
    res.g_back_dy02 = GridD(rows, cols);

    auto accumulate = [](GridD& dst, const GridD& src, double scale) {
        for (size_t k = 0; k < dst.size(); ++k) {
            dst[k] += scale * src[k];
        }
    };

    // motion supervision mask, optionally restricted by the state prediction
    GridU8 sup_mask = in.pseudo_one_step->valid;
    if (opts.msm_enabled) {
        const GridU8 moving = moving_mask(*in.logit_static, *in.logit_moving,
                                          in.pseudo_one_step->valid, fp);
        for (size_t k = 0; k < sup_mask.size(); ++k) {
            sup_mask[k] = sup_mask[k] && moving[k];
        }
    }
    int sup_cells = 0;
    for (size_t k = 0; k < sup_mask.size(); ++k) {
        sup_cells += sup_mask[k] ? 1 : 0;
    }
    res.report.sup_masked_cells = sup_cells;

    // L_sup over both horizons
    {
        const LossValue one = smooth_l1_grids(*in.pred_dx02, *in.pred_dy02,
                                              in.pseudo_one_step->dx, in.pseudo_one_step->dy,
                                              sup_mask, w.smooth_l1_beta, fp);
        res.report.sup += one.value;
        accumulate(res.g_dx02, one.grad_dx, 1.0);
        accumulate(res.g_dy02, one.grad_dy, 1.0);
        if (in.pseudo_two_step) {
            GridU8 mask2 = in.pseudo_two_step->valid;
            if (opts.msm_enabled) {
                for (size_t k = 0; k < mask2.size(); ++k) {
                    mask2[k] = mask2[k] && sup_mask[k];
                }
            }
            const LossValue two = smooth_l1_grids(*in.pred_dx04, *in.pred_dy04,
                                                  in.pseudo_two_step->dx,
                                                  in.pseudo_two_step->dy, mask2,
                                                  w.smooth_l1_beta, fp);
            res.report.sup += two.value;
            accumulate(res.g_dx04, two.grad_dx, 1.0);
            accumulate(res.g_dy04, two.grad_dy, 1.0);
        }
    }

    // smoothness (cluster or KNN) on the one-step prediction
    if (w.alpha > 0.0) {
        LossValue smooth;
        if (opts.smoothness == SmoothnessKind::cluster) {
            if (!in.clusters) {
                raise(ErrorKind::shape, "cluster consistency requires a cluster map");
            }
            smooth = cluster_consistency_grids(*in.pred_dx02, *in.pred_dy02, *in.clusters, fp);
        } else {
            if (!in.pillars) {
                raise(ErrorKind::shape, "knn consistency requires a pillar set");
            }
            MotionField pred(rows, cols, 0.2);
            pred.dx = *in.pred_dx02;
            pred.dy = *in.pred_dy02;
            smooth = knn_consistency(pred, *in.pillars, opts.knn_k, fp);
        }
        res.report.cluster = smooth.value;
        accumulate(res.g_dx02, smooth.grad_dx, w.alpha);
        accumulate(res.g_dy02, smooth.grad_dy, w.alpha);
    }

    // backward consistency
    if (w.beta > 0.0 && in.back_dx02 && in.back_dy02) {
        const GridPairLoss r = residual_smooth_l1(*in.pred_dx02, *in.pred_dy02, 1.0,
                                                  *in.back_dx02, *in.back_dy02, 1.0,
                                                  *in.occupancy, w.smooth_l1_beta, fp);
        res.report.back = r.value;
        accumulate(res.g_dx02, r.gdx_a, w.beta);
        accumulate(res.g_dy02, r.gdy_a, w.beta);
        accumulate(res.g_back_dx02, r.gdx_b, w.beta);
        accumulate(res.g_back_dy02, r.gdy_b, w.beta);
    }

    // forward consistency between the two horizons
    if (w.gamma > 0.0) {
        const GridPairLoss r = residual_smooth_l1(*in.pred_dx02, *in.pred_dy02, -2.0,
                                                  *in.pred_dx04, *in.pred_dy04, 1.0,
                                                  *in.occupancy, w.smooth_l1_beta, fp);
        res.report.forward = r.value;
        accumulate(res.g_dx02, r.gdx_a, w.gamma);
        accumulate(res.g_dy02, r.gdy_a, w.gamma);
        accumulate(res.g_dx04, r.gdx_b, w.gamma);
        accumulate(res.g_dy04, r.gdy_b, w.gamma);
    }

    // state head
    if (w.sigma > 0.0) {
        const StateLossValue s =
            state_cross_entropy(*in.logit_static, *in.logit_moving, *in.state_labels);
        res.report.state = s.value;
        accumulate(res.g_logit_static, s.grad_logit_static, w.sigma);
        accumulate(res.g_logit_moving, s.grad_logit_moving, w.sigma);
    }

    res.report.total = res.report.sup + w.alpha * res.report.cluster +
                       w.beta * res.report.back + w.gamma * res.report.forward +
                       w.sigma * res.report.state;
    return res;
}

}  // namespace bevmotion
