#include "bevmotion/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bevmotion {

void TransportConfig::validate() const {
    if (epsilon < 0.0 || (epsilon == 0.0 && !(epsilon_scale > 0.0))) {
        raise(ErrorKind::config, "transport epsilon must resolve to a positive value");
    }
    if (max_iters < 1) {
        raise(ErrorKind::config, "transport max_iters must be >= 1");
    }
    if (!(marginal_tol >= 0.0)) {
        raise(ErrorKind::config, "transport marginal_tol must be >= 0");
    }
}

double TransportConfig::resolve_epsilon(const CostMatrix& cost) const {
    if (epsilon > 0.0) {
        return epsilon;
    }
    std::vector<double> sorted = cost.values;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double eps = epsilon_scale * median;
    // Degenerate all-zero costs still need a positive regularizer.
    return eps > 0.0 ? eps : epsilon_scale;
}

CostMatrix cost_matrix(const std::vector<Vec2>& src, const std::vector<Vec2>& tgt) {
    if (src.empty() || tgt.empty()) {
        raise(ErrorKind::empty_input, "cost_matrix requires nonempty point lists");
    }
    CostMatrix cost;
    cost.src_count = static_cast<int>(src.size());
    cost.tgt_count = static_cast<int>(tgt.size());
    cost.values.resize(src.size() * tgt.size());
    for (size_t i = 0; i < src.size(); ++i) {
        for (size_t j = 0; j < tgt.size(); ++j) {
            cost.values[i * tgt.size() + j] = (src[i] - tgt[j]).norm();
        }
    }
    return cost;
}

std::vector<Vec2> prewarp(const std::vector<Vec2>& src,
                          const std::vector<Vec2>& predicted_motion) {
    if (src.size() != predicted_motion.size()) {
        raise(ErrorKind::shape, "prewarp length mismatch");
    }
    std::vector<Vec2> out(src.size());
    for (size_t i = 0; i < src.size(); ++i) {
        out[i] = src[i] + predicted_motion[i];
    }
    return out;
}

std::vector<int> harden(const std::vector<double>& soft, int src_count, int tgt_count) {
    std::vector<int> hard(src_count);
    for (int i = 0; i < src_count; ++i) {
        const double* row = soft.data() + static_cast<size_t>(i) * tgt_count;
        int best = 0;
        for (int j = 1; j < tgt_count; ++j) {
            if (row[j] > row[best]) {
                best = j;
            }
        }
        hard[i] = best;
    }
    return hard;
}

namespace {

constexpr double kFastPathLimit = 400.0;  // max(C)/eps bound for exp(-C/eps) scaling

struct Marginals {
    std::vector<double> row;  // target row sums (1/m each)
    std::vector<double> col;  // target col sums (1/n each)
};

double max_residual(const std::vector<double>& plan, int m, int n, const Marginals& target) {
    double worst = 0.0;
    std::vector<double> col_sum(n, 0.0);
    for (int i = 0; i < m; ++i) {
        double row_sum = 0.0;
        const double* row = plan.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            row_sum += row[j];
            col_sum[j] += row[j];
        }
        worst = std::max(worst, std::abs(row_sum - target.row[i]));
    }
    for (int j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(col_sum[j] - target.col[j]));
    }
    return worst;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

// Multiplicative Sinkhorn on K = exp(-C/eps). Only valid when K has no fully
// underflowed rows/columns; the caller gates on kFastPathLimit. Returns false
// if scaling factors leave the finite range, in which case the log-domain
// path takes over.
bool sinkhorn_scaling(const CostMatrix& cost, double eps, const TransportConfig& cfg,
                      TransportPlan& plan) {
    const int m = cost.src_count;
    const int n = cost.tgt_count;
    const double a = 1.0 / m;
    const double b = 1.0 / n;
    Marginals target{std::vector<double>(m, a), std::vector<double>(n, b)};

    std::vector<double> K(cost.values.size());
    for (size_t idx = 0; idx < K.size(); ++idx) {
        K[idx] = std::exp(-cost.values[idx] / eps);
    }
    std::vector<double> u(m, 1.0), v(n, 1.0), Kv(m), Ktu(n);

    const bool check_every_iter = cfg.marginal_tol > 0.0;
    plan.converged = false;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        // u update: row constraints become exact
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            const double* Krow = K.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                s += Krow[j] * v[j];
            }
            Kv[i] = s;
            u[i] = a / s;
        }
        // v update: column constraints become exact
        std::fill(Ktu.begin(), Ktu.end(), 0.0);
        for (int i = 0; i < m; ++i) {
            const double* Krow = K.data() + static_cast<size_t>(i) * n;
            const double ui = u[i];
            for (int j = 0; j < n; ++j) {
                Ktu[j] += Krow[j] * ui;
            }
        }
        for (int j = 0; j < n; ++j) {
            v[j] = b / Ktu[j];
        }
        if (!all_finite(u) || !all_finite(v)) {
            return false;
        }
        if (check_every_iter) {
            // After the v update columns are exact; the residual lives on rows.
            double worst = 0.0;
            for (int i = 0; i < m; ++i) {
                double s = 0.0;
                const double* Krow = K.data() + static_cast<size_t>(i) * n;
                for (int j = 0; j < n; ++j) {
                    s += Krow[j] * v[j];
                }
                worst = std::max(worst, std::abs(u[i] * s - a));
            }
            if (worst < cfg.marginal_tol) {
                plan.converged = true;
                ++iter;
                break;
            }
        }
    }
    plan.iterations_used = iter;

    plan.soft.resize(cost.values.size());
    for (int i = 0; i < m; ++i) {
        const double* Krow = K.data() + static_cast<size_t>(i) * n;
        double* prow = plan.soft.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            prow[j] = u[i] * Krow[j] * v[j];
        }
    }
    if (!all_finite(plan.soft)) {
        return false;
    }
    if (!plan.converged && check_every_iter) {
        plan.converged = max_residual(plan.soft, m, n, target) < cfg.marginal_tol;
    }
    return true;
}

// Log-domain Sinkhorn on dual potentials. Handles arbitrarily small eps.
void sinkhorn_log_domain(const CostMatrix& cost, double eps, const TransportConfig& cfg,
                         TransportPlan& plan) {
    const int m = cost.src_count;
    const int n = cost.tgt_count;
    const double log_a = -std::log(static_cast<double>(m));
    const double log_b = -std::log(static_cast<double>(n));
    Marginals target{std::vector<double>(m, 1.0 / m), std::vector<double>(n, 1.0 / n)};

    std::vector<double> f(m, 0.0), g(n, 0.0), scratch(std::max(m, n));

    auto lse_row = [&](int i) {
        // logsumexp over j of (g_j - C_ij)/eps
        const double* Crow = cost.values.data() + static_cast<size_t>(i) * n;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            scratch[j] = (g[j] - Crow[j]) / eps;
            mx = std::max(mx, scratch[j]);
        }
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            s += std::exp(scratch[j] - mx);
        }
        return mx + std::log(s);
    };
    auto lse_col = [&](int j) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double t = (f[i] - cost.at(i, j)) / eps;
            scratch[i] = t;
            mx = std::max(mx, t);
        }
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            s += std::exp(scratch[i] - mx);
        }
        return mx + std::log(s);
    };

    plan.converged = false;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        for (int i = 0; i < m; ++i) {
            f[i] = eps * (log_a - lse_row(i));
        }
        for (int j = 0; j < n; ++j) {
            g[j] = eps * (log_b - lse_col(j));
        }
        if (!all_finite(f) || !all_finite(g)) {
            raise(ErrorKind::solver_failure, "sinkhorn potentials left the finite range");
        }
        if (cfg.marginal_tol > 0.0) {
            // Columns are exact after the g update; check rows.
            double worst = 0.0;
            for (int i = 0; i < m; ++i) {
                const double* Crow = cost.values.data() + static_cast<size_t>(i) * n;
                double s = 0.0;
                for (int j = 0; j < n; ++j) {
                    s += std::exp((f[i] + g[j] - Crow[j]) / eps);
                }
                worst = std::max(worst, std::abs(s - target.row[i]));
            }
            if (worst < cfg.marginal_tol) {
                plan.converged = true;
                ++iter;
                break;
            }
        }
    }
    plan.iterations_used = iter;

    plan.soft.resize(cost.values.size());
    for (int i = 0; i < m; ++i) {
        const double* Crow = cost.values.data() + static_cast<size_t>(i) * n;
        double* prow = plan.soft.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            prow[j] = std::exp((f[i] + g[j] - Crow[j]) / eps);
        }
    }
    if (!all_finite(plan.soft)) {
        raise(ErrorKind::solver_failure, "sinkhorn coupling left the finite range");
    }
    if (!plan.converged && cfg.marginal_tol > 0.0) {
        plan.converged = max_residual(plan.soft, m, n, target) < cfg.marginal_tol;
    }
}

}  // namespace

TransportPlan sinkhorn(const CostMatrix& cost, const TransportConfig& cfg) {
    cfg.validate();
    if (cost.src_count <= 0 || cost.tgt_count <= 0) {
        raise(ErrorKind::empty_input, "sinkhorn requires a nonempty cost matrix");
    }
    double max_cost = 0.0;
    for (double c : cost.values) {
        if (!std::isfinite(c) || c < 0.0) {
            raise(ErrorKind::numeric, "cost matrix entries must be finite and nonnegative");
        }
        max_cost = std::max(max_cost, c);
    }
    const double eps = cfg.resolve_epsilon(cost);

    TransportPlan plan;
    plan.src_count = cost.src_count;
    plan.tgt_count = cost.tgt_count;
    if (max_cost / eps > kFastPathLimit || !sinkhorn_scaling(cost, eps, cfg, plan)) {
        sinkhorn_log_domain(cost, eps, cfg, plan);
    }
    plan.hard = harden(plan.soft, plan.src_count, plan.tgt_count);
    return plan;
}

std::vector<int> brute_force_assignment(const CostMatrix& cost) {
    const int n = cost.src_count;
    if (n != cost.tgt_count) {
        raise(ErrorKind::unsupported, "brute_force_assignment requires a square cost matrix");
    }
    if (n > 10) {
        raise(ErrorKind::unsupported, "brute_force_assignment supports N <= 10");
    }
    if (n == 0) {
        raise(ErrorKind::empty_input, "brute_force_assignment requires a nonempty matrix");
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            total += cost.at(i, perm[i]);
        }
        if (total < best_cost) {
            best_cost = total;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace bevmotion
