#pragma once

#include <vector>

#include "bevmotion/types.hpp"

namespace bevmotion {

struct CostMatrix {
    std::vector<double> values;  // src_count x tgt_count, row-major
    int src_count = 0;
    int tgt_count = 0;

    double at(int i, int j) const { return values[static_cast<size_t>(i) * tgt_count + j]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * tgt_count + j]; }
};

struct TransportConfig {
    double epsilon = 0.0;         // entropic regularizer; 0 = auto (epsilon_scale * median cost)
    double epsilon_scale = 0.03;  // used when epsilon == 0
    int max_iters = 2000;
    double marginal_tol = 1e-9;

    void validate() const;
    // Resolves the effective epsilon for a given cost matrix.
    double resolve_epsilon(const CostMatrix& cost) const;
};

struct TransportPlan {
    std::vector<double> soft;   // src_count x tgt_count coupling
    std::vector<int> hard;      // per-row argmax column
    int src_count = 0;
    int tgt_count = 0;
    bool converged = false;
    int iterations_used = 0;

    double soft_at(int i, int j) const { return soft[static_cast<size_t>(i) * tgt_count + j]; }
};

// Pairwise Euclidean distances between two 2D point lists. Both must be
// nonempty; matching is undefined otherwise.
CostMatrix cost_matrix(const std::vector<Vec2>& src, const std::vector<Vec2>& tgt);

// Displaces each source point by its predicted motion.
std::vector<Vec2> prewarp(const std::vector<Vec2>& src, const std::vector<Vec2>& predicted_motion);

// Entropic optimal transport with uniform marginals: each row of the coupling
// sums to 1/N_src and each column to 1/N_tgt. Minimizes
//   sum_ij C_ij pi_ij + eps * pi_ij * (log pi_ij - 1)
// by Sinkhorn scaling. Runs a multiplicative fast path when exp(-C/eps) cannot
// underflow to zero rows, and log-domain stabilized iterations otherwise.
// Stops when the max marginal residual drops below marginal_tol or max_iters
// is reached; the converged flag reports which.
TransportPlan sinkhorn(const CostMatrix& cost, const TransportConfig& cfg);

// Row-argmax extraction, ties broken toward the lowest column index.
std::vector<int> harden(const std::vector<double>& soft, int src_count, int tgt_count);

// Exhaustive minimum-cost assignment over all permutations. Square instances
// with N <= 10 only; the ground-truth oracle for the eps -> 0 limit.
std::vector<int> brute_force_assignment(const CostMatrix& cost);

}  // namespace bevmotion
