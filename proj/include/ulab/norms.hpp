#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"

namespace ulab {

// Maximizing test functions for one partition norm. Factor 0 is the
// Hilbert-space-valued one: a table over Sigma^{#K} of R^q vectors, or a single
// constant vector phi when K is empty. One scalar table follows per partition
// block, in block order. Values at probability-zero cells are fixed to 0.
struct TestFunctionBundle {
    std::vector<double> g;               // m^{#K} * q entries (q entries when K is empty)
    std::vector<std::vector<double>> f;  // f[j]: m^{#J_j} entries
};

struct NormResult {
    double value = 0.0;
    TestFunctionBundle certificate;
    int restarts_used = 0;
    bool converged = false;
    double gap_estimate = 0.0;  // last sweep's improvement for the winning restart
};

struct NormOptions {
    int random_restarts = 8;  // plus one spectral warm start
    int max_sweeps = 500;
    double rel_tol = 1e-10;
    std::uint64_t seed = 12345;
    int threads = 1;
};

inline constexpr double kNoCap = std::numeric_limits<double>::infinity();

// sup of E<h(X), g(X_K)> prod_j f_j(X_{J_j}) over unit-L2 test functions.
// Alternating maximization, exact per-block inner steps, multi-restart.
// spec = ({1..d}, {}) is returned in closed form as sqrt(E|h|^2).
NormResult norm_kj(const Kernel& h, const PartitionSpec& spec, const NormOptions& opts = {});

// Same supremum with the extra caps sup|f_j| <= u and sup|g| <= u
// (|phi| <= min(1, u) when K is empty). u = kNoCap recovers norm_kj.
NormResult norm_kju(const Kernel& h, const PartitionSpec& spec, double u, const NormOptions& opts = {});

// The objective at a given bundle (used for certificate checks and reports).
double objective_at(const Kernel& h, const PartitionSpec& spec, const TestFunctionBundle& bundle);

// Certified lower bound: max of the objective over `samples` random feasible
// bundles plus every one-cell spike candidate at extreme feasible magnitude.
// Guard: total table dimension <= 64. Shares nothing with the solver's
// iteration path.
double bruteforce_norm_oracle(const Kernel& h, const PartitionSpec& spec, double u, int samples,
                              std::uint64_t seed);

// Dense d-indexed array over {1..n}^d of R^q vectors, row-major then value coordinate.
struct DenseArray {
    int d = 0;
    int n = 0;
    int q = 1;
    std::vector<double> v;
};

// sup of sum_i a_i x^(1)_{i_{J_1}} ... x^(k)_{i_{J_k}} over unit-l2 coefficient
// blocks (plain real array, q = 1). Single-block partition is the Frobenius norm.
double array_norm(const DenseArray& a, const Partition& J, const NormOptions& opts = {});

// sup of |sum_i <a_i, alpha^(0)_{i_K}> prod_k alpha^(k)_{i_{J_k}}| subject to
// sum |alpha^(0)|^2 <= 1, sum (alpha^(k))^2 <= p, and the per-slice constraint
// (fixing the largest coordinate of each block J_k) sum <= 1.
double chaos_star_norm(const DenseArray& a, const PartitionSpec& spec, double p, const NormOptions& opts = {});

// Norm of the n-fold replicated family (every member equal to h), where test
// functions depend jointly on the index block and the letters. Computed by
// embedding into one kernel on the extended alphabet [n] x Sigma with law
// p(y)/n; the per-coordinate measure mass n then contributes the factor n^{d/2}.
double replicated_array_norm(const Kernel& h, const PartitionSpec& spec, int n, const NormOptions& opts = {});

}  // namespace ulab
