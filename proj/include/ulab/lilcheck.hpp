#pragma once

#include <cstdint>
#include <vector>

#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"
#include "ulab/norms.hpp"

namespace ulab {

struct GrowthPoint {
    double u = 0.0;
    double norm = 0.0;        // ||h||_{K,J,u}
    double normalized = 0.0;  // norm / (LL u)^{(d - deg J)/2}
    bool converged = true;
};

struct GrowthCurve {
    PartitionSpec spec;
    std::vector<GrowthPoint> points;
    // Caps are inactive from here on: every feasible test function already
    // satisfies |f| <= (min positive block-cell probability)^{-1/2}.
    double saturation_u = 1.0;
};

// 24 log-spaced points from 1 to 4 / sqrt(min positive letter probability),
// covering both the active-cap and the saturated regime.
std::vector<double> default_u_grid(const Kernel& h);

GrowthCurve growth_curve(const Kernel& h, const PartitionSpec& spec, const std::vector<double>& u_grid,
                         const NormOptions& opts = {});

struct LilSimOptions {
    bool enabled = false;  // when set, a simulated envelope C* accompanies D*
    int n_max_exp = 8;
    int reps = 32;
    std::uint64_t seed = 12345;
    int threads = 1;
};

struct LilCertificate {
    CanonicalReport canonical;
    bool symmetric = false;
    bool decoupled_only = false;  // asymmetric input: only the decoupled statement applies
    double integrability_value = 0.0;  // E|h|^2 / (LL|h|)^d
    std::vector<GrowthCurve> growth_curves;  // one per partition spec
    double d_star = 0.0;   // max over specs and grid points of the normalized value
    bool has_c_star = false;
    double c_star = 0.0;   // max over dyadic levels of the median path ratio
    CalibrationConstants constants_used;
};

// Assembles every finite-alphabet LIL condition for h: degeneracy, symmetry,
// integrability, and the full family of truncated-norm growth curves.
LilCertificate lil_certificate(const Kernel& h, const std::vector<double>& u_grid,
                               const CalibrationConstants& consts, const LilSimOptions& sim = {},
                               const NormOptions& nopts = {});

enum class TrendVerdict { growing, stabilizing, shrinking };

struct TruncationTrend {
    std::vector<GrowthCurve> curves;  // one per kernel in the sequence
    std::vector<double> maxima;       // per-kernel max normalized value
    TrendVerdict verdict = TrendVerdict::stabilizing;
};

// Finite proxy for a refinement sequence of kernels on growing alphabets: the
// per-kernel curve maxima and whether they grow, stabilize (within 2%), or
// shrink between the last two refinements.
TruncationTrend truncation_trend(const std::vector<Kernel>& seq, const PartitionSpec& spec,
                                 const std::vector<double>& u_grid, const NormOptions& opts = {});

}  // namespace ulab
