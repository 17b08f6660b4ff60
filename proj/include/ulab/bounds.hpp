#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"
#include "ulab/norms.hpp"

namespace ulab {

// How the expectation-of-max envelope terms are evaluated: a sup over letters
// (always valid) or a Monte Carlo average of the grid max (tighter).
enum class EnvelopeMode { deterministic, stochastic };

struct BoundTerm {
    std::string key;  // a partition-spec or coordinate-set label
    double value = 0.0;
};

struct BoundReport {
    double bound_value = 0.0;  // L^p times the sum of the terms
    std::vector<BoundTerm> terms;
    CalibrationConstants constants_used;
    EnvelopeMode mode = EnvelopeMode::deterministic;
};

struct MomentBoundOptions {
    NormOptions norms;
    int envelope_reps = 256;   // stochastic mode only
    std::uint64_t seed = 12345;
    int threads = 1;
};

// Moment bound for the decoupled sum of a canonical kernel:
//   L^p ( sum_{(K,J)} p^{p deg J / 2} n^{dp/2} ||h||_{K,J}^p
//         + sum_{I proper} p^{p(d+#I^c)/2} n^{#I p/2} T_I ),
// T_I = E max over the decoupled index grid of (E_I|h|^2)^{p/2}.
BoundReport moment_bound(const Kernel& h, int n, double p, const CalibrationConstants& consts,
                         EnvelopeMode mode, const MomentBoundOptions& opts = {});

struct TailBound {
    double threshold = 0.0;
    double bound = 1.0;
};

// P(|sum| >= L(n^{d/2} sqrt(E|h|^2) + t)) <= min(1, L exp(-min(M1,M2)/L)),
// M1 over proper K with any J, M2 over proper I. A zero-denominator direction
// contributes +infinity; every direction is 0 when t = 0.
TailBound tail_bound_canonical(const Kernel& h, int n, double t, const CalibrationConstants& consts,
                               const NormOptions& nopts = {});

// Same evaluation for the projected statistic sum pi_d h(X^dec): the norms are
// those of h itself, so the numbers coincide with tail_bound_canonical.
TailBound tail_bound_projected(const Kernel& h, int n, double t, const CalibrationConstants& consts,
                               const NormOptions& nopts = {});

// (2^d - 1) n^{2d-1} E g^2, an upper bound for Var of the full decoupled sum.
double variance_bound(const Kernel& g, int n);

struct PzResult {
    bool applicable = false;
    double bound = 0.0;      // (1-lambda)^2 t / (t + 2^d - 1) when applicable
    std::string rejection;   // names the violated hypothesis otherwise
};

// Lower bound for P(sum_{|i|<=N} h(X^dec_i) >= lambda t a) for nonnegative h,
// after verifying N^d E h >= t a and ||E_I h||_inf <= N^{-#I} a for all proper I.
PzResult pz_lower(const Kernel& h, int N, double a, double t, double lambda);

struct DecouplingComparison {
    double lhs = 0.0;  // || sum pi_d h ||_p, exact
    double rhs = 0.0;  // 2^d || sum eps^dec h ||_p, exact
};

// Exact both-sides evaluation of the decoupled randomization comparison;
// the contract lhs <= rhs holds on every enumerable instance. p in {2, 4}.
DecouplingComparison decoupling_comparison(const Kernel& h, int n, int p);

struct CalibrationCase {
    Kernel h;
    int n = 4;
    double p = 2.0;   // moment order (moment cases)
    double t = 0.0;   // tail offset (tail cases)
    bool tail = false;
};

// Smallest power-of-two L making every calibration case pass: moment cases need
// bound >= the MC point estimate, tail cases need bound >= the MC frequency at
// the L-dependent threshold. Kernels are projected to canonical form first.
CalibrationConstants fit_constant_L(const std::vector<CalibrationCase>& cases, int reps,
                                    std::uint64_t seed, int threads = 1);

}  // namespace ulab
