#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ulab/kernel.hpp"

namespace ulab {

// The four sum variants. Undecoupled kinds draw one column of n variables and
// sum over injective index tuples; decoupled kinds draw d independent columns
// and sum over the full grid. Randomized kinds attach Rademacher signs, one
// shared column for the undecoupled sum and one per coordinate otherwise.
enum class SampleKind {
    undecoupled,
    decoupled,
    randomized_undecoupled,
    randomized_decoupled,
};

bool is_decoupled(SampleKind kind);
bool is_randomized(SampleKind kind);
const char* to_string(SampleKind kind);

struct SampleConfig {
    int n = 1;
    int reps = 1;
    std::uint64_t seed = 12345;
    SampleKind kind = SampleKind::undecoupled;
};

struct Sample {
    std::vector<std::vector<int>> columns;  // 0-based letters, one or d columns
};

struct SignTable {
    std::vector<std::vector<int>> columns;  // entries are +1 / -1
};

// Deterministic draws: letters come from the stream keyed (seed, rep, column)
// at counter = position, so the size-n sample is a prefix of the size-n' one
// for n' > n and worker scheduling cannot change any draw.
Sample draw_sample(const Kernel& h, const SampleConfig& cfg, int rep);
SignTable draw_signs(const SampleConfig& cfg, int d, int rep);

// The statistic for one draw. Undecoupled with n < d is the empty sum.
std::vector<double> ustat_sum(const Kernel& h, const SampleConfig& cfg, const Sample& sample,
                              const SignTable* signs = nullptr);

// Full decoupled grid sum minus the injective-tuple part: the terms with at
// least one repeated index. Needs a d-column sample.
std::vector<double> diagonal_sum(const Kernel& h, const SampleConfig& cfg, const Sample& sample);

struct SimEntry {
    std::string name;
    double estimate = 0.0;
    double half_width = 0.0;
};

struct SimReport {
    std::vector<SimEntry> entries;
    int reps_used = 0;
    std::uint64_t seed = 0;
};

// Exact enumeration over every letter (and sign) configuration, weighted by
// the product law. Guard: m^{n·cols} times 2^{n·cols} for randomized kinds
// must not exceed 2^24 (cols = d for decoupled kinds, 1 otherwise).
void enumerate_statistic(const Kernel& h, int n, SampleKind kind,
                         const std::function<void(const std::vector<double>&, double)>& fn);

// Whether the configuration count fits under the enumeration guard.
bool enumeration_feasible(const Kernel& h, int n, SampleKind kind);

double exact_moment(const Kernel& h, int n, int p, SampleKind kind);  // p in {2, 4}
double exact_tail_probability(const Kernel& h, int n, SampleKind kind, double t);

struct ExactMoments {
    std::vector<double> mean;      // E S, componentwise
    double second_moment = 0.0;    // E |S|^2
};
ExactMoments exact_first_two_moments(const Kernel& h, int n, SampleKind kind);

// Monte Carlo E|S|^p with a central-limit 95% half-width.
SimReport mc_moment(const Kernel& h, const SampleConfig& cfg, double p, int threads = 1);

struct Interval {
    double low = 0.0;
    double high = 1.0;
};
Interval wilson95(std::uint64_t successes, std::uint64_t trials);

struct TailEstimate {
    std::uint64_t successes = 0;
    int reps = 0;
    double estimate = 0.0;
    Interval wilson;
};
TailEstimate mc_tail_counts(const Kernel& h, const SampleConfig& cfg, double t, int threads = 1);
// Estimate of P(|S| >= t); the half-width is half the Wilson interval.
SimReport mc_tail(const Kernel& h, const SampleConfig& cfg, double t, int threads = 1);

// Law-of-the-iterated-logarithm diagnostics: per replication one growing path
// of draws, with |S_{2^k}| / (2^k LL 2^k)^{d/2} recorded at each dyadic size.
struct LilLevel {
    int k = 0;
    std::uint64_t n = 0;
    double median_ratio = 0.0;
    double max_ratio = 0.0;
};

struct LilSequence {
    std::vector<LilLevel> levels;
    double overall_max = 0.0;
    // Heuristic trend flag: the last min(6, levels) medians are strictly
    // increasing and the final one is at least twice the middle level's median.
    bool divergent = false;
};

LilSequence lil_ratio_sequence(const Kernel& h, SampleKind kind, int n_max_exp, int reps,
                               std::uint64_t seed, int threads = 1);

}  // namespace ulab
