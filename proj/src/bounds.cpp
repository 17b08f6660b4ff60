#include "ulab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ulab/errors.hpp"
#include "ulab/parallel.hpp"
#include "ulab/rng.hpp"
#include "ulab/simulate.hpp"

namespace ulab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double npow(double base, double expo) { return std::pow(base, expo); }

// Stochastic E max over the decoupled grid of (E_I|h|^2)^{p/2}: each rep draws
// n letters per free coordinate and takes the max of the conditional second
// moment over the n^{#I^c} grid.
double envelope_stochastic(const Kernel& h, const CoordSet& I, int n, double p,
                           const MomentBoundOptions& opts) {
    Kernel e2 = partial_expectation(squared_norm_kernel(h), I);
    CoordSet free = I.complement(h.d());
    int dfree = free.size();
    std::vector<double> slots(static_cast<std::size_t>(opts.envelope_reps), 0.0);
    parallel_for(opts.envelope_reps, opts.threads, [&](int rep) {
        std::vector<std::vector<int>> columns(static_cast<std::size_t>(dfree));
        for (int c = 0; c < dfree; ++c) {
            rng::Stream stream =
                rng::Stream::from(opts.seed, rng::kTagEnvelope, static_cast<std::uint64_t>(rep),
                                  static_cast<std::uint64_t>(free.members()[static_cast<std::size_t>(c)]));
            auto& col = columns[static_cast<std::size_t>(c)];
            col.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                col[static_cast<std::size_t>(i)] = h.law().sample(stream.uniform(static_cast<std::uint64_t>(i)));
        }
        double best = 0.0;
        std::vector<int> letters(static_cast<std::size_t>(dfree));
        for_each_index(n, dfree, false, [&](const MultiIndex& idx) {
            for (int c = 0; c < dfree; ++c)
                letters[static_cast<std::size_t>(c)] =
                    columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(idx[static_cast<std::size_t>(c)] - 1)];
            best = std::max(best, e2.at(letters)[0]);
        });
        slots[static_cast<std::size_t>(rep)] = npow(best, p / 2.0);
    });
    double mean = 0.0;
    for (double v : slots) mean += v;
    return mean / static_cast<double>(opts.envelope_reps);
}

// One tail direction: 0 at t = 0, +infinity for a zero denominator, else the
// stated power of t/denom.
double tail_term(double t, double denom, double exponent) {
    if (t == 0.0) return 0.0;
    if (denom <= 0.0) return kInf;
    return npow(t / denom, exponent);
}

struct TailIngredients {
    double sqrt_second = 0.0;
    double M = kInf;
};

TailIngredients tail_ingredients(const Kernel& h, int n, double t, const NormOptions& nopts) {
    TailIngredients out;
    out.sqrt_second = std::sqrt(second_moment(h));
    int d = h.d();
    double ndh = npow(static_cast<double>(n), static_cast<double>(d) / 2.0);
    for (const PartitionSpec& spec : enumerate_partition_specs(d)) {
        if (spec.K.size() == d) continue;  // deg J = 0 never enters the min
        double denom = ndh * norm_kj(h, spec, nopts).value;
        out.M = std::min(out.M, tail_term(t, denom, 2.0 / static_cast<double>(spec.deg())));
    }
    for (std::uint32_t mask = 0; mask + 1 < (1u << d); ++mask) {
        CoordSet I = CoordSet::from_mask(mask);
        double denom = npow(static_cast<double>(n), static_cast<double>(I.size()) / 2.0) * conditional_sup_norm(h, I);
        double exponent = 2.0 / static_cast<double>(d + (d - I.size()));
        out.M = std::min(out.M, tail_term(t, denom, exponent));
    }
    return out;
}

TailBound tail_core(const Kernel& h, int n, double t, const CalibrationConstants& consts,
                    const NormOptions& nopts) {
    if (n < 1) throw InputError("n must be at least 1");
    if (t < 0.0) throw InputError("t must be nonnegative");
    consts.validate();
    TailIngredients ing = tail_ingredients(h, n, t, nopts);
    TailBound out;
    out.threshold =
        consts.L * (npow(static_cast<double>(n), static_cast<double>(h.d()) / 2.0) * ing.sqrt_second + t);
    out.bound = std::min(1.0, consts.L * std::exp(-ing.M / consts.L));
    return out;
}

}  // namespace

BoundReport moment_bound(const Kernel& h, int n, double p, const CalibrationConstants& consts,
                         EnvelopeMode mode, const MomentBoundOptions& opts) {
    if (n < 1) throw InputError("n must be at least 1");
    if (!(p >= 2.0)) throw InputError("p must be at least 2");
    consts.validate();
    int d = h.d();
    BoundReport report;
    report.constants_used = consts;
    report.mode = mode;

    double nd = npow(static_cast<double>(n), static_cast<double>(d) * p / 2.0);
    for (const PartitionSpec& spec : enumerate_partition_specs(d)) {
        double norm = norm_kj(h, spec, opts.norms).value;
        double term = npow(p, p * static_cast<double>(spec.deg()) / 2.0) * nd * npow(norm, p);
        report.terms.push_back({to_string(spec), term});
    }
    for (std::uint32_t mask = 0; mask + 1 < (1u << d); ++mask) {
        CoordSet I = CoordSet::from_mask(mask);
        int cfree = d - I.size();
        double envelope;
        if (mode == EnvelopeMode::deterministic) {
            envelope = npow(conditional_sup_norm(h, I), p);
        } else {
            envelope = envelope_stochastic(h, I, n, p, opts);
        }
        double term = npow(p, p * static_cast<double>(d + cfree) / 2.0) *
                      npow(static_cast<double>(n), static_cast<double>(I.size()) * p / 2.0) * envelope;
        report.terms.push_back({"I=" + to_string(I), term});
    }
    double sum = 0.0;
    for (const BoundTerm& term : report.terms) sum += term.value;
    report.bound_value = npow(consts.L, p) * sum;
    return report;
}

TailBound tail_bound_canonical(const Kernel& h, int n, double t, const CalibrationConstants& consts,
                               const NormOptions& nopts) {
    return tail_core(h, n, t, consts, nopts);
}

TailBound tail_bound_projected(const Kernel& h, int n, double t, const CalibrationConstants& consts,
                               const NormOptions& nopts) {
    // The projected statistic's randomized kernel has the same norms as h, so
    // the evaluation coincides with the canonical one.
    return tail_core(h, n, t, consts, nopts);
}

double variance_bound(const Kernel& g, int n) {
    if (g.q() != 1) throw InputError("variance bound expects a scalar kernel");
    if (n < 1) throw InputError("n must be at least 1");
    double count = npow(2.0, static_cast<double>(g.d())) - 1.0;
    return count * npow(static_cast<double>(n), 2.0 * g.d() - 1.0) * second_moment(g);
}

PzResult pz_lower(const Kernel& h, int N, double a, double t, double lambda) {
    if (h.q() != 1) throw InputError("lower bound expects a scalar kernel");
    if (N < 1) throw InputError("N must be at least 1");
    if (!(a > 0.0) || !(t > 0.0)) throw InputError("a and t must be positive");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0,1)");
    PzResult res;
    for (std::size_t x = 0; x < h.cells(); ++x) {
        if (h.cell_prob(x) == 0.0) continue;
        if (h.raw()[x] < 0.0) {
            res.rejection = "kernel is not nonnegative";
            return res;
        }
    }
    double mean = 0.0;
    for (std::size_t x = 0; x < h.cells(); ++x) mean += h.cell_prob(x) * h.raw()[x];
    double nd = npow(static_cast<double>(N), static_cast<double>(h.d()));
    if (!(nd * mean >= t * a)) {
        res.rejection = "mean hypothesis violated: N^d E h < t a";
        return res;
    }
    for (std::uint32_t mask = 0; mask + 1 < (1u << h.d()); ++mask) {
        CoordSet I = CoordSet::from_mask(mask);
        double sup = conditional_abs_mean_sup(h, I);
        double cap = npow(static_cast<double>(N), -static_cast<double>(I.size())) * a;
        if (!(sup <= cap)) {
            res.rejection = "conditional mean hypothesis violated at I=" + to_string(I);
            return res;
        }
    }
    res.applicable = true;
    res.bound = (1.0 - lambda) * (1.0 - lambda) * t / (t + npow(2.0, static_cast<double>(h.d())) - 1.0);
    return res;
}

DecouplingComparison decoupling_comparison(const Kernel& h, int n, int p) {
    if (p != 2 && p != 4) throw InputError("comparison expects p = 2 or p = 4");
    DecouplingComparison out;
    Kernel hp = hoeffding_project(h);
    out.lhs = npow(exact_moment(hp, n, p, SampleKind::decoupled), 1.0 / static_cast<double>(p));
    out.rhs = npow(2.0, static_cast<double>(h.d())) *
              npow(exact_moment(h, n, p, SampleKind::randomized_decoupled), 1.0 / static_cast<double>(p));
    return out;
}

CalibrationConstants fit_constant_L(const std::vector<CalibrationCase>& cases, int reps,
                                    std::uint64_t seed, int threads) {
    if (cases.empty()) throw InputError("calibration needs at least one case");
    if (reps < 1) throw InputError("reps must be at least 1");

    struct Prepared {
        Kernel hp;
        int n;
        double p = 2.0;
        double t = 0.0;
        bool tail = false;
        double base_sum = 0.0;    // moment cases: bound terms at L = 1
        double target = 0.0;      // moment cases: MC point estimate
        TailIngredients ing;
    };
    std::vector<Prepared> prep;
    prep.reserve(cases.size());
    for (const CalibrationCase& c : cases) {
        Prepared pc{hoeffding_project(c.h), c.n, c.p, c.t, c.tail, 0.0, 0.0, {}};
        MomentBoundOptions mopts;
        mopts.seed = seed;
        mopts.threads = threads;
        SampleConfig cfg;
        cfg.n = c.n;
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.kind = SampleKind::decoupled;
        if (!c.tail) {
            CalibrationConstants unit;
            pc.base_sum = moment_bound(pc.hp, c.n, c.p, unit, EnvelopeMode::deterministic, mopts).bound_value;
            pc.target = mc_moment(pc.hp, cfg, c.p, threads).entries[0].estimate;
        } else {
            NormOptions nopts;
            nopts.threads = threads;
            pc.ing = tail_ingredients(pc.hp, c.n, c.t, nopts);
        }
        prep.push_back(std::move(pc));
    }

    for (int j = 0; j <= 30; ++j) {
        double L = std::ldexp(1.0, j);
        bool ok = true;
        for (const Prepared& pc : prep) {
            if (!pc.tail) {
                if (!(npow(L, pc.p) * pc.base_sum >= pc.target)) {
                    ok = false;
                    break;
                }
                continue;
            }
            double thr = L * (npow(static_cast<double>(pc.n), static_cast<double>(pc.hp.d()) / 2.0) *
                                  pc.ing.sqrt_second +
                              pc.t);
            double bound = std::min(1.0, L * std::exp(-pc.ing.M / L));
            SampleConfig cfg;
            cfg.n = pc.n;
            cfg.reps = reps;
            cfg.seed = seed;
            cfg.kind = SampleKind::decoupled;
            double freq = mc_tail_counts(pc.hp, cfg, thr, threads).estimate;
            if (!(bound >= freq)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            CalibrationConstants out;
            out.L = std::ldexp(1.0, j);
            return out;
        }
    }
    throw GuardError("calibration did not converge below L = 2^30");
}

}  // namespace ulab
