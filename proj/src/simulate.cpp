#include "ulab/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>

#include "ulab/errors.hpp"
#include "ulab/indexing.hpp"
#include "ulab/parallel.hpp"
#include "ulab/rng.hpp"

namespace ulab {
namespace {

constexpr double kZ95 = 1.959963984540054;

int sample_columns(SampleKind kind, int d) { return is_decoupled(kind) ? d : 1; }

int sign_columns(SampleKind kind, int d) {
    if (!is_randomized(kind)) return 0;
    return kind == SampleKind::randomized_decoupled ? d : 1;
}

void check_draws(const Kernel& h, const SampleConfig& cfg, const Sample& sample, const SignTable* signs) {
    if (cfg.n < 1) throw InputError("sample size must be at least 1");
    int want = sample_columns(cfg.kind, h.d());
    if (static_cast<int>(sample.columns.size()) != want)
        throw InputError("sample has the wrong number of columns for this kind");
    for (const auto& col : sample.columns)
        if (static_cast<int>(col.size()) < cfg.n) throw InputError("sample column shorter than n");
    int wsign = sign_columns(cfg.kind, h.d());
    if (wsign == 0) return;
    if (signs == nullptr) throw InputError("randomized kind needs a sign table");
    if (static_cast<int>(signs->columns.size()) != wsign)
        throw InputError("sign table has the wrong number of columns for this kind");
    for (const auto& col : signs->columns)
        if (static_cast<int>(col.size()) < cfg.n) throw InputError("sign column shorter than n");
}

// Adds sign * h(cell of the tuple) to acc. Tuple coordinates are 1-based.
void accumulate_term(const Kernel& h, const Sample& sample, const SignTable* signs, SampleKind kind,
                     const MultiIndex& idx, std::vector<int>& letters, std::vector<double>& acc) {
    int d = h.d();
    double sgn = 1.0;
    if (is_decoupled(kind)) {
        for (int k = 0; k < d; ++k)
            letters[static_cast<std::size_t>(k)] =
                sample.columns[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] - 1)];
        if (kind == SampleKind::randomized_decoupled)
            for (int k = 0; k < d; ++k)
                sgn *= signs->columns[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] - 1)];
    } else {
        for (int k = 0; k < d; ++k)
            letters[static_cast<std::size_t>(k)] =
                sample.columns[0][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] - 1)];
        if (kind == SampleKind::randomized_undecoupled)
            for (int k = 0; k < d; ++k)
                sgn *= signs->columns[0][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] - 1)];
    }
    std::span<const double> v = h.at(letters);
    for (int r = 0; r < h.q(); ++r) acc[static_cast<std::size_t>(r)] += sgn * v[static_cast<std::size_t>(r)];
}

std::vector<double> grid_sum(const Kernel& h, const SampleConfig& cfg, const Sample& sample,
                             const SignTable* signs, bool offdiag_only) {
    std::vector<double> acc(static_cast<std::size_t>(h.q()), 0.0);
    if (offdiag_only && cfg.n < h.d()) return acc;
    std::vector<int> letters(static_cast<std::size_t>(h.d()));
    IndexStream stream(cfg.n, h.d(), offdiag_only);
    MultiIndex idx;
    while (stream.next(idx)) accumulate_term(h, sample, signs, cfg.kind, idx, letters, acc);
    return acc;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

bool is_decoupled(SampleKind kind) {
    return kind == SampleKind::decoupled || kind == SampleKind::randomized_decoupled;
}

bool is_randomized(SampleKind kind) {
    return kind == SampleKind::randomized_undecoupled || kind == SampleKind::randomized_decoupled;
}

const char* to_string(SampleKind kind) {
    switch (kind) {
        case SampleKind::undecoupled: return "undecoupled";
        case SampleKind::decoupled: return "decoupled";
        case SampleKind::randomized_undecoupled: return "randomized_undecoupled";
        case SampleKind::randomized_decoupled: return "randomized_decoupled";
    }
    return "unknown";
}

Sample draw_sample(const Kernel& h, const SampleConfig& cfg, int rep) {
    if (cfg.n < 1) throw InputError("sample size must be at least 1");
    Sample s;
    int cols = sample_columns(cfg.kind, h.d());
    s.columns.resize(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) {
        rng::Stream stream = rng::Stream::from(cfg.seed, rng::kTagSample, static_cast<std::uint64_t>(rep),
                                               static_cast<std::uint64_t>(c));
        auto& col = s.columns[static_cast<std::size_t>(c)];
        col.resize(static_cast<std::size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i)
            col[static_cast<std::size_t>(i)] = h.law().sample(stream.uniform(static_cast<std::uint64_t>(i)));
    }
    return s;
}

SignTable draw_signs(const SampleConfig& cfg, int d, int rep) {
    SignTable t;
    int cols = sign_columns(cfg.kind, d);
    t.columns.resize(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) {
        rng::Stream stream = rng::Stream::from(cfg.seed, rng::kTagSign, static_cast<std::uint64_t>(rep),
                                               static_cast<std::uint64_t>(c));
        auto& col = t.columns[static_cast<std::size_t>(c)];
        col.resize(static_cast<std::size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i) col[static_cast<std::size_t>(i)] = stream.sign(static_cast<std::uint64_t>(i));
    }
    return t;
}

std::vector<double> ustat_sum(const Kernel& h, const SampleConfig& cfg, const Sample& sample,
                              const SignTable* signs) {
    check_draws(h, cfg, sample, signs);
    return grid_sum(h, cfg, sample, signs, /*offdiag_only=*/!is_decoupled(cfg.kind));
}

std::vector<double> diagonal_sum(const Kernel& h, const SampleConfig& cfg, const Sample& sample) {
    if (!is_decoupled(cfg.kind)) throw InputError("diagonal_sum needs a decoupled kind");
    check_draws(h, cfg, sample, nullptr);
    std::vector<double> full = grid_sum(h, cfg, sample, nullptr, false);
    std::vector<double> off = grid_sum(h, cfg, sample, nullptr, true);
    for (std::size_t r = 0; r < full.size(); ++r) full[r] -= off[r];
    return full;
}

bool enumeration_feasible(const Kernel& h, int n, SampleKind kind) {
    if (n < 1) return false;
    int cols = sample_columns(kind, h.d());
    int nletters = n * cols;
    int nsigns = is_randomized(kind) ? n * sign_columns(kind, h.d()) : 0;
    double bits = static_cast<double>(nletters) * std::log2(static_cast<double>(h.m())) + static_cast<double>(nsigns);
    return bits <= 24.0 + 1e-9;
}

void enumerate_statistic(const Kernel& h, int n, SampleKind kind,
                         const std::function<void(const std::vector<double>&, double)>& fn) {
    if (n < 1) throw InputError("sample size must be at least 1");
    if (!enumeration_feasible(h, n, kind)) throw GuardError("enumeration would exceed 2^24 configurations");
    int cols = sample_columns(kind, h.d());
    int nletters = n * cols;
    int nsigns = is_randomized(kind) ? n * sign_columns(kind, h.d()) : 0;

    SampleConfig cfg;
    cfg.n = n;
    cfg.kind = kind;
    Sample sample;
    sample.columns.assign(static_cast<std::size_t>(cols), std::vector<int>(static_cast<std::size_t>(n), 0));
    std::vector<int> letters(static_cast<std::size_t>(nletters), 0);

    auto letter_prob = [&]() {
        double w = 1.0;
        for (int l : letters) w *= h.law().p(l);
        return w;
    };
    auto fill_sample = [&]() {
        for (int c = 0; c < cols; ++c)
            for (int i = 0; i < n; ++i)
                sample.columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
                    letters[static_cast<std::size_t>(c * n + i)];
    };

    std::uint64_t npatterns = is_randomized(kind) ? (std::uint64_t{1} << nsigns) : 1;
    int scols = sign_columns(kind, h.d());
    SignTable signs;
    signs.columns.assign(static_cast<std::size_t>(scols), std::vector<int>(static_cast<std::size_t>(n), 1));

    for (;;) {
        double w = letter_prob();
        if (w > 0.0) {
            fill_sample();
            if (is_randomized(kind)) {
                double ws = w / static_cast<double>(npatterns);
                for (std::uint64_t pattern = 0; pattern < npatterns; ++pattern) {
                    for (int b = 0; b < nsigns; ++b)
                        signs.columns[static_cast<std::size_t>(b / n)][static_cast<std::size_t>(b % n)] =
                            (pattern >> b) & 1u ? -1 : 1;
                    fn(ustat_sum(h, cfg, sample, &signs), ws);
                }
            } else {
                fn(ustat_sum(h, cfg, sample, nullptr), w);
            }
        }
        // odometer over letters, base m
        int pos = nletters - 1;
        while (pos >= 0) {
            if (++letters[static_cast<std::size_t>(pos)] < h.m()) break;
            letters[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

double exact_moment(const Kernel& h, int n, int p, SampleKind kind) {
    if (p != 2 && p != 4) throw InputError("exact_moment expects p = 2 or p = 4");
    double acc = 0.0;
    enumerate_statistic(h, n, kind, [&](const std::vector<double>& S, double w) {
        double s2 = 0.0;
        for (double x : S) s2 += x * x;
        acc += w * (p == 2 ? s2 : s2 * s2);
    });
    return acc;
}

double exact_tail_probability(const Kernel& h, int n, SampleKind kind, double t) {
    if (t < 0.0) throw InputError("threshold must be nonnegative");
    double acc = 0.0;
    enumerate_statistic(h, n, kind, [&](const std::vector<double>& S, double w) {
        if (norm2(S) >= t) acc += w;
    });
    return acc;
}

ExactMoments exact_first_two_moments(const Kernel& h, int n, SampleKind kind) {
    ExactMoments out;
    out.mean.assign(static_cast<std::size_t>(h.q()), 0.0);
    enumerate_statistic(h, n, kind, [&](const std::vector<double>& S, double w) {
        for (std::size_t r = 0; r < S.size(); ++r) out.mean[r] += w * S[r];
        double s2 = 0.0;
        for (double x : S) s2 += x * x;
        out.second_moment += w * s2;
    });
    return out;
}

namespace {

std::vector<double> per_rep_statistic(const Kernel& h, const SampleConfig& cfg, int threads,
                                      const std::function<double(const std::vector<double>&)>& stat) {
    std::vector<double> slots(static_cast<std::size_t>(cfg.reps), 0.0);
    parallel_for(cfg.reps, threads, [&](int rep) {
        Sample sample = draw_sample(h, cfg, rep);
        std::vector<double> S;
        if (is_randomized(cfg.kind)) {
            SignTable signs = draw_signs(cfg, h.d(), rep);
            S = ustat_sum(h, cfg, sample, &signs);
        } else {
            S = ustat_sum(h, cfg, sample, nullptr);
        }
        slots[static_cast<std::size_t>(rep)] = stat(S);
    });
    return slots;
}

}  // namespace

SimReport mc_moment(const Kernel& h, const SampleConfig& cfg, double p, int threads) {
    if (cfg.reps < 1) throw InputError("reps must be at least 1");
    if (!(p >= 1.0)) throw InputError("p must be at least 1");
    std::vector<double> slots =
        per_rep_statistic(h, cfg, threads, [&](const std::vector<double>& S) { return std::pow(norm2(S), p); });
    double mean = 0.0;
    for (double v : slots) mean += v;
    mean /= static_cast<double>(cfg.reps);
    double hw = 0.0;
    if (cfg.reps > 1) {
        double ss = 0.0;
        for (double v : slots) ss += (v - mean) * (v - mean);
        double var = ss / static_cast<double>(cfg.reps - 1);
        hw = kZ95 * std::sqrt(var / static_cast<double>(cfg.reps));
    }
    SimReport rep;
    rep.entries.push_back({"moment", mean, hw});
    rep.reps_used = cfg.reps;
    rep.seed = cfg.seed;
    return rep;
}

Interval wilson95(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) throw InputError("wilson interval needs at least one trial");
    if (successes > trials) throw InputError("successes exceed trials");
    double nt = static_cast<double>(trials);
    double phat = static_cast<double>(successes) / nt;
    double z2 = kZ95 * kZ95;
    double denom = 1.0 + z2 / nt;
    double center = (phat + z2 / (2.0 * nt)) / denom;
    double half = kZ95 * std::sqrt(phat * (1.0 - phat) / nt + z2 / (4.0 * nt * nt)) / denom;
    Interval out;
    // the algebraic endpoints at 0 or n successes are exactly 0 and 1; don't
    // let cancellation in center - half leak a few ulp past them
    out.low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    out.high = successes == trials ? 1.0 : std::min(1.0, center + half);
    return out;
}

TailEstimate mc_tail_counts(const Kernel& h, const SampleConfig& cfg, double t, int threads) {
    if (cfg.reps < 1) throw InputError("reps must be at least 1");
    if (t < 0.0) throw InputError("threshold must be nonnegative");
    std::vector<double> slots =
        per_rep_statistic(h, cfg, threads, [&](const std::vector<double>& S) { return norm2(S) >= t ? 1.0 : 0.0; });
    TailEstimate est;
    est.reps = cfg.reps;
    for (double v : slots) est.successes += (v != 0.0) ? 1u : 0u;
    est.estimate = static_cast<double>(est.successes) / static_cast<double>(cfg.reps);
    est.wilson = wilson95(est.successes, static_cast<std::uint64_t>(cfg.reps));
    return est;
}

SimReport mc_tail(const Kernel& h, const SampleConfig& cfg, double t, int threads) {
    TailEstimate est = mc_tail_counts(h, cfg, t, threads);
    SimReport rep;
    rep.entries.push_back({"tail", est.estimate, 0.5 * (est.wilson.high - est.wilson.low)});
    rep.reps_used = cfg.reps;
    rep.seed = cfg.seed;
    return rep;
}

namespace {

// One replication's growing draw. Letters and signs are appended lazily from
// the per-(rep, column) streams, so the state at size n is a prefix of the
// state at any larger size.
struct PathState {
    std::vector<std::vector<int>> letters;
    std::vector<std::vector<int>> signs;
    std::vector<double> sum;
    int n = 0;
};

void append_draws(const Kernel& h, SampleKind kind, PathState& st, std::uint64_t seed, int rep, int target) {
    int cols = sample_columns(kind, h.d());
    int scols = sign_columns(kind, h.d());
    st.letters.resize(static_cast<std::size_t>(cols));
    st.signs.resize(static_cast<std::size_t>(scols));
    for (int c = 0; c < cols; ++c) {
        rng::Stream stream = rng::Stream::from(seed, rng::kTagSample, static_cast<std::uint64_t>(rep),
                                               static_cast<std::uint64_t>(c));
        auto& col = st.letters[static_cast<std::size_t>(c)];
        for (int i = static_cast<int>(col.size()); i < target; ++i)
            col.push_back(h.law().sample(stream.uniform(static_cast<std::uint64_t>(i))));
    }
    for (int c = 0; c < scols; ++c) {
        rng::Stream stream = rng::Stream::from(seed, rng::kTagSign, static_cast<std::uint64_t>(rep),
                                               static_cast<std::uint64_t>(c));
        auto& col = st.signs[static_cast<std::size_t>(c)];
        for (int i = static_cast<int>(col.size()); i < target; ++i)
            col.push_back(stream.sign(static_cast<std::uint64_t>(i)));
    }
}

// Adds every term whose largest index equals nnew (1-based) to st.sum.
void add_shell(const Kernel& h, SampleKind kind, PathState& st, int nnew) {
    int d = h.d();
    int j = nnew - 1;  // 0-based new index
    std::vector<int> letters(static_cast<std::size_t>(d));
    std::vector<int> coords(static_cast<std::size_t>(d));
    auto add_tuple = [&]() {
        double sgn = 1.0;
        if (is_decoupled(kind)) {
            for (int k = 0; k < d; ++k)
                letters[static_cast<std::size_t>(k)] =
                    st.letters[static_cast<std::size_t>(k)][static_cast<std::size_t>(coords[static_cast<std::size_t>(k)])];
            if (kind == SampleKind::randomized_decoupled)
                for (int k = 0; k < d; ++k)
                    sgn *= st.signs[static_cast<std::size_t>(k)][static_cast<std::size_t>(coords[static_cast<std::size_t>(k)])];
        } else {
            for (int k = 0; k < d; ++k)
                letters[static_cast<std::size_t>(k)] =
                    st.letters[0][static_cast<std::size_t>(coords[static_cast<std::size_t>(k)])];
            if (kind == SampleKind::randomized_undecoupled)
                for (int k = 0; k < d; ++k)
                    sgn *= st.signs[0][static_cast<std::size_t>(coords[static_cast<std::size_t>(k)])];
        }
        std::span<const double> v = h.at(letters);
        for (int r = 0; r < h.q(); ++r) st.sum[static_cast<std::size_t>(r)] += sgn * v[static_cast<std::size_t>(r)];
    };

    if (!is_decoupled(kind)) {
        // Injective tuples containing j hold it at exactly one position; the
        // remaining d-1 coordinates are an injective tuple over {0..j-1}.
        if (d == 1) {
            coords[0] = j;
            add_tuple();
            return;
        }
        if (j < d - 1) return;  // not enough smaller indices
        MultiIndex rest;
        for (int p = 0; p < d; ++p) {
            IndexStream stream(j, d - 1, true);
            while (stream.next(rest)) {
                int at = 0;
                for (int k = 0; k < d; ++k) {
                    if (k == p)
                        coords[static_cast<std::size_t>(k)] = j;
                    else
                        coords[static_cast<std::size_t>(k)] = rest[static_cast<std::size_t>(at++)] - 1;
                }
                add_tuple();
            }
        }
        return;
    }

    // Grid tuples with max = j: partition by the exact set of positions equal
    // to j; the rest ranges over the full grid {0..j-1}^free.
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
        int nfree = d - std::popcount(mask);
        if (nfree == 0) {
            for (int k = 0; k < d; ++k) coords[static_cast<std::size_t>(k)] = j;
            add_tuple();
            continue;
        }
        if (j == 0) continue;  // no smaller index available
        MultiIndex rest;
        IndexStream stream(j, nfree, false);
        while (stream.next(rest)) {
            int at = 0;
            for (int k = 0; k < d; ++k) {
                if (mask & (1u << k))
                    coords[static_cast<std::size_t>(k)] = j;
                else
                    coords[static_cast<std::size_t>(k)] = rest[static_cast<std::size_t>(at++)] - 1;
            }
            add_tuple();
        }
    }
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LilSequence lil_ratio_sequence(const Kernel& h, SampleKind kind, int n_max_exp, int reps,
                               std::uint64_t seed, int threads) {
    if (n_max_exp < 1 || n_max_exp > 20) throw GuardError("dyadic exponent cap must be in 1..20");
    if (reps < 1) throw InputError("reps must be at least 1");
    int levels = n_max_exp;
    std::vector<std::vector<double>> ratio(static_cast<std::size_t>(reps),
                                           std::vector<double>(static_cast<std::size_t>(levels), 0.0));
    parallel_for(reps, threads, [&](int rep) {
        PathState st;
        st.sum.assign(static_cast<std::size_t>(h.q()), 0.0);
        int n = 0;
        for (int k = 1; k <= levels; ++k) {
            int target = 1 << k;
            append_draws(h, kind, st, seed, rep, target);
            while (n < target) {
                ++n;
                add_shell(h, kind, st, n);
            }
            double s = norm2(st.sum);
            double denom = std::pow(static_cast<double>(target) * ll(static_cast<double>(target)),
                                    static_cast<double>(h.d()) / 2.0);
            ratio[static_cast<std::size_t>(rep)][static_cast<std::size_t>(k - 1)] = s / denom;
        }
    });

    LilSequence out;
    std::vector<double> column(static_cast<std::size_t>(reps));
    std::vector<double> medians(static_cast<std::size_t>(levels));
    for (int k = 1; k <= levels; ++k) {
        for (int rep = 0; rep < reps; ++rep)
            column[static_cast<std::size_t>(rep)] = ratio[static_cast<std::size_t>(rep)][static_cast<std::size_t>(k - 1)];
        LilLevel lvl;
        lvl.k = k;
        lvl.n = std::uint64_t{1} << k;
        lvl.median_ratio = median_of(column);
        lvl.max_ratio = *std::max_element(column.begin(), column.end());
        out.overall_max = std::max(out.overall_max, lvl.max_ratio);
        medians[static_cast<std::size_t>(k - 1)] = lvl.median_ratio;
        out.levels.push_back(lvl);
    }

    int window = std::min(6, levels);
    bool increasing = window >= 2;
    for (int k = levels - window + 1; k < levels; ++k)
        if (!(medians[static_cast<std::size_t>(k)] > medians[static_cast<std::size_t>(k - 1)])) increasing = false;
    double middle = medians[static_cast<std::size_t>(levels / 2)];
    out.divergent = increasing && medians.back() >= 2.0 * middle;
    return out;
}

}  // namespace ulab
