// Acceptance battery: one criterion per run, selected by argv[1] (1..12).
// Prints a single "criterion N: PASS/FAIL (...)" line with the measured
// quantities and exits 0 on pass, 1 on fail. Oracles here are written from
// scratch so they share nothing with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ulab/bounds.hpp"
#include "ulab/cli.hpp"
#include "ulab/errors.hpp"
#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"
#include "ulab/kernel_io.hpp"
#include "ulab/lilcheck.hpp"
#include "ulab/norms.hpp"
#include "ulab/rng.hpp"
#include "ulab/simulate.hpp"

namespace {

using namespace ulab;

std::string sci(double x) {
    std::ostringstream o;
    o << std::setprecision(3) << std::scientific << x;
    return o.str();
}

Kernel random_kernel(int d, int m, int q, std::uint64_t salt, bool uniform_probs = true) {
    rng::Stream st = rng::Stream::from(881177, rng::kTagCalibration, salt);
    std::uint64_t c = 0;
    std::vector<double> probs(static_cast<std::size_t>(m));
    if (uniform_probs) {
        for (double& p : probs) p = 1.0 / m;
    } else {
        double tot = 0.0;
        for (double& p : probs) {
            p = 0.2 + st.uniform(c++);
            tot += p;
        }
        for (double& p : probs) p /= tot;
    }
    std::size_t cells = 1;
    for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(m);
    std::vector<double> v(cells * static_cast<std::size_t>(q));
    for (double& x : v) x = 2.0 * st.symmetric(c++);
    return Kernel(d, m, q, std::move(v), DiscreteDistribution(std::move(probs)));
}

double max_abs_diff(const Kernel& a, const Kernel& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
    return worst;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- criterion 1: partition combinatorics against a Bell-triangle oracle ----

bool crit1(std::string& detail) {
    // Bell triangle: row k starts with the last entry of row k-1, then each
    // entry adds its left neighbor and the one above it. B_k = first of row k.
    std::vector<std::vector<unsigned long long>> tri{{1}};
    for (int k = 1; k <= 7; ++k) {
        std::vector<unsigned long long> row{tri.back().back()};
        for (unsigned long long above : tri.back()) row.push_back(row.back() + above);
        tri.push_back(std::move(row));
    }
    auto bell = [&](int k) { return tri[static_cast<std::size_t>(k)][0]; };

    unsigned long long binom[8][8] = {};
    for (int i = 0; i < 8; ++i) {
        binom[i][0] = 1;
        for (int j = 1; j <= i; ++j) binom[i][j] = binom[i - 1][j - 1] + (j < i ? binom[i - 1][j] : 0);
    }

    std::ostringstream got;
    for (int d = 1; d <= 6; ++d) {
        CoordSet ground = CoordSet::full(d);
        std::vector<Partition> parts = enumerate_partitions(ground);
        if (parts.size() != bell(d)) {
            detail = "d=" + std::to_string(d) + " partition count " + std::to_string(parts.size()) +
                     " != " + std::to_string(bell(d));
            return false;
        }
        for (const Partition& p : parts) {
            if (!is_valid_partition(p, ground)) {
                detail = "invalid partition emitted at d=" + std::to_string(d);
                return false;
            }
        }
        got << (d > 1 ? "," : "") << parts.size();
    }
    got << "; specs ";
    for (int d = 1; d <= 5; ++d) {
        unsigned long long want = 0;
        for (int j = 0; j <= d; ++j) want += binom[d][j] * bell(d - j);
        std::vector<PartitionSpec> specs = enumerate_partition_specs(d);
        if (specs.size() != want) {
            detail = "d=" + std::to_string(d) + " spec count " + std::to_string(specs.size()) +
                     " != " + std::to_string(want);
            return false;
        }
        for (const PartitionSpec& s : specs) {
            if (!is_valid_spec(s, d)) {
                detail = "invalid spec emitted at d=" + std::to_string(d);
                return false;
            }
        }
        got << (d > 1 ? "," : "") << specs.size();
    }
    detail = "partitions d=1..6 " + got.str();
    return true;
}

// ---- criterion 2: projection algebra on random kernels ----

bool crit2(std::string& detail) {
    double worst_idem = 0.0;
    double worst_lin = 0.0;
    double worst_canon = 0.0;
    for (int s = 0; s < 100; ++s) {
        int d = 1 + s % 4;
        int m = 2 + (s / 4) % 3;
        int q = 1 + (s / 12) % 3;
        Kernel h = random_kernel(d, m, q, static_cast<std::uint64_t>(s), s % 2 == 0);
        Kernel rnd = random_kernel(d, m, q, static_cast<std::uint64_t>(s) + 1000, true);
        Kernel h2(d, m, q, std::vector<double>(rnd.raw()), DiscreteDistribution(h.law().probs()));
        Kernel ph = hoeffding_project(h);
        Kernel ph2 = hoeffding_project(h2);

        worst_idem = std::max(worst_idem, max_abs_diff(hoeffding_project(ph), ph));
        Kernel mix = linear_combination(0.7, h, -1.3, h2);
        Kernel want = linear_combination(0.7, ph, -1.3, ph2);
        worst_lin = std::max(worst_lin, max_abs_diff(hoeffding_project(mix), want));
        CanonicalReport rep = is_canonical(ph, 1e-10);
        worst_canon = std::max(worst_canon, rep.max_violation);
        if (!rep.canonical) {
            detail = "projection not canonical at s=" + std::to_string(s) + ", violation " + sci(rep.max_violation);
            return false;
        }
    }
    detail = "idempotence " + sci(worst_idem) + ", linearity " + sci(worst_lin) + ", canonicality " + sci(worst_canon);
    if (worst_idem > 1e-12 || worst_lin > 1e-12) return false;
    return true;
}

// ---- criterion 3: norm anchors (closed form, SVD oracle, truncated value) ----

// Independent top singular value of diag(sqrt p) h diag(sqrt p), scalar d=2
// kernels only. Deterministic start, long power iteration on B^T B.
double svd_oracle(const Kernel& h) {
    int m = h.m();
    std::vector<double> B(static_cast<std::size_t>(m) * m);
    for (int x = 0; x < m; ++x)
        for (int y = 0; y < m; ++y) {
            std::vector<int> letters{x, y};
            B[static_cast<std::size_t>(x) * m + y] =
                std::sqrt(h.law().p(x)) * h.value(letters, 0) * std::sqrt(h.law().p(y));
        }
    std::vector<double> v(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] = 1.0 + i;
    std::vector<double> bv(static_cast<std::size_t>(m)), w(static_cast<std::size_t>(m));
    for (int it = 0; it < 200000; ++it) {
        for (int x = 0; x < m; ++x) {
            double acc = 0.0;
            for (int y = 0; y < m; ++y) acc += B[static_cast<std::size_t>(x) * m + y] * v[static_cast<std::size_t>(y)];
            bv[static_cast<std::size_t>(x)] = acc;
        }
        for (int y = 0; y < m; ++y) {
            double acc = 0.0;
            for (int x = 0; x < m; ++x) acc += B[static_cast<std::size_t>(x) * m + y] * bv[static_cast<std::size_t>(x)];
            w[static_cast<std::size_t>(y)] = acc;
        }
        double len = 0.0;
        for (double t : w) len += t * t;
        len = std::sqrt(len);
        if (len == 0.0) return 0.0;
        for (int y = 0; y < m; ++y) v[static_cast<std::size_t>(y)] = w[static_cast<std::size_t>(y)] / len;
    }
    double out = 0.0;
    for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int y = 0; y < m; ++y) acc += B[static_cast<std::size_t>(x) * m + y] * v[static_cast<std::size_t>(y)];
        out += acc * acc;
    }
    return std::sqrt(out);
}

bool crit3(std::string& detail) {
    double worst_closed = 0.0;
    for (int s = 0; s < 6; ++s) {
        int d = 1 + s % 3;
        Kernel h = random_kernel(d, 2 + s % 2, 1 + s % 2, 300 + static_cast<std::uint64_t>(s), s % 2 == 0);
        PartitionSpec spec{CoordSet::full(d), Partition{}};
        NormResult r = norm_kj(h, spec);
        worst_closed = std::max(worst_closed, std::abs(r.value - std::sqrt(second_moment(h))));
    }
    if (worst_closed > 1e-12) {
        detail = "full-coordinate norm misses sqrt(E|h|^2) by " + sci(worst_closed);
        return false;
    }

    NormOptions opts;
    opts.rel_tol = 1e-12;
    opts.max_sweeps = 2000;
    PartitionSpec sv = parse_partition_spec("K={} J={{1}{2}}", 2);
    double worst_svd = 0.0;
    for (int s = 0; s < 20; ++s) {
        Kernel h = random_kernel(2, 2 + s % 3, 1, 400 + static_cast<std::uint64_t>(s), s % 2 == 0);
        double solver = norm_kj(h, sv, opts).value;
        double oracle = svd_oracle(h);
        worst_svd = std::max(worst_svd, std::abs(solver - oracle));
    }
    if (worst_svd > 1e-8) {
        detail = "singular-value gap " + sci(worst_svd);
        return false;
    }

    Kernel trunc(1, 2, 1, {-1.0, 3.0}, DiscreteDistribution({0.75, 0.25}));
    PartitionSpec t1 = parse_partition_spec("K={} J={{1}}", 1);
    double solver = norm_kju(trunc, t1, 1.0).value;
    double oracle = bruteforce_norm_oracle(trunc, t1, 1.0, 400, 777);
    detail = "closed-form gap " + sci(worst_closed) + ", svd gap " + sci(worst_svd) + ", truncated solver " +
             sci(solver) + " oracle " + sci(oracle);
    return std::abs(solver - 1.5) <= 1e-6 && std::abs(oracle - 1.5) <= 1e-6;
}

// ---- criterion 4: solver sandwiched by oracle and L2, monotone in the cap ----

bool crit4(std::string& detail) {
    // A handful of these tiny problems are multi-modal enough that the default
    // restart budget can settle below the sampled optimum; buy more starts.
    NormOptions opts;
    opts.random_restarts = 24;
    opts.max_sweeps = 1000;
    opts.rel_tol = 1e-11;
    const double us[4] = {kNoCap, 0.8, 1.5, 2.5};
    double worst_under = 0.0;  // solver minus oracle, most negative
    double worst_over = 0.0;   // solver minus sqrt(E|h|^2), most positive
    int instances = 0;
    for (int d = 1; d <= 3; ++d) {
        std::vector<PartitionSpec> specs = enumerate_partition_specs(d);
        double l2cap = 0.0;
        for (std::size_t si = 0; si < specs.size(); ++si) {
            for (int t = 0; t < 20; ++t) {
                int m = d == 3 ? 2 : 2 + t % 2;
                Kernel h = random_kernel(d, m, 1, 7000 + 100 * static_cast<std::uint64_t>(si) + t, t % 3 != 0);
                double u = us[t % 4];
                double val = norm_kju(h, specs[si], u, opts).value;
                double lo = bruteforce_norm_oracle(h, specs[si], u, 240,
                                                   1000 + static_cast<std::uint64_t>(si) * 31 + t);
                l2cap = std::sqrt(second_moment(h));
                worst_under = std::min(worst_under, val - lo);
                worst_over = std::max(worst_over, val - l2cap);
                ++instances;
                if (val < lo - 1e-9 || val > l2cap + 1e-9) {
                    detail = "d=" + std::to_string(d) + " spec " + to_string(specs[si]) + " t=" + std::to_string(t) +
                             ": value " + sci(val) + " oracle " + sci(lo) + " cap " + sci(l2cap);
                    return false;
                }
            }
        }
    }

    double worst_drop = 0.0;
    double worst_sat = 0.0;
    for (int s = 0; s < 3; ++s) {
        Kernel h = random_kernel(2, 2 + s % 2, 1, 7500 + static_cast<std::uint64_t>(s), s != 1);
        double usat = std::pow(h.law().min_positive(), -1.0);  // p_min^{-d/2}, d = 2
        const double grid[5] = {0.3, 0.7, 1.2, 2.0, std::max(usat, 2.0)};
        for (const PartitionSpec& spec : enumerate_partition_specs(2)) {
            double prev = -1.0;
            for (double u : grid) {
                double val = norm_kju(h, spec, u, opts).value;
                worst_drop = std::max(worst_drop, prev - val);
                if (val < prev - 1e-9) {
                    detail = "norm decreased in u at spec " + to_string(spec) + ": " + sci(prev) + " -> " + sci(val);
                    return false;
                }
                prev = val;
            }
            double sat_gap = std::abs(norm_kju(h, spec, std::max(usat, 2.0), opts).value - norm_kj(h, spec, opts).value);
            worst_sat = std::max(worst_sat, sat_gap);
            if (sat_gap > 1e-8) {
                detail = "saturated cap misses uncapped norm by " + sci(sat_gap) + " at " + to_string(spec);
                return false;
            }
        }
    }
    detail = std::to_string(instances) + " instances, worst oracle slack " + sci(worst_under) +
             ", worst L2 excess " + sci(worst_over) + ", worst u-drop " + sci(worst_drop) + ", saturation gap " +
             sci(worst_sat);
    return true;
}

// ---- criterion 5: replicated-family norm scales by n^{d/2} ----

bool crit5(std::string& detail) {
    NormOptions opts;
    opts.random_restarts = 16;
    opts.rel_tol = 1e-11;
    double worst = 0.0;
    for (int s = 0; s < 2; ++s) {
        Kernel h = random_kernel(2, 2, 1, 650 + static_cast<std::uint64_t>(s), s == 0);
        for (const PartitionSpec& spec : enumerate_partition_specs(2)) {
            double base = norm_kj(h, spec, opts).value;
            for (int n = 2; n <= 4; ++n) {
                double rep = replicated_array_norm(h, spec, n, opts);
                double gap = std::abs(rep - n * base);  // n^{d/2} with d = 2
                worst = std::max(worst, gap);
                if (gap > 1e-6) {
                    detail = "spec " + to_string(spec) + " n=" + std::to_string(n) + ": replicated " + sci(rep) +
                             " vs " + sci(n * base);
                    return false;
                }
            }
        }
    }
    detail = "2 kernels, 5 specs, n=2..4, worst gap " + sci(worst);
    return true;
}

// ---- criterion 6: chaos norm identities and law-scaling ----

bool crit6(std::string& detail) {
    PartitionSpec one = parse_partition_spec("K={1} J={}", 1);
    for (int s = 0; s < 10; ++s) {
        int n = 3 + s % 6;
        rng::Stream st = rng::Stream::from(5150, rng::kTagCalibration, static_cast<std::uint64_t>(s));
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 2.0 * st.symmetric(static_cast<std::uint64_t>(i));
        DenseArray a{1, n, 1, v};
        double ss = 0.0;
        for (int i = 0; i < n; ++i) ss += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        double want = std::sqrt(ss);
        for (double p : {1.0, 3.7}) {
            double got = chaos_star_norm(a, one, p);
            if (got != want) {
                detail = "degree-one norm " + sci(got) + " != vector length " + sci(want) + " at p=" + sci(p);
                return false;
            }
        }
    }

    double worst_hi = 0.0;
    double worst_lo = 0.0;
    for (int s = 0; s < 50; ++s) {
        int d = 1 + s % 2;
        int n = 2 + s % 3;
        rng::Stream st = rng::Stream::from(6160, rng::kTagCalibration, static_cast<std::uint64_t>(s));
        std::size_t total = 1;
        for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(n);
        std::vector<double> v(total);
        for (std::size_t i = 0; i < total; ++i) v[i] = 2.0 * st.symmetric(i);
        DenseArray a{d, n, 1, v};
        std::vector<PartitionSpec> specs = enumerate_partition_specs(d);
        const PartitionSpec& spec = specs[static_cast<std::size_t>(s) % specs.size()];
        double p = 1.0 + 0.5 * (s % 3);
        double t = 1.5 + 0.5 * (s % 4);
        double base = chaos_star_norm(a, spec, p);
        double scaled = chaos_star_norm(a, spec, t * p);
        double cap = std::pow(t, spec.deg()) * base;
        worst_hi = std::max(worst_hi, scaled - cap);
        worst_lo = std::max(worst_lo, base - scaled);
        if (scaled > cap + 1e-8 || scaled < base - 1e-8) {
            detail = "scaling violated at s=" + std::to_string(s) + " spec " + to_string(spec) + ": base " +
                     sci(base) + " scaled " + sci(scaled) + " cap " + sci(cap);
            return false;
        }
    }
    detail = "degree-one identity exact on 10 arrays; scaling slack hi " + sci(worst_hi) + " lo " + sci(worst_lo) +
             " on 50 arrays";
    return true;
}

// ---- criterion 7: exact split of the decoupled grid and the p=2 moment ----

bool crit7(std::string& detail) {
    // Integer-valued kernels with dyadic letter probabilities keep every sum
    // below 2^53, so the grid split must hold to the last bit on every draw.
    struct Shape {
        int d, m, q, n;
    };
    const Shape shapes[3] = {{1, 2, 2, 6}, {2, 4, 1, 5}, {3, 2, 1, 4}};
    int draws = 0;
    for (int sh = 0; sh < 3; ++sh) {
        const Shape& s = shapes[sh];
        rng::Stream st = rng::Stream::from(9290, rng::kTagCalibration, static_cast<std::uint64_t>(sh));
        std::size_t cells = 1;
        for (int k = 0; k < s.d; ++k) cells *= static_cast<std::size_t>(s.m);
        std::vector<double> v(cells * static_cast<std::size_t>(s.q));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::floor(7.0 * st.uniform(i)) - 3.0;
        std::vector<double> probs = s.m == 2 ? std::vector<double>{0.75, 0.25}
                                             : std::vector<double>{0.5, 0.25, 0.125, 0.125};
        Kernel h(s.d, s.m, s.q, std::move(v), DiscreteDistribution(std::move(probs)));
        SampleConfig cfg{s.n, 5, 24681357, SampleKind::decoupled};
        for (int rep = 0; rep < cfg.reps; ++rep) {
            Sample sample = draw_sample(h, cfg, rep);
            std::vector<double> full = ustat_sum(h, cfg, sample);
            std::vector<double> diag = diagonal_sum(h, cfg, sample);
            std::vector<double> off(static_cast<std::size_t>(s.q), 0.0);
            std::vector<int> letters(static_cast<std::size_t>(s.d));
            for_each_index(s.n, s.d, true, [&](const MultiIndex& idx) {
                for (int k = 0; k < s.d; ++k)
                    letters[static_cast<std::size_t>(k)] =
                        sample.columns[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)] - 1)];
                std::span<const double> cell = h.at(letters);
                for (int r = 0; r < s.q; ++r) off[static_cast<std::size_t>(r)] += cell[static_cast<std::size_t>(r)];
            });
            for (int r = 0; r < s.q; ++r) {
                if (full[static_cast<std::size_t>(r)] != off[static_cast<std::size_t>(r)] + diag[static_cast<std::size_t>(r)]) {
                    detail = "split broke at shape " + std::to_string(sh) + " rep " + std::to_string(rep) +
                             " component " + std::to_string(r);
                    return false;
                }
            }
            ++draws;
        }
    }

    double worst = 0.0;
    int checked = 0;
    for (int s = 0; s < 4; ++s) {
        int d = 1 + s % 2;
        int m = 2 + s / 2;
        Kernel h = hoeffding_project(random_kernel(d, m, 1 + s % 2, 930 + static_cast<std::uint64_t>(s), s % 2 == 0));
        double sm = second_moment(h);
        for (int n = 1; enumeration_feasible(h, n, SampleKind::decoupled); ++n) {
            // keep the total enumeration work bounded: m^{nd} configurations
            if (n * d * std::log2(double(m)) > 16.0) break;
            double want = std::pow(double(n), d) * sm;
            double got = exact_moment(h, n, 2, SampleKind::decoupled);
            double gap = std::abs(got - want) / std::max(1.0, std::abs(want));
            worst = std::max(worst, gap);
            ++checked;
            if (gap > 1e-12) {
                detail = "exact second moment off by " + sci(gap) + " at d=" + std::to_string(d) +
                         " n=" + std::to_string(n);
                return false;
            }
        }
    }
    detail = std::to_string(draws) + " draws split exactly; second-moment identity on " + std::to_string(checked) +
             " instances, worst rel gap " + sci(worst);
    return true;
}

// ---- criterion 8: exact-side inequality checks ----

bool crit8(std::string& detail) {
    double worst_dec = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 50; ++s) {
        int d = 1 + s % 2;
        int m = 2 + (s / 2) % 2;
        int n = d == 1 ? 2 + s % 4 : 2 + s % 2;
        int p = s % 2 ? 4 : 2;
        Kernel h = random_kernel(d, m, 1, 8800 + static_cast<std::uint64_t>(s), s % 3 != 0);
        DecouplingComparison dc = decoupling_comparison(h, n, p);
        worst_dec = std::max(worst_dec, dc.lhs - dc.rhs);
        if (dc.lhs > dc.rhs + 1e-12 * std::max(1.0, dc.rhs)) {
            detail = "decoupling comparison failed at s=" + std::to_string(s) + ": lhs " + sci(dc.lhs) + " rhs " +
                     sci(dc.rhs);
            return false;
        }
    }

    double worst_var = -std::numeric_limits<double>::infinity();
    int var_checked = 0;
    for (int s = 0; s < 6; ++s) {
        int d = 1 + s % 2;
        int m = 2 + s % 2;
        Kernel h = random_kernel(d, m, 1, 8900 + static_cast<std::uint64_t>(s), s % 2 == 0);
        for (int n = 1; enumeration_feasible(h, n, SampleKind::decoupled); ++n) {
            if (n * d * std::log2(double(m)) > 16.0) break;
            ExactMoments em = exact_first_two_moments(h, n, SampleKind::decoupled);
            double mean_sq = 0.0;
            for (double mu : em.mean) mean_sq += mu * mu;
            double var = em.second_moment - mean_sq;
            double bound = variance_bound(h, n);
            worst_var = std::max(worst_var, var - bound);
            ++var_checked;
            if (bound < var - 1e-12 * std::max(1.0, var)) {
                detail = "variance bound " + sci(bound) + " below exact " + sci(var) + " at d=" + std::to_string(d) +
                         " n=" + std::to_string(n);
                return false;
            }
        }
    }

    double worst_pz = -std::numeric_limits<double>::infinity();
    int pz_passing = 0;
    for (int s = 0; s < 6; ++s) {
        int d = 1 + s % 2;
        int m = 2 + s % 2;
        rng::Stream st = rng::Stream::from(9900, rng::kTagCalibration, static_cast<std::uint64_t>(s));
        std::size_t cells = 1;
        for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(m);
        std::vector<double> v(cells);
        for (std::size_t i = 0; i < cells; ++i) v[i] = 0.25 + 2.0 * st.uniform(i);
        std::vector<double> probs(static_cast<std::size_t>(m));
        double tot = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            probs[i] = 0.3 + st.uniform(100 + i);
            tot += probs[i];
        }
        for (double& p : probs) p /= tot;
        Kernel h(d, m, 1, std::move(v), DiscreteDistribution(std::move(probs)));
        double mean = partial_expectation(h, CoordSet::full(d)).raw()[0];
        for (int N : {2, 3}) {
            if (!enumeration_feasible(h, N, SampleKind::decoupled)) continue;
            // smallest a passing every conditional-mean hypothesis
            double a = 0.0;
            for (std::uint32_t mask = 0; mask + 1 < (1u << d); ++mask) {
                CoordSet I = CoordSet::from_mask(mask);
                a = std::max(a, conditional_abs_mean_sup(h, I) * std::pow(double(N), I.size()));
            }
            double t = 0.9 * std::pow(double(N), d) * mean / a;
            for (double lambda : {0.3, 0.5, 0.8}) {
                PzResult pz = pz_lower(h, N, a, t, lambda);
                if (!pz.applicable) continue;
                double exact = exact_tail_probability(h, N, SampleKind::decoupled, lambda * t * a);
                worst_pz = std::max(worst_pz, pz.bound - exact);
                ++pz_passing;
                if (pz.bound > exact + 1e-12) {
                    detail = "lower bound " + sci(pz.bound) + " above exact " + sci(exact) + " at s=" +
                             std::to_string(s) + " N=" + std::to_string(N) + " lambda=" + sci(lambda);
                    return false;
                }
            }
        }
    }
    if (pz_passing < 10) {
        detail = "only " + std::to_string(pz_passing) + " hypothesis-passing lower-bound instances";
        return false;
    }
    detail = "decoupling slack " + sci(worst_dec) + " on 50; variance slack " + sci(worst_var) + " on " +
             std::to_string(var_checked) + "; lower-bound slack " + sci(worst_pz) + " on " +
             std::to_string(pz_passing);
    return true;
}

// ---- criterion 9: fitted constants dominate fresh Monte Carlo runs ----

bool crit9(std::string& detail) {
    std::vector<CalibrationCase> cases;
    for (int i = 0; i < 20; ++i) {
        int d = 1 + i % 2;
        int m = 2 + (i / 2) % 2;
        Kernel h = hoeffding_project(random_kernel(d, m, 1, 11000 + static_cast<std::uint64_t>(i), i % 3 != 0));
        int n = 4 + 4 * (i % 4);
        if (i % 5 == 4) {
            cases.push_back({std::move(h), n, 2.0, 0.5 + 0.5 * (i % 3), true});
        } else {
            cases.push_back({std::move(h), n, i % 2 ? 4.0 : 2.0, 0.0, false});
        }
    }
    CalibrationConstants consts = fit_constant_L(cases, 256, 4242, 4);

    double worst_moment = -std::numeric_limits<double>::infinity();  // estimate - half_width - bound
    double worst_tail = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
        int d = 1 + i % 2;
        int m = 2 + (i / 2) % 2;
        int n = 4 + 4 * (i % 4);
        Kernel h = hoeffding_project(random_kernel(d, m, 1, 12000 + static_cast<std::uint64_t>(i), i % 3 != 0));
        SampleConfig cfg{n, 4096, 9090 + static_cast<std::uint64_t>(i), SampleKind::decoupled};

        double p = i % 2 ? 4.0 : 2.0;
        BoundReport br = moment_bound(h, n, p, consts, EnvelopeMode::deterministic);
        SimReport mm = mc_moment(h, cfg, p, 4);
        double slack = mm.entries[0].estimate - mm.entries[0].half_width - br.bound_value;
        worst_moment = std::max(worst_moment, slack);
        if (slack > 0.0) {
            detail = "moment bound " + sci(br.bound_value) + " below MC " + sci(mm.entries[0].estimate) + " +- " +
                     sci(mm.entries[0].half_width) + " at i=" + std::to_string(i) + " (L=" + sci(consts.L) + ")";
            return false;
        }

        TailBound tc = tail_bound_canonical(h, n, 1.0, consts);
        TailBound tp = tail_bound_projected(h, n, 1.0, consts);
        TailEstimate te = mc_tail_counts(h, cfg, tc.threshold, 4);
        double tslack = te.wilson.low - std::min(tc.bound, tp.bound);
        if (tp.threshold != tc.threshold) {
            TailEstimate te2 = mc_tail_counts(h, cfg, tp.threshold, 4);
            tslack = std::max(te.wilson.low - tc.bound, te2.wilson.low - tp.bound);
        }
        worst_tail = std::max(worst_tail, tslack);
        if (tslack > 0.0) {
            detail = "tail bound " + sci(std::min(tc.bound, tp.bound)) + " below Wilson low " + sci(te.wilson.low) +
                     " at i=" + std::to_string(i);
            return false;
        }
    }
    detail = "L=" + sci(consts.L) + ", worst moment slack " + sci(worst_moment) + ", worst tail slack " +
             sci(worst_tail) + " over 20 validation kernels";
    return true;
}

// ---- criterion 10: iterated-logarithm smoke runs ----

bool crit10(std::string& detail) {
    Kernel coin(1, 2, 1, {-1.0, 1.0}, DiscreteDistribution({0.5, 0.5}));
    LilSequence fair = lil_ratio_sequence(coin, SampleKind::undecoupled, 15, 32, 12345, 1);
    if (!(fair.overall_max < 4.0)) {
        detail = "fair-coin ratio peak " + sci(fair.overall_max) + " not below 4";
        return false;
    }

    Kernel constant(1, 1, 1, {1.0}, DiscreteDistribution({1.0}));
    LilSequence diverging = lil_ratio_sequence(constant, SampleKind::decoupled, 10, 16, 12345, 1);
    if (!diverging.divergent) {
        detail = "constant kernel not flagged divergent";
        return false;
    }

    // Diagonal part of the decoupled grid for a product sign kernel: a +-1
    // walk of length n against a grid of n^2 terms, so the (n LL n)-normalized
    // magnitude has to fall as n doubles.
    Kernel sign2(2, 2, 1, {1.0, -1.0, -1.0, 1.0}, DiscreteDistribution({0.5, 0.5}));
    std::vector<double> medians;
    std::ostringstream path;
    for (int k = 2; k <= 8; ++k) {
        int n = 1 << k;
        SampleConfig cfg{n, 64, 3125, SampleKind::decoupled};
        std::vector<double> ratios;
        for (int rep = 0; rep < cfg.reps; ++rep) {
            Sample sample = draw_sample(sign2, cfg, rep);
            double diag = diagonal_sum(sign2, cfg, sample)[0];
            ratios.push_back(std::abs(diag) / (n * ll(double(n))));
        }
        medians.push_back(median_of(ratios));
        path << (k > 2 ? "," : "") << sci(medians.back());
    }
    for (std::size_t i = 1; i < medians.size(); ++i) {
        if (medians[i] > medians[i - 1]) {
            detail = "diagonal medians rose between levels: " + path.str();
            return false;
        }
    }
    detail = "fair-coin peak " + sci(fair.overall_max) + "; constant kernel divergent; diagonal medians " + path.str();
    return true;
}

// ---- criterion 11: certificate coherence ----

bool crit11(std::string& detail) {
    std::vector<double> grid{0.5, 1.0, 2.0};
    CalibrationConstants consts;
    NormOptions nopts;
    nopts.rel_tol = 1e-11;

    double worst_perm = 0.0;
    double worst_scale = 0.0;
    for (int s = 0; s < 3; ++s) {
        int m = 2 + s % 2;
        Kernel raw = random_kernel(2, m, 1, 13000 + static_cast<std::uint64_t>(s), s != 1);
        Kernel sym = hoeffding_project(
            linear_combination(0.5, raw, 0.5, permute_coordinates(raw, {2, 1})));
        LilCertificate cert = lil_certificate(sym, grid, consts, {}, nopts);
        if (!cert.canonical.canonical) {
            detail = "projected kernel not reported canonical at s=" + std::to_string(s);
            return false;
        }
        if (!cert.symmetric) {
            detail = "symmetrized kernel not reported symmetric at s=" + std::to_string(s);
            return false;
        }
        LilCertificate permd = lil_certificate(permute_coordinates(sym, {2, 1}), grid, consts, {}, nopts);
        worst_perm = std::max(worst_perm, std::abs(cert.d_star - permd.d_star));
        if (std::abs(cert.d_star - permd.d_star) > 1e-9) {
            detail = "coordinate swap moved the growth maximum by " + sci(cert.d_star - permd.d_star);
            return false;
        }
        LilCertificate doubled = lil_certificate(scale(sym, 2.0), grid, consts, {}, nopts);
        for (std::size_t c = 0; c < cert.growth_curves.size(); ++c) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                double gap = std::abs(doubled.growth_curves[c].points[j].norm -
                                      2.0 * cert.growth_curves[c].points[j].norm);
                worst_scale = std::max(worst_scale, gap);
                if (gap > 1e-9) {
                    detail = "doubling the kernel missed doubling the norm by " + sci(gap) + " at spec " +
                             to_string(cert.growth_curves[c].spec) + " u=" + sci(grid[j]);
                    return false;
                }
            }
        }
    }

    // Asymmetric pair: relabeling coordinates permutes the spec family, so the
    // overall growth maximum still has to agree. Three letters, because every
    // canonical two-letter d=2 kernel is symmetric.
    Kernel asym = hoeffding_project(random_kernel(2, 3, 1, 13100, false));
    LilCertificate ca = lil_certificate(asym, grid, consts, {}, nopts);
    LilCertificate cb = lil_certificate(permute_coordinates(asym, {2, 1}), grid, consts, {}, nopts);
    double asym_gap = std::abs(ca.d_star - cb.d_star);
    if (asym_gap > 1e-6) {
        detail = "asymmetric-pair growth maxima differ by " + sci(asym_gap);
        return false;
    }
    detail = "3 symmetric kernels: swap gap " + sci(worst_perm) + ", doubling gap " + sci(worst_scale) +
             "; asymmetric-pair gap " + sci(asym_gap);
    return true;
}

// ---- criterion 12: byte-identical CLI output across thread counts ----

bool crit12(std::string& detail) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ulab_acceptance12";
    fs::create_directories(dir);
    std::string k1 = (dir / "canonical.kern").string();
    std::string kpos = (dir / "positive.kern").string();
    save_kernel(hoeffding_project(Kernel(2, 2, 1, {0.5, -1.25, 2.0, 0.75}, DiscreteDistribution({0.4, 0.6}))), k1);
    save_kernel(Kernel(2, 2, 1, {0.5, 1.5, 2.5, 0.75}, DiscreteDistribution({0.5, 0.5})), kpos);

    std::vector<std::vector<std::string>> commands = {
        {"project", "--kernel", k1},
        {"norms", "--kernel", k1, "--spec", "K={1 2} J={}"},
        {"norms", "--kernel", k1, "--u", "1.5"},
        {"norms", "--kernel", k1, "--format", "text-summary"},
        {"simulate", "--kernel", k1, "--op", "sum", "--kind", "decoupled", "--n", "3", "--reps", "8"},
        {"simulate", "--kernel", k1, "--op", "moment", "--kind", "decoupled", "--n", "3", "--p", "2", "--reps", "64"},
        {"simulate", "--kernel", k1, "--op", "tail", "--kind", "undecoupled", "--n", "4", "--t", "1", "--reps", "64"},
        {"simulate", "--kernel", k1, "--op", "lil", "--kind", "undecoupled", "--nmax", "6", "--reps", "8"},
        {"bounds", "--kernel", k1, "--op", "moment", "--mode", "stochastic", "--n", "3", "--verify"},
        {"bounds", "--kernel", k1, "--op", "tail", "--t", "0.5", "--n", "3", "--verify"},
        {"bounds", "--kernel", k1, "--op", "variance", "--n", "3", "--verify"},
        {"bounds", "--kernel", kpos, "--op", "pz", "--n", "3", "--a", "9", "--t", "1", "--verify"},
        {"bounds", "--kernel", k1, "--op", "decoupling", "--n", "2"},
        {"lil-check", "--kernel", k1, "--u-grid", "1,2,4", "--sim", "--nmax", "5", "--reps", "8"},
        {"selftest"},
    };
    const int threads[4] = {1, 1, 2, 8};
    for (std::size_t ci = 0; ci < commands.size(); ++ci) {
        std::string reference;
        int ref_rc = -1;
        for (int ti = 0; ti < 4; ++ti) {
            std::string out = (dir / ("out_" + std::to_string(ci) + "_" + std::to_string(ti) + ".txt")).string();
            std::vector<std::string> args = commands[ci];
            args.push_back("--threads");
            args.push_back(std::to_string(threads[ti]));
            args.push_back("--out");
            args.push_back(out);
            int rc = run_cli(args);
            std::string bytes = slurp(out);
            if (ti == 0) {
                reference = bytes;
                ref_rc = rc;
                if (bytes.empty()) {
                    detail = "command `" + commands[ci][0] + "` produced no output";
                    return false;
                }
            } else if (rc != ref_rc || bytes != reference) {
                detail = "command `" + commands[ci][0] + "` differs at threads=" + std::to_string(threads[ti]) +
                         (rc != ref_rc ? " (exit code)" : " (bytes)");
                return false;
            }
        }
    }
    detail = std::to_string(commands.size()) + " commands byte-stable across threads {1,1,2,8}";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: ulab_acceptance <criterion 1..12>\n";
        return 2;
    }
    int crit = std::atoi(argv[1]);
    bool ok = false;
    std::string detail;
    try {
        switch (crit) {
            case 1: ok = crit1(detail); break;
            case 2: ok = crit2(detail); break;
            case 3: ok = crit3(detail); break;
            case 4: ok = crit4(detail); break;
            case 5: ok = crit5(detail); break;
            case 6: ok = crit6(detail); break;
            case 7: ok = crit7(detail); break;
            case 8: ok = crit8(detail); break;
            case 9: ok = crit9(detail); break;
            case 10: ok = crit10(detail); break;
            case 11: ok = crit11(detail); break;
            case 12: ok = crit12(detail); break;
            default:
                std::cerr << "usage: ulab_acceptance <criterion 1..12>\n";
                return 2;
        }
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("unexpected exception: ") + e.what();
    }
    std::cout << "criterion " << crit << ": " << (ok ? "PASS" : "FAIL") << " (" << detail << ")\n";
    return ok ? 0 : 1;
}
