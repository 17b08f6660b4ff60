#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "ulab/errors.hpp"
#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"
#include "ulab/simulate.hpp"

using namespace ulab;

namespace {

Kernel coin() { return Kernel(1, 2, 1, {-1.0, 1.0}, DiscreteDistribution({0.5, 0.5})); }

Kernel int_kernel_2d() { return Kernel(2, 2, 1, {1.0, -2.0, -2.0, 3.0}, DiscreteDistribution({0.5, 0.5})); }

SampleConfig config(int n, int reps, SampleKind kind, std::uint64_t seed = 12345) {
    SampleConfig cfg;
    cfg.n = n;
    cfg.reps = reps;
    cfg.seed = seed;
    cfg.kind = kind;
    return cfg;
}

}  // namespace

TEST_CASE("larger draws extend smaller ones") {
    Kernel h = int_kernel_2d();
    SampleConfig small = config(4, 1, SampleKind::decoupled);
    SampleConfig big = config(9, 1, SampleKind::decoupled);
    Sample a = draw_sample(h, small, 3);
    Sample b = draw_sample(h, big, 3);
    REQUIRE(a.columns.size() == 2);
    REQUIRE(b.columns.size() == 2);
    for (std::size_t col = 0; col < 2; ++col) {
        for (std::size_t i = 0; i < 4; ++i) CHECK(a.columns[col][i] == b.columns[col][i]);
    }
    Sample c = draw_sample(h, small, 4);
    bool identical = true;
    for (std::size_t col = 0; col < 2; ++col)
        for (std::size_t i = 0; i < 4; ++i) identical = identical && a.columns[col][i] == c.columns[col][i];
    CHECK(!identical);
}

TEST_CASE("undecoupled sum enumerates injective pairs") {
    Kernel h = int_kernel_2d();
    SampleConfig cfg = config(3, 1, SampleKind::undecoupled);
    Sample s = draw_sample(h, cfg, 0);
    REQUIRE(s.columns.size() == 1);
    const std::vector<int>& x = s.columns[0];
    double want = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            std::vector<int> letters{x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]};
            want += h.value(letters, 0);
        }
    }
    CHECK(ustat_sum(h, cfg, s)[0] == want);
}

TEST_CASE("undecoupled sum with n < d is empty") {
    Kernel h = int_kernel_2d();
    SampleConfig cfg = config(1, 1, SampleKind::undecoupled);
    Sample s = draw_sample(h, cfg, 0);
    CHECK(ustat_sum(h, cfg, s)[0] == 0.0);
}

TEST_CASE("randomized undecoupled sum carries one shared sign column") {
    Kernel h = int_kernel_2d();
    SampleConfig cfg = config(3, 1, SampleKind::randomized_undecoupled);
    Sample s = draw_sample(h, cfg, 2);
    SignTable signs = draw_signs(cfg, h.d(), 2);
    REQUIRE(signs.columns.size() == 1);
    const std::vector<int>& x = s.columns[0];
    const std::vector<int>& e = signs.columns[0];
    double want = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            std::vector<int> letters{x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]};
            want += e[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(j)] * h.value(letters, 0);
        }
    }
    CHECK(ustat_sum(h, cfg, s, &signs)[0] == want);
}

TEST_CASE("diagonal plus off-diagonal recovers the full grid sum exactly") {
    Kernel h = int_kernel_2d();  // integer values keep every sum exact
    SampleConfig cfg = config(5, 1, SampleKind::decoupled);
    for (int rep = 0; rep < 6; ++rep) {
        Sample s = draw_sample(h, cfg, rep);
        double full = ustat_sum(h, cfg, s)[0];
        double diag = diagonal_sum(h, cfg, s)[0];
        double offdiag = 0.0;
        for_each_index(5, 2, true, [&](const MultiIndex& idx) {
            std::vector<int> letters{s.columns[0][static_cast<std::size_t>(idx[0] - 1)],
                                     s.columns[1][static_cast<std::size_t>(idx[1] - 1)]};
            offdiag += h.value(letters, 0);
        });
        CHECK(offdiag + diag == full);
    }
}

TEST_CASE("exact second moment of the decoupled sum of a canonical kernel") {
    Kernel h = hoeffding_project(Kernel(2, 2, 1, {0.5, -1.25, 2.0, 0.75}, DiscreteDistribution({0.4, 0.6})));
    int n = 3;
    double got = exact_moment(h, n, 2, SampleKind::decoupled);
    double want = std::pow(static_cast<double>(n), 2.0) * second_moment(h);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("signs make the second-moment identity hold without projection") {
    Kernel h(2, 2, 1, {0.5, -1.25, 2.0, 0.75}, DiscreteDistribution({0.4, 0.6}));
    int n = 2;
    double got = exact_moment(h, n, 2, SampleKind::randomized_decoupled);
    double want = std::pow(static_cast<double>(n), 2.0) * second_moment(h);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    Kernel g(1, 3, 1, {1.0, -2.0, 0.5}, DiscreteDistribution({0.2, 0.3, 0.5}));
    double got1 = exact_moment(g, 4, 2, SampleKind::randomized_undecoupled);
    CHECK(got1 == doctest::Approx(4.0 * second_moment(g)).epsilon(1e-12));
}

TEST_CASE("exact tail probabilities on the fair coin") {
    Kernel h = coin();
    CHECK(exact_tail_probability(h, 1, SampleKind::undecoupled, 0.5) == doctest::Approx(1.0));
    CHECK(exact_tail_probability(h, 1, SampleKind::undecoupled, 1.5) == doctest::Approx(0.0));
    CHECK(exact_tail_probability(h, 2, SampleKind::undecoupled, 2.0) == doctest::Approx(0.5));
    CHECK(exact_tail_probability(h, 2, SampleKind::undecoupled, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("deterministic kernels give exact Monte Carlo answers") {
    Kernel h(1, 1, 1, {2.0}, DiscreteDistribution({1.0}));
    SampleConfig cfg = config(3, 16, SampleKind::undecoupled);
    SimReport mom = mc_moment(h, cfg, 2.0);
    REQUIRE(mom.entries.size() == 1);
    CHECK(mom.entries[0].estimate == doctest::Approx(36.0));
    CHECK(mom.entries[0].half_width == 0.0);

    SimReport tail_hit = mc_tail(h, cfg, 5.0);
    CHECK(tail_hit.entries[0].estimate == doctest::Approx(1.0));
    SimReport tail_miss = mc_tail(h, cfg, 7.0);
    CHECK(tail_miss.entries[0].estimate == doctest::Approx(0.0));
}

TEST_CASE("monte carlo results do not depend on the thread count") {
    Kernel h = int_kernel_2d();
    SampleConfig cfg = config(4, 64, SampleKind::randomized_decoupled);
    SimReport a = mc_moment(h, cfg, 3.0, 1);
    SimReport b = mc_moment(h, cfg, 3.0, 4);
    CHECK(a.entries[0].estimate == b.entries[0].estimate);
    CHECK(a.entries[0].half_width == b.entries[0].half_width);
    SimReport ta = mc_tail(h, cfg, 2.0, 1);
    SimReport tb = mc_tail(h, cfg, 2.0, 4);
    CHECK(ta.entries[0].estimate == tb.entries[0].estimate);
}

TEST_CASE("enumeration guard") {
    Kernel h(1, 16, 1, std::vector<double>(16, 1.0), DiscreteDistribution(std::vector<double>(16, 1.0 / 16)));
    CHECK(enumeration_feasible(h, 6, SampleKind::undecoupled));
    CHECK(!enumeration_feasible(h, 7, SampleKind::undecoupled));
    CHECK_THROWS_AS(exact_moment(h, 7, 2, SampleKind::undecoupled), GuardError);
}

TEST_CASE("wilson interval endpoints and midpoint") {
    Interval none = wilson95(0, 50);
    CHECK(none.low == 0.0);
    CHECK(none.high > 0.0);
    CHECK(none.high < 0.15);
    Interval all = wilson95(50, 50);
    CHECK(all.high == 1.0);
    CHECK(all.low > 0.85);
    Interval mid = wilson95(50, 100);
    CHECK(mid.low < 0.5);
    CHECK(mid.high > 0.5);
    CHECK(mid.high - mid.low < 0.25);
}

TEST_CASE("lil ratio sequence shape and guards") {
    Kernel h = coin();
    LilSequence seq = lil_ratio_sequence(h, SampleKind::undecoupled, 5, 8, 99);
    REQUIRE(seq.levels.size() == 5);
    for (int k = 1; k <= 5; ++k) {
        CHECK(seq.levels[static_cast<std::size_t>(k - 1)].k == k);
        CHECK(seq.levels[static_cast<std::size_t>(k - 1)].n == (std::uint64_t{1} << k));
        CHECK(seq.levels[static_cast<std::size_t>(k - 1)].max_ratio >=
              seq.levels[static_cast<std::size_t>(k - 1)].median_ratio);
        CHECK(seq.overall_max >= seq.levels[static_cast<std::size_t>(k - 1)].max_ratio);
    }
    CHECK_THROWS_AS(lil_ratio_sequence(h, SampleKind::undecoupled, 21, 4, 1), GuardError);
    CHECK_THROWS_AS(lil_ratio_sequence(h, SampleKind::undecoupled, 4, 0, 1), InputError);
}

TEST_CASE("a non-centered kernel is flagged divergent") {
    Kernel h(1, 1, 1, {1.0}, DiscreteDistribution({1.0}));
    LilSequence seq = lil_ratio_sequence(h, SampleKind::decoupled, 10, 4, 7);
    CHECK(seq.divergent);
}

TEST_CASE("lil paths are thread-count invariant") {
    Kernel h = int_kernel_2d();
    LilSequence a = lil_ratio_sequence(h, SampleKind::decoupled, 5, 6, 3, 1);
    LilSequence b = lil_ratio_sequence(h, SampleKind::decoupled, 5, 6, 3, 3);
    for (std::size_t k = 0; k < a.levels.size(); ++k) {
        CHECK(a.levels[k].median_ratio == b.levels[k].median_ratio);
        CHECK(a.levels[k].max_ratio == b.levels[k].max_ratio);
    }
}
