#include <cmath>
#include <vector>

#include "doctest.h"
#include "ulab/errors.hpp"
#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"

using namespace ulab;

namespace {

Kernel uniform_kernel(int d, int m, std::vector<double> values) {
    std::vector<double> p(static_cast<std::size_t>(m), 1.0 / m);
    return Kernel(d, m, 1, std::move(values), DiscreteDistribution(std::move(p)));
}

}  // namespace

TEST_CASE("discrete distribution validates and inverts its cdf") {
    CHECK_THROWS_AS(DiscreteDistribution({0.5, 0.6}), InputError);
    CHECK_THROWS_AS(DiscreteDistribution({-0.1, 1.1}), InputError);
    CHECK_THROWS_AS(DiscreteDistribution({}), InputError);

    DiscreteDistribution p({0.5, 0.25, 0.25});
    CHECK(p.size() == 3);
    CHECK(p.min_positive() == 0.25);
    CHECK(p.sample(0.0) == 0);
    CHECK(p.sample(0.49) == 0);
    CHECK(p.sample(0.51) == 1);
    CHECK(p.sample(0.76) == 2);
    CHECK(p.sample(0.999) == 2);

    DiscreteDistribution q({1.0, 0.0});
    CHECK(q.min_positive() == 1.0);
}

TEST_CASE("kernel layout puts the last coordinate fastest") {
    Kernel h = uniform_kernel(2, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8});
    std::vector<int> letters{1, 2};
    CHECK(h.flat_cell(letters) == 5);
    CHECK(h.value(letters, 0) == 5);
    CHECK(h.cells() == 9);
    CHECK_THROWS_AS(uniform_kernel(2, 2, {1, 2, 3}), InputError);
}

TEST_CASE("partial expectation contracts the named coordinates") {
    Kernel h = uniform_kernel(2, 2, {1, 2, 3, 5});

    Kernel e2 = partial_expectation(h, CoordSet({2}));
    REQUIRE(e2.d() == 1);
    CHECK(e2.raw() == std::vector<double>{1.5, 4.0});

    Kernel e1 = partial_expectation(h, CoordSet({1}));
    REQUIRE(e1.d() == 1);
    CHECK(e1.raw() == std::vector<double>{2.0, 3.5});

    Kernel e12 = partial_expectation(h, CoordSet({1, 2}));
    REQUIRE(e12.d() == 0);
    REQUIRE(e12.cells() == 1);
    CHECK(e12.raw() == std::vector<double>{2.75});
}

TEST_CASE("hoeffding projection matches the inclusion-exclusion expansion by hand") {
    Kernel h = uniform_kernel(2, 2, {1, 2, 3, 5});
    Kernel ph = hoeffding_project(h);
    REQUIRE(ph.raw().size() == 4);
    CHECK(ph.raw()[0] == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(ph.raw()[1] == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(ph.raw()[2] == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(ph.raw()[3] == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(is_canonical(ph).canonical);
}

TEST_CASE("projection is idempotent and linear") {
    Kernel x = uniform_kernel(2, 3, {1, -2, 0.5, 4, 2, -1, 0, 3, -3});
    Kernel y = uniform_kernel(2, 3, {0.25, 1, -1, 2, -0.5, 0.75, 1.5, -2, 0});

    Kernel px = hoeffding_project(x);
    Kernel ppx = hoeffding_project(px);
    for (std::size_t i = 0; i < px.raw().size(); ++i) {
        CHECK(std::abs(px.raw()[i] - ppx.raw()[i]) <= 1e-12);
    }

    Kernel lhs = hoeffding_project(linear_combination(2.0, x, -3.0, y));
    Kernel rhs = linear_combination(2.0, hoeffding_project(x), -3.0, hoeffding_project(y));
    for (std::size_t i = 0; i < lhs.raw().size(); ++i) {
        CHECK(std::abs(lhs.raw()[i] - rhs.raw()[i]) <= 1e-12);
    }
}

TEST_CASE("canonicality report names the worst coordinate") {
    Kernel h = uniform_kernel(2, 2, {1, 1, -1, -1});  // depends on x only
    CanonicalReport rep = is_canonical(h);
    CHECK(!rep.canonical);
    CHECK(rep.worst_coordinate == 2);
    CHECK(rep.max_violation == doctest::Approx(1.0));

    Kernel zero = uniform_kernel(2, 2, {0, 0, 0, 0});
    CHECK(is_canonical(zero).canonical);
}

TEST_CASE("guarded iterated logarithm") {
    CHECK(ll(0.0) == 1.0);
    CHECK(ll(1.0) == 1.0);
    CHECK(ll(std::exp(std::exp(1.0))) == doctest::Approx(1.0));
    CHECK(ll(std::exp(std::exp(2.0))) == doctest::Approx(2.0));
    CHECK(ll(1e300) > ll(1e10));
}

TEST_CASE("moment helpers on hand examples") {
    Kernel h(1, 2, 1, {-1.0, 3.0}, DiscreteDistribution({0.75, 0.25}));
    CHECK(second_moment(h) == doctest::Approx(3.0));
    CHECK(truncated_second_moment(h, 1.0) == doctest::Approx(1.0));
    CHECK(truncated_second_moment(h, 4.0) == doctest::Approx(1.75));
    CHECK(truncated_second_moment(h, 100.0) == doctest::Approx(3.0));

    std::vector<double> vq{1, 2, 3, 4};
    Kernel hv(1, 2, 2, vq, DiscreteDistribution({0.5, 0.5}));
    CHECK(second_moment(hv) == doctest::Approx(15.0));
    Kernel sq = squared_norm_kernel(hv);
    REQUIRE(sq.q() == 1);
    CHECK(sq.raw() == std::vector<double>{5.0, 25.0});
}

TEST_CASE("conditional norms on a hand example") {
    Kernel h = uniform_kernel(2, 2, {1, 2, 3, 5});
    CHECK(conditional_sup_norm(h, CoordSet()) == doctest::Approx(5.0));
    CHECK(conditional_sup_norm(h, CoordSet({1, 2})) == doctest::Approx(std::sqrt(9.75)));
    CHECK(conditional_sup_norm(h, CoordSet({2})) == doctest::Approx(std::sqrt(17.0)));
    CHECK(conditional_abs_mean_sup(h, CoordSet({1})) == doctest::Approx(3.5));
    CHECK(conditional_abs_mean_sup(h, CoordSet({2})) == doctest::Approx(4.0));
}

TEST_CASE("zero-probability cells never reach the sup") {
    Kernel h(1, 2, 1, {2.0, 100.0}, DiscreteDistribution({1.0, 0.0}));
    CHECK(conditional_sup_norm(h, CoordSet()) == doctest::Approx(2.0));
    CHECK(second_moment(h) == doctest::Approx(4.0));
}

TEST_CASE("coordinate permutation and symmetry detection") {
    Kernel h = uniform_kernel(2, 2, {1, 2, 3, 5});
    Kernel ht = permute_coordinates(h, {2, 1});
    CHECK(ht.raw() == std::vector<double>{1, 3, 2, 5});
    CHECK(!h.is_symmetric());

    Kernel sym = linear_combination(0.5, h, 0.5, ht);
    CHECK(sym.is_symmetric());
    CHECK(permute_coordinates(sym, {2, 1}).raw() == sym.raw());

    CHECK_THROWS_AS(permute_coordinates(h, {1, 1}), InputError);
}

TEST_CASE("scaling and mismatched combinations") {
    Kernel h = uniform_kernel(1, 2, {1, -2});
    CHECK(scale(h, -0.5).raw() == std::vector<double>{-0.5, 1.0});
    Kernel other = uniform_kernel(1, 3, {1, 2, 3});
    CHECK_THROWS_AS(linear_combination(1.0, h, 1.0, other), InputError);
}

TEST_CASE("calibration constants validate their ranges") {
    CalibrationConstants good;
    good.validate();
    CalibrationConstants bad_l;
    bad_l.L = 0.0;
    CHECK_THROWS_AS(bad_l.validate(), InputError);
    CalibrationConstants bad_eta;
    bad_eta.eta = 1.0;
    CHECK_THROWS_AS(bad_eta.validate(), InputError);
}
