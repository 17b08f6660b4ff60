#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulab/indexing.hpp"

namespace ulab {

class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<double> probs);  // nonnegative, sums to 1 within 1e-12
    int size() const { return static_cast<int>(probs_.size()); }
    double p(int letter) const { return probs_[static_cast<std::size_t>(letter)]; }
    const std::vector<double>& probs() const { return probs_; }
    double min_positive() const;
    int sample(double uniform01) const;  // inverse CDF

private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

// A kernel h: Sigma^d -> R^q on the alphabet Sigma = {0..m-1}, stored densely
// (row-major over (x_1..x_d), then the value coordinate) together with the
// i.i.d. sampling law of each argument. Immutable after construction.
// Order 0 is allowed: it is what integrating out every coordinate produces.
class Kernel {
public:
    Kernel(int d, int m, int q, std::vector<double> values, DiscreteDistribution law,
           std::optional<bool> declared_symmetric = std::nullopt);

    int d() const { return d_; }
    int m() const { return m_; }
    int q() const { return q_; }
    const DiscreteDistribution& law() const { return law_; }
    const std::vector<double>& raw() const { return values_; }
    std::optional<bool> declared_symmetric() const { return declared_symmetric_; }

    std::size_t cells() const { return cells_; }  // m^d
    std::size_t flat_cell(std::span<const int> letters) const;
    std::span<const double> cell(std::size_t flat) const {
        return {values_.data() + flat * static_cast<std::size_t>(q_), static_cast<std::size_t>(q_)};
    }
    std::span<const double> at(std::span<const int> letters) const { return cell(flat_cell(letters)); }
    double value(std::span<const int> letters, int r) const { return at(letters)[static_cast<std::size_t>(r)]; }

    // product of letter probabilities of one cell
    double cell_prob(std::size_t flat) const;

    bool is_symmetric(double tol = 1e-12) const;  // checks every coordinate permutation

private:
    int d_, m_, q_;
    std::size_t cells_;
    std::vector<double> values_;
    DiscreteDistribution law_;
    std::optional<bool> declared_symmetric_;
};

// User-supplied stand-ins for the otherwise unspecified constants appearing in
// the bounds; defaults are the identity-like choices. Reports always echo them.
struct CalibrationConstants {
    double L = 1.0;    // multiplicative constant in moment/tail bounds
    double c = 1.0;    // scale relating the simulated envelope to the growth verdict
    double eta = 0.5;  // reserved threshold parameter, in (0,1)
    void validate() const;
};

// E_I h: contraction of the coordinates in I against the law. The result keeps
// the remaining coordinates in ascending order; |I| = d yields an order-0 kernel.
Kernel partial_expectation(const Kernel& h, const CoordSet& I);

// pi_d h = sum over I subset of {1..d} of (-1)^(d-|I|) (E_{I^c} h)(x_I),
// the expansion of (delta_{x_1} - P) x ... x (delta_{x_d} - P) h.
// Output has every one-coordinate conditional mean equal to zero.
Kernel hoeffding_project(const Kernel& h);

struct CanonicalReport {
    bool canonical = false;
    double max_violation = 0.0;
    int worst_coordinate = 0;  // 1-based; 0 when d == 0
};
// Largest |E_j h| over coordinates j and fixed arguments with positive
// probability, compared against tol.
CanonicalReport is_canonical(const Kernel& h, double tol = 1e-10);

// guarded iterated logarithm: loglog(max(x, e^e)), always >= 1
double ll(double x);

double second_moment(const Kernel& h);              // E |h(X)|^2
double ll_weighted_second_moment(const Kernel& h);  // E |h|^2 / (LL |h|)^d
double truncated_second_moment(const Kernel& h, double u);  // E (|h|^2 ^ u), u > 0

// max over fixed outer arguments (positive-probability cells only) of
// sqrt(E_I |h(x_{I^c}, X_I)|^2); I = {1..d} gives sqrt(E|h|^2), I = {} the sup norm.
double conditional_sup_norm(const Kernel& h, const CoordSet& I);

// max over outer arguments of |E_I h| (used by the lower-bound hypothesis checks; q = 1)
double conditional_abs_mean_sup(const Kernel& h, const CoordSet& I);

Kernel scale(const Kernel& h, double alpha);
Kernel linear_combination(double a, const Kernel& x, double b, const Kernel& y);
// hp(x_1..x_d) = h(x_{perm[1]}, .., x_{perm[d]}); perm holds 1-based labels
Kernel permute_coordinates(const Kernel& h, const std::vector<int>& perm);
// pointwise squared length |h(x)|^2 as a scalar kernel (q = 1)
Kernel squared_norm_kernel(const Kernel& h);

}  // namespace ulab
