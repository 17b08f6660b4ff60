#include "ulab/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "ulab/errors.hpp"

namespace ulab {

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InputError("probs: alphabet must have at least one letter");
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) throw InputError("probs: entries must be finite and nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("probs: entries must sum to 1 within 1e-12");
    cdf_.resize(probs_.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        cum += probs_[i];
        cdf_[i] = cum;
    }
    cdf_.back() = 1.0;
}

double DiscreteDistribution::min_positive() const {
    double best = 1.0;
    for (double p : probs_)
        if (p > 0.0) best = std::min(best, p);
    return best;
}

int DiscreteDistribution::sample(double uniform01) const {
    // first letter whose cdf exceeds the uniform
    for (std::size_t i = 0; i + 1 < cdf_.size(); ++i)
        if (uniform01 < cdf_[i]) return static_cast<int>(i);
    return static_cast<int>(cdf_.size() - 1);
}

namespace {

std::size_t checked_cells(int d, int m) {
    std::size_t c = 1;
    for (int k = 0; k < d; ++k) {
        if (c > (static_cast<std::size_t>(1) << 40) / static_cast<std::size_t>(m))
            throw GuardError("Kernel: m^d exceeds the dense-storage cap");
        c *= static_cast<std::size_t>(m);
    }
    return c;
}

void decode_cell(std::size_t flat, int d, int m, int* letters) {
    for (int k = d - 1; k >= 0; --k) {
        letters[k] = static_cast<int>(flat % static_cast<std::size_t>(m));
        flat /= static_cast<std::size_t>(m);
    }
}

}  // namespace

Kernel::Kernel(int d, int m, int q, std::vector<double> values, DiscreteDistribution law,
               std::optional<bool> declared_symmetric)
    : d_(d), m_(m), q_(q), cells_(0), values_(std::move(values)), law_(std::move(law)),
      declared_symmetric_(declared_symmetric) {
    if (d_ < 0) throw InputError("d: order must be >= 0");
    if (m_ < 1) throw InputError("m: alphabet size must be >= 1");
    if (q_ < 1) throw InputError("q: value dimension must be >= 1");
    if (law_.size() != m_) throw InputError("probs: length must equal the alphabet size m");
    cells_ = checked_cells(d_, m_);
    if (values_.size() != cells_ * static_cast<std::size_t>(q_))
        throw InputError("values: expected m^d*q = " + std::to_string(cells_ * static_cast<std::size_t>(q_)) +
                         " entries, got " + std::to_string(values_.size()));
    for (double v : values_)
        if (!std::isfinite(v)) throw InputError("values: entries must be finite");
    if (declared_symmetric_.value_or(false) && !is_symmetric(1e-12))
        throw InputError("symmetric: declared but the tensor is not permutation-symmetric");
}

std::size_t Kernel::flat_cell(std::span<const int> letters) const {
    std::size_t flat = 0;
    for (int k = 0; k < d_; ++k) flat = flat * static_cast<std::size_t>(m_) + static_cast<std::size_t>(letters[static_cast<std::size_t>(k)]);
    return flat;
}

double Kernel::cell_prob(std::size_t flat) const {
    double w = 1.0;
    for (int k = 0; k < d_; ++k) {
        w *= law_.p(static_cast<int>(flat % static_cast<std::size_t>(m_)));
        flat /= static_cast<std::size_t>(m_);
    }
    return w;
}

bool Kernel::is_symmetric(double tol) const {
    if (d_ <= 1) return true;
    std::vector<int> perm(static_cast<std::size_t>(d_));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> letters(static_cast<std::size_t>(d_));
    std::vector<int> permuted(static_cast<std::size_t>(d_));
    do {
        for (std::size_t flat = 0; flat < cells_; ++flat) {
            decode_cell(flat, d_, m_, letters.data());
            for (int k = 0; k < d_; ++k) permuted[static_cast<std::size_t>(k)] = letters[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
            std::size_t other = flat_cell(permuted);
            for (int r = 0; r < q_; ++r)
                if (std::abs(values_[flat * static_cast<std::size_t>(q_) + static_cast<std::size_t>(r)] -
                             values_[other * static_cast<std::size_t>(q_) + static_cast<std::size_t>(r)]) > tol)
                    return false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return true;
}

void CalibrationConstants::validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw InputError("constants: L must be a positive real");
    if (!(c > 0.0) || !std::isfinite(c)) throw InputError("constants: c must be a positive real");
    if (!(eta > 0.0 && eta < 1.0)) throw InputError("constants: eta must lie in (0,1)");
}

namespace {

// contraction of one coordinate (given by its position in the current order)
// of a dense table against the law
std::vector<double> contract_position(const std::vector<double>& values, int d, int m, int q,
                                      const DiscreteDistribution& law, int pos) {
    std::size_t inner = 1;  // cells to the right of pos
    for (int k = pos + 1; k < d; ++k) inner *= static_cast<std::size_t>(m);
    std::size_t outer = 1;  // cells to the left of pos
    for (int k = 0; k < pos; ++k) outer *= static_cast<std::size_t>(m);
    std::vector<double> out(outer * inner * static_cast<std::size_t>(q), 0.0);
    for (std::size_t o = 0; o < outer; ++o)
        for (int letter = 0; letter < m; ++letter) {
            double w = law.p(letter);
            if (w == 0.0) continue;
            std::size_t src = (o * static_cast<std::size_t>(m) + static_cast<std::size_t>(letter)) * inner;
            std::size_t dst = o * inner;
            for (std::size_t i = 0; i < inner; ++i)
                for (int r = 0; r < q; ++r)
                    out[(dst + i) * static_cast<std::size_t>(q) + static_cast<std::size_t>(r)] +=
                        w * values[(src + i) * static_cast<std::size_t>(q) + static_cast<std::size_t>(r)];
        }
    return out;
}

}  // namespace

Kernel partial_expectation(const Kernel& h, const CoordSet& I) {
    for (int label : I.members())
        if (label > h.d()) throw InputError("partial_expectation: coordinate " + std::to_string(label) +
                                            " exceeds the kernel order " + std::to_string(h.d()));
    std::vector<double> values = h.raw();
    int d = h.d();
    // integrate highest label first so the positions of the remaining ones stay valid
    const auto& labels = I.members();
    for (auto it = labels.rbegin(); it != labels.rend(); ++it) {
        values = contract_position(values, d, h.m(), h.q(), h.law(), *it - 1);
        --d;
    }
    return Kernel(d, h.m(), h.q(), std::move(values), h.law());
}

Kernel hoeffding_project(const Kernel& h) {
    const int d = h.d();
    const int m = h.m();
    const int q = h.q();
    if (d == 0) return Kernel(0, m, q, std::vector<double>(static_cast<std::size_t>(q), 0.0), h.law());
    const std::uint32_t full = (1u << d) - 1u;

    // partials[mask] = E_{mask} h as a dense table over the coordinates not in
    // mask (ascending); each entry is one single-coordinate contraction of its
    // parent, so the 2^d tables share all intermediate work
    std::vector<std::vector<double>> partials(static_cast<std::size_t>(full) + 1);
    partials[0] = h.raw();
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        int j = 0;
        while (!(mask & (1u << j))) ++j;  // lowest integrated label (bit j <-> label j+1)
        std::uint32_t parent = mask & (mask - 1);
        // position of label j+1 among the coordinates remaining in the parent
        int pos = 0;
        for (int b = 0; b < j; ++b)
            if (!(parent & (1u << b))) ++pos;
        int parent_order = d - static_cast<int>(std::popcount(parent));
        partials[mask] = contract_position(partials[parent], parent_order, m, q, h.law(), pos);
    }

    // pi_d h(x) = sum over subsets I of (-1)^(d-#I) (E_{I^c} h)(x_I)
    std::vector<double> out(h.cells() * static_cast<std::size_t>(q), 0.0);
    std::vector<int> letters(static_cast<std::size_t>(d));
    for (std::uint32_t imask = 0; imask <= full; ++imask) {
        double sign = ((d - std::popcount(imask)) % 2 == 0) ? 1.0 : -1.0;
        const std::vector<double>& table = partials[full & ~imask];
        for (std::size_t flat = 0; flat < h.cells(); ++flat) {
            decode_cell(flat, d, m, letters.data());
            std::size_t sub = 0;
            for (int k = 0; k < d; ++k)
                if (imask & (1u << k)) sub = sub * static_cast<std::size_t>(m) + static_cast<std::size_t>(letters[static_cast<std::size_t>(k)]);
            for (int r = 0; r < q; ++r)
                out[flat * static_cast<std::size_t>(q) + static_cast<std::size_t>(r)] +=
                    sign * table[sub * static_cast<std::size_t>(q) + static_cast<std::size_t>(r)];
        }
    }
    return Kernel(d, m, q, std::move(out), h.law(), h.declared_symmetric());
}

CanonicalReport is_canonical(const Kernel& h, double tol) {
    if (tol < 0.0) throw InputError("tol: must be nonnegative");
    CanonicalReport report;
    report.canonical = true;
    if (h.d() == 0) return report;
    for (int j = 1; j <= h.d(); ++j) {
        Kernel ej = partial_expectation(h, CoordSet({j}));
        for (std::size_t flat = 0; flat < ej.cells(); ++flat) {
            if (ej.cell_prob(flat) == 0.0) continue;  // probability-zero argument
            double norm2 = 0.0;
            for (double v : ej.cell(flat)) norm2 += v * v;
            double violation = std::sqrt(norm2);
            if (violation > report.max_violation) {
                report.max_violation = violation;
                report.worst_coordinate = j;
            }
        }
    }
    report.canonical = report.max_violation <= tol;
    return report;
}

double ll(double x) {
    if (x < 0.0) throw InputError("ll: argument must be nonnegative");
    const double floor_arg = std::exp(std::exp(1.0));
    return std::log(std::log(std::max(x, floor_arg)));
}

double second_moment(const Kernel& h) {
    double total = 0.0;
    for (std::size_t flat = 0; flat < h.cells(); ++flat) {
        double w = h.cell_prob(flat);
        if (w == 0.0) continue;
        double n2 = 0.0;
        for (double v : h.cell(flat)) n2 += v * v;
        total += w * n2;
    }
    return total;
}

double ll_weighted_second_moment(const Kernel& h) {
    double total = 0.0;
    for (std::size_t flat = 0; flat < h.cells(); ++flat) {
        double w = h.cell_prob(flat);
        if (w == 0.0) continue;
        double n2 = 0.0;
        for (double v : h.cell(flat)) n2 += v * v;
        if (n2 == 0.0) continue;
        total += w * n2 / std::pow(ll(std::sqrt(n2)), h.d());
    }
    return total;
}

double truncated_second_moment(const Kernel& h, double u) {
    if (!(u > 0.0)) throw InputError("u: truncation level must be positive");
    double total = 0.0;
    for (std::size_t flat = 0; flat < h.cells(); ++flat) {
        double w = h.cell_prob(flat);
        if (w == 0.0) continue;
        double n2 = 0.0;
        for (double v : h.cell(flat)) n2 += v * v;
        total += w * std::min(n2, u);
    }
    return total;
}

double conditional_sup_norm(const Kernel& h, const CoordSet& I) {
    Kernel g = partial_expectation(squared_norm_kernel(h), I);
    double best = 0.0;
    for (std::size_t flat = 0; flat < g.cells(); ++flat) {
        if (g.cell_prob(flat) == 0.0) continue;
        best = std::max(best, g.cell(flat)[0]);
    }
    return std::sqrt(std::max(0.0, best));
}

double conditional_abs_mean_sup(const Kernel& h, const CoordSet& I) {
    if (h.q() != 1) throw InputError("conditional_abs_mean_sup: kernel must be scalar (q = 1)");
    Kernel g = partial_expectation(h, I);
    double best = 0.0;
    for (std::size_t flat = 0; flat < g.cells(); ++flat) {
        if (g.cell_prob(flat) == 0.0) continue;
        best = std::max(best, std::abs(g.cell(flat)[0]));
    }
    return best;
}

namespace {

void require_same_shape(const Kernel& x, const Kernel& y, const char* who) {
    if (x.d() != y.d() || x.m() != y.m() || x.q() != y.q() || x.law().probs() != y.law().probs())
        throw InputError(std::string(who) + ": kernels must share d, m, q and law");
}

}  // namespace

Kernel scale(const Kernel& h, double alpha) {
    std::vector<double> v = h.raw();
    for (double& x : v) x *= alpha;
    return Kernel(h.d(), h.m(), h.q(), std::move(v), h.law(), h.declared_symmetric());
}

Kernel linear_combination(double a, const Kernel& x, double b, const Kernel& y) {
    require_same_shape(x, y, "linear_combination");
    std::vector<double> v(x.raw().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x.raw()[i] + b * y.raw()[i];
    return Kernel(x.d(), x.m(), x.q(), std::move(v), x.law());
}

Kernel permute_coordinates(const Kernel& h, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != h.d()) throw InputError("permute_coordinates: permutation length must equal d");
    std::vector<bool> seen(static_cast<std::size_t>(h.d()), false);
    for (int label : perm) {
        if (label < 1 || label > h.d() || seen[static_cast<std::size_t>(label - 1)])
            throw InputError("permute_coordinates: not a permutation of {1..d}");
        seen[static_cast<std::size_t>(label - 1)] = true;
    }
    std::vector<double> out(h.raw().size());
    std::vector<int> letters(static_cast<std::size_t>(h.d()));
    std::vector<int> src(static_cast<std::size_t>(h.d()));
    for (std::size_t flat = 0; flat < h.cells(); ++flat) {
        decode_cell(flat, h.d(), h.m(), letters.data());
        for (int k = 0; k < h.d(); ++k)
            src[static_cast<std::size_t>(k)] = letters[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)] - 1)];
        std::span<const double> from = h.at(src);
        for (int r = 0; r < h.q(); ++r)
            out[flat * static_cast<std::size_t>(h.q()) + static_cast<std::size_t>(r)] = from[static_cast<std::size_t>(r)];
    }
    return Kernel(h.d(), h.m(), h.q(), std::move(out), h.law());
}

Kernel squared_norm_kernel(const Kernel& h) {
    std::vector<double> out(h.cells());
    for (std::size_t flat = 0; flat < h.cells(); ++flat) {
        double n2 = 0.0;
        for (double v : h.cell(flat)) n2 += v * v;
        out[flat] = n2;
    }
    return Kernel(h.d(), h.m(), 1, std::move(out), h.law());
}

}  // namespace ulab
