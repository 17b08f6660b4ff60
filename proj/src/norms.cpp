#include "ulab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>

#include "ulab/errors.hpp"
#include "ulab/parallel.hpp"
#include "ulab/rng.hpp"

namespace ulab {
namespace {

// One multilinear factor of the objective. `idx` maps a joint cell to this
// factor's table cell; `cidx` maps it to the cell formed by the remaining
// coordinates (used only for the spectral warm start).
struct Factor {
    std::vector<int> coords;  // 0-based coordinate positions, ascending
    int cells = 1;
    int ccells = 1;
    int vdim = 1;
    std::vector<std::uint32_t> idx;
    std::vector<std::uint32_t> cidx;
    std::vector<double> w;      // per-cell L2 weight; 0 marks a dead cell
    double cap = kNoCap;        // per-cell magnitude cap (unused when sliced)
    double radius2 = 1.0;       // sum_y w_y |t_y|^2 <= radius2
    std::vector<int> slice_of;  // nonempty: per-cell slice id, slice L2 <= 1
    int nslices = 0;
};

// objective = sum_x weight(x) * <values(x), t_0(idx_0 x)> * prod_{b>=1} t_b(idx_b x)
// when contract_values, else all factors scalar and values has one entry per cell.
struct Problem {
    int d = 0;
    int base = 0;  // letters per coordinate
    std::size_t joint = 0;
    std::vector<double> weight;
    const double* values = nullptr;
    int qv = 1;
    bool contract_values = false;
    std::vector<Factor> factors;
};

std::size_t pow_size(int base, int exp) {
    std::size_t r = 1;
    for (int k = 0; k < exp; ++k) r *= static_cast<std::size_t>(base);
    return r;
}

void fill_factor_maps(Problem& pr) {
    std::vector<int> digits(static_cast<std::size_t>(pr.d));
    for (Factor& f : pr.factors) {
        f.cells = static_cast<int>(pow_size(pr.base, static_cast<int>(f.coords.size())));
        f.ccells = static_cast<int>(pr.joint / static_cast<std::size_t>(f.cells));
        f.idx.resize(pr.joint);
        f.cidx.resize(pr.joint);
    }
    for (std::size_t x = 0; x < pr.joint; ++x) {
        std::size_t rest = x;
        for (int k = pr.d - 1; k >= 0; --k) {
            digits[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(pr.base));
            rest /= static_cast<std::size_t>(pr.base);
        }
        for (Factor& f : pr.factors) {
            std::size_t cell = 0;
            std::size_t ccell = 0;
            auto it = f.coords.begin();
            for (int k = 0; k < pr.d; ++k) {
                if (it != f.coords.end() && *it == k) {
                    cell = cell * static_cast<std::size_t>(pr.base) + static_cast<std::size_t>(digits[static_cast<std::size_t>(k)]);
                    ++it;
                } else {
                    ccell = ccell * static_cast<std::size_t>(pr.base) + static_cast<std::size_t>(digits[static_cast<std::size_t>(k)]);
                }
            }
            f.idx[x] = static_cast<std::uint32_t>(cell);
            f.cidx[x] = static_cast<std::uint32_t>(ccell);
        }
    }
}

std::vector<int> zero_based(const CoordSet& s) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(s.size()));
    for (int label : s.members()) out.push_back(label - 1);
    return out;
}

// Per-cell probability mass of a coordinate block under the product law.
std::vector<double> block_cell_probs(const DiscreteDistribution& law, int ncoords) {
    std::size_t cells = pow_size(law.size(), ncoords);
    std::vector<double> w(cells);
    for (std::size_t y = 0; y < cells; ++y) {
        double p = 1.0;
        std::size_t rest = y;
        for (int k = 0; k < ncoords; ++k) {
            p *= law.p(static_cast<int>(rest % static_cast<std::size_t>(law.size())));
            rest /= static_cast<std::size_t>(law.size());
        }
        w[y] = p;
    }
    return w;
}

Problem build_kernel_problem(const Kernel& h, const PartitionSpec& spec, double u) {
    if (!is_valid_spec(spec, h.d())) throw InputError("partition spec does not partition {1..d}");
    if (!(u > 0.0)) throw InputError("u must be positive");
    Problem pr;
    pr.d = h.d();
    pr.base = h.m();
    pr.joint = h.cells();
    pr.values = h.raw().data();
    pr.qv = h.q();
    pr.contract_values = true;
    pr.weight.resize(pr.joint);
    for (std::size_t x = 0; x < pr.joint; ++x) pr.weight[x] = h.cell_prob(x);

    Factor g;
    g.coords = zero_based(spec.K);
    g.vdim = h.q();
    g.cap = spec.K.empty() ? std::min(1.0, u) : u;
    pr.factors.push_back(std::move(g));
    for (const CoordSet& block : spec.J.blocks) {
        Factor f;
        f.coords = zero_based(block);
        f.cap = u;
        pr.factors.push_back(std::move(f));
    }
    fill_factor_maps(pr);
    for (Factor& f : pr.factors) f.w = block_cell_probs(h.law(), static_cast<int>(f.coords.size()));
    return pr;
}

double eval_objective(const Problem& pr, const std::vector<std::vector<double>>& tab) {
    double total = 0.0;
    std::size_t first_scalar = pr.contract_values ? 1 : 0;
    for (std::size_t x = 0; x < pr.joint; ++x) {
        double wx = pr.weight[x];
        if (wx == 0.0) continue;
        double prod = wx;
        for (std::size_t b = first_scalar; b < pr.factors.size(); ++b)
            prod *= tab[b][pr.factors[b].idx[x]];
        if (prod == 0.0) continue;
        if (pr.contract_values) {
            const double* vrow = pr.values + x * static_cast<std::size_t>(pr.qv);
            const double* grow = tab[0].data() + static_cast<std::size_t>(pr.factors[0].idx[x]) * static_cast<std::size_t>(pr.qv);
            double dot = 0.0;
            for (int r = 0; r < pr.qv; ++r) dot += vrow[r] * grow[static_cast<std::size_t>(r)];
            total += prod * dot;
        } else {
            total += prod * pr.values[x];
        }
    }
    return total;
}

// d objective / d t_target, holding every other factor fixed.
void gradient(const Problem& pr, const std::vector<std::vector<double>>& tab, std::size_t target,
              std::vector<double>& grad) {
    const Factor& ft = pr.factors[target];
    grad.assign(static_cast<std::size_t>(ft.cells) * static_cast<std::size_t>(ft.vdim), 0.0);
    std::size_t first_scalar = pr.contract_values ? 1 : 0;
    for (std::size_t x = 0; x < pr.joint; ++x) {
        double wx = pr.weight[x];
        if (wx == 0.0) continue;
        double prod = wx;
        for (std::size_t b = first_scalar; b < pr.factors.size(); ++b) {
            if (b == target) continue;
            prod *= tab[b][pr.factors[b].idx[x]];
        }
        if (prod == 0.0) continue;
        if (pr.contract_values) {
            const double* vrow = pr.values + x * static_cast<std::size_t>(pr.qv);
            if (target == 0) {
                double* gr = grad.data() + static_cast<std::size_t>(ft.idx[x]) * static_cast<std::size_t>(pr.qv);
                for (int r = 0; r < pr.qv; ++r) gr[r] += prod * vrow[r];
            } else {
                const double* grow = tab[0].data() + static_cast<std::size_t>(pr.factors[0].idx[x]) * static_cast<std::size_t>(pr.qv);
                double dot = 0.0;
                for (int r = 0; r < pr.qv; ++r) dot += vrow[r] * grow[static_cast<std::size_t>(r)];
                grad[ft.idx[x]] += prod * dot;
            }
        } else {
            grad[ft.idx[x]] += prod * pr.values[x];
        }
    }
}

// maximize sum_i G_i t_i  s.t.  sum_i w_i t_i^2 <= radius2, 0 <= t_i <= cap.
// Optimal t_i = min(cap, lambda G_i / w_i); the water level lambda comes from a
// breakpoint scan over cells sorted by G_i/w_i, all in closed form.
struct WaterfillResult {
    std::vector<double> t;
    double value = 0.0;
};

WaterfillResult waterfill(const std::vector<double>& G, const std::vector<double>& w, double cap, double radius2) {
    std::size_t n = G.size();
    WaterfillResult out;
    out.t.assign(n, 0.0);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (w[i] > 0.0 && G[i] > 0.0) order.push_back(i);
    if (order.empty()) return out;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ra = G[a] / w[a];
        double rb = G[b] / w[b];
        if (ra != rb) return ra > rb;
        return a < b;
    });
    std::vector<double> suffix(order.size() + 1, 0.0);
    for (std::size_t k = order.size(); k-- > 0;) {
        std::size_t i = order[k];
        suffix[k] = suffix[k + 1] + G[i] * G[i] / w[i];
    }
    std::size_t ncapped = 0;
    double cap_weight = 0.0;
    double lambda = 0.0;
    for (;;) {
        double s = suffix[ncapped];
        if (s <= 0.0) break;  // everything left is capped
        lambda = std::sqrt(std::max(0.0, radius2 - cap_weight) / s);
        if (std::isfinite(cap) && ncapped < order.size()) {
            std::size_t i = order[ncapped];
            if (lambda * (G[i] / w[i]) >= cap) {
                cap_weight += w[i] * cap * cap;
                ++ncapped;
                continue;
            }
        }
        break;
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        std::size_t i = order[k];
        double ti = (k < ncapped) ? cap : lambda * (G[i] / w[i]);
        if (std::isfinite(cap)) ti = std::min(ti, cap);
        out.t[i] = ti;
        out.value += G[i] * ti;
    }
    return out;
}

// Exact maximization over one factor; returns the new objective value.
double update_factor(const Problem& pr, std::size_t target, std::vector<std::vector<double>>& tab,
                     std::vector<double>& grad) {
    gradient(pr, tab, target, grad);
    const Factor& ft = pr.factors[target];
    std::vector<double>& t = tab[target];
    std::size_t cells = static_cast<std::size_t>(ft.cells);

    if (!ft.slice_of.empty()) {
        // Per-slice Euclid magnitudes, then a waterfill across slices with unit
        // slice caps and the block budget radius2.
        std::vector<double> smag(static_cast<std::size_t>(ft.nslices), 0.0);
        for (std::size_t y = 0; y < cells; ++y)
            smag[static_cast<std::size_t>(ft.slice_of[y])] += grad[y] * grad[y];
        for (double& v : smag) v = std::sqrt(v);
        std::vector<double> ones(smag.size(), 1.0);
        WaterfillResult wf = waterfill(smag, ones, 1.0, ft.radius2);
        for (std::size_t y = 0; y < cells; ++y) {
            double sm = smag[static_cast<std::size_t>(ft.slice_of[y])];
            t[y] = (sm > 0.0) ? grad[y] * (wf.t[static_cast<std::size_t>(ft.slice_of[y])] / sm) : 0.0;
        }
        return wf.value;
    }

    if (ft.vdim == 1) {
        std::vector<double> G(cells, 0.0);
        for (std::size_t y = 0; y < cells; ++y) G[y] = std::abs(grad[y]);
        WaterfillResult wf = waterfill(G, ft.w, ft.cap, ft.radius2);
        for (std::size_t y = 0; y < cells; ++y) t[y] = (grad[y] < 0.0) ? -wf.t[y] : wf.t[y];
        return wf.value;
    }

    std::size_t q = static_cast<std::size_t>(ft.vdim);
    std::vector<double> G(cells, 0.0);
    for (std::size_t y = 0; y < cells; ++y) {
        double s2 = 0.0;
        for (std::size_t r = 0; r < q; ++r) {
            double gv = grad[y * q + r];
            s2 += gv * gv;
        }
        G[y] = std::sqrt(s2);
    }
    WaterfillResult wf = waterfill(G, ft.w, ft.cap, ft.radius2);
    for (std::size_t y = 0; y < cells; ++y) {
        double scale = (G[y] > 0.0) ? wf.t[y] / G[y] : 0.0;
        for (std::size_t r = 0; r < q; ++r) t[y * q + r] = grad[y * q + r] * scale;
    }
    return wf.value;
}

// Project a table onto the feasible set (dead cells zeroed, L2 budget, caps).
void feasibilize(const Factor& ft, std::vector<double>& t) {
    std::size_t cells = static_cast<std::size_t>(ft.cells);
    std::size_t q = static_cast<std::size_t>(ft.vdim);
    if (!ft.slice_of.empty()) {
        std::vector<double> s2(static_cast<std::size_t>(ft.nslices), 0.0);
        for (std::size_t y = 0; y < cells; ++y) s2[static_cast<std::size_t>(ft.slice_of[y])] += t[y] * t[y];
        for (std::size_t y = 0; y < cells; ++y) {
            double s = s2[static_cast<std::size_t>(ft.slice_of[y])];
            if (s > 1.0) t[y] /= std::sqrt(s);
        }
        double total = 0.0;
        for (std::size_t y = 0; y < cells; ++y) total += t[y] * t[y];
        if (total > ft.radius2) {
            double scale = std::sqrt(ft.radius2 / total);
            for (double& v : t) v *= scale;
        }
        return;
    }
    double s2 = 0.0;
    for (std::size_t y = 0; y < cells; ++y) {
        if (ft.w[y] == 0.0) {
            for (std::size_t r = 0; r < q; ++r) t[y * q + r] = 0.0;
            continue;
        }
        double m2 = 0.0;
        for (std::size_t r = 0; r < q; ++r) m2 += t[y * q + r] * t[y * q + r];
        s2 += ft.w[y] * m2;
    }
    if (s2 > 0.0) {
        double scale = std::sqrt(ft.radius2 / s2);
        for (double& v : t) v *= scale;
    }
    if (std::isfinite(ft.cap)) {
        for (std::size_t y = 0; y < cells; ++y) {
            double m2 = 0.0;
            for (std::size_t r = 0; r < q; ++r) m2 += t[y * q + r] * t[y * q + r];
            double m = std::sqrt(m2);
            if (m > ft.cap) {
                double scale = ft.cap / m;
                for (std::size_t r = 0; r < q; ++r) t[y * q + r] *= scale;
            }
        }
    }
}

std::vector<std::vector<double>> random_tables(const Problem& pr, const rng::Stream& stream) {
    std::vector<std::vector<double>> tab(pr.factors.size());
    std::uint64_t counter = 0;
    for (std::size_t b = 0; b < pr.factors.size(); ++b) {
        const Factor& ft = pr.factors[b];
        tab[b].resize(static_cast<std::size_t>(ft.cells) * static_cast<std::size_t>(ft.vdim));
        for (double& v : tab[b]) v = stream.symmetric(counter++);
        feasibilize(ft, tab[b]);
    }
    return tab;
}

// Full-support sign pattern per factor, scaled to the feasibility boundary:
// every live entry is +-m with m as large as the radius and cap allow. The
// extreme points of the feasible set on small alphabets live here, so these
// candidates certify corner optima exactly.
std::vector<std::vector<double>> sign_pattern_tables(const Problem& pr, const rng::Stream& stream) {
    std::vector<std::vector<double>> tab(pr.factors.size());
    std::uint64_t counter = 0;
    for (std::size_t b = 0; b < pr.factors.size(); ++b) {
        const Factor& ft = pr.factors[b];
        std::size_t entries = static_cast<std::size_t>(ft.cells) * static_cast<std::size_t>(ft.vdim);
        tab[b].assign(entries, 0.0);
        double live_weight = 0.0;
        for (int y = 0; y < ft.cells; ++y)
            if (ft.w[static_cast<std::size_t>(y)] > 0.0) live_weight += ft.w[static_cast<std::size_t>(y)];
        if (live_weight == 0.0) continue;
        double m = std::sqrt(ft.radius2 / (static_cast<double>(ft.vdim) * live_weight));
        if (ft.cap < kNoCap) m = std::min(m, ft.cap / std::sqrt(static_cast<double>(ft.vdim)));
        for (int y = 0; y < ft.cells; ++y) {
            if (ft.w[static_cast<std::size_t>(y)] == 0.0) {
                counter += static_cast<std::size_t>(ft.vdim);
                continue;
            }
            for (int r = 0; r < ft.vdim; ++r) {
                tab[b][static_cast<std::size_t>(y) * static_cast<std::size_t>(ft.vdim) + static_cast<std::size_t>(r)] =
                    static_cast<double>(stream.sign(counter++)) * m;
            }
        }
        feasibilize(ft, tab[b]);
    }
    return tab;
}

// Warm start: per factor, the top left-singular vector of the weighted
// flattening values[(factor cell), (other cells x value coord)], by a fixed
// number of power iterations from the all-ones vector.
std::vector<std::vector<double>> spectral_tables(const Problem& pr) {
    std::vector<std::vector<double>> tab(pr.factors.size());
    for (std::size_t b = 0; b < pr.factors.size(); ++b) {
        const Factor& ft = pr.factors[b];
        std::size_t q = static_cast<std::size_t>(ft.vdim);
        bool vec_target = pr.contract_values && b == 0;
        std::size_t rows = static_cast<std::size_t>(ft.cells) * (vec_target ? q : 1);
        std::size_t cols = static_cast<std::size_t>(ft.ccells) *
                           ((pr.contract_values && !vec_target) ? static_cast<std::size_t>(pr.qv) : 1);
        std::vector<double> E(rows * cols, 0.0);
        for (std::size_t x = 0; x < pr.joint; ++x) {
            double wx = pr.weight[x];
            if (wx == 0.0) continue;
            double sw = std::sqrt(wx);
            std::size_t yc = ft.idx[x];
            std::size_t cc = ft.cidx[x];
            if (pr.contract_values) {
                for (std::size_t r = 0; r < static_cast<std::size_t>(pr.qv); ++r) {
                    double v = sw * pr.values[x * static_cast<std::size_t>(pr.qv) + r];
                    if (vec_target)
                        E[(yc * q + r) * cols + cc] += v;
                    else
                        E[yc * cols + cc * static_cast<std::size_t>(pr.qv) + r] += v;
                }
            } else {
                E[yc * cols + cc] += sw * pr.values[x];
            }
        }
        std::vector<double> v(rows, 1.0 / std::sqrt(static_cast<double>(rows)));
        std::vector<double> u(cols);
        std::vector<double> v2(rows);
        for (int it = 0; it < 50; ++it) {
            std::fill(u.begin(), u.end(), 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                double vr = v[r];
                if (vr == 0.0) continue;
                const double* row = E.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) u[c] += row[c] * vr;
            }
            double norm2 = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* row = E.data() + r * cols;
                double s = 0.0;
                for (std::size_t c = 0; c < cols; ++c) s += row[c] * u[c];
                v2[r] = s;
                norm2 += s * s;
            }
            if (norm2 == 0.0) break;
            double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t r = 0; r < rows; ++r) v[r] = v2[r] * inv;
        }
        // Undo the sqrt(w) row scaling so the vector lives in the original coordinates.
        tab[b].assign(static_cast<std::size_t>(ft.cells) * q, 0.0);
        for (std::size_t y = 0; y < static_cast<std::size_t>(ft.cells); ++y) {
            double wy = ft.w.empty() ? 1.0 : ft.w[y];
            if (wy == 0.0) continue;
            double inv = 1.0 / std::sqrt(wy);
            if (vec_target)
                for (std::size_t r = 0; r < q; ++r) tab[b][y * q + r] = v[y * q + r] * inv;
            else
                tab[b][y] = v[y] * inv;
        }
        feasibilize(ft, tab[b]);
    }
    return tab;
}

struct RunOutcome {
    double value = 0.0;
    std::vector<std::vector<double>> tab;
    bool converged = false;
    double last_improve = 0.0;
};

RunOutcome run_alternating(const Problem& pr, std::vector<std::vector<double>> tab, const NormOptions& opts) {
    RunOutcome out;
    std::vector<double> grad;
    double prev = 0.0;
    bool have_prev = false;
    double val = 0.0;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (std::size_t b = 0; b < pr.factors.size(); ++b) val = update_factor(pr, b, tab, grad);
        if (have_prev) {
            out.last_improve = val - prev;
            if (std::abs(out.last_improve) <= opts.rel_tol * std::max(std::abs(val), 1e-300)) {
                out.converged = true;
                prev = val;
                break;
            }
        }
        prev = val;
        have_prev = true;
    }
    out.value = prev;
    out.tab = std::move(tab);
    return out;
}

NormResult solve_problem(const Problem& pr, const NormOptions& opts) {
    int runs = 1 + std::max(0, opts.random_restarts);
    std::vector<RunOutcome> outs(static_cast<std::size_t>(runs));
    parallel_for(runs, opts.threads, [&](int r) {
        std::vector<std::vector<double>> tab =
            (r == 0) ? spectral_tables(pr)
                     : random_tables(pr, rng::Stream::from(opts.seed, rng::kTagRestart, static_cast<std::uint64_t>(r)));
        outs[static_cast<std::size_t>(r)] = run_alternating(pr, std::move(tab), opts);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < outs.size(); ++r)
        if (outs[r].value > outs[best].value) best = r;  // ties keep the earliest restart
    NormResult res;
    res.value = eval_objective(pr, outs[best].tab);
    res.restarts_used = runs;
    res.converged = outs[best].converged;
    res.gap_estimate = outs[best].last_improve;
    res.certificate.g = std::move(outs[best].tab[0]);
    for (std::size_t b = 1; b < outs[best].tab.size(); ++b)
        res.certificate.f.push_back(std::move(outs[best].tab[b]));
    return res;
}

}  // namespace

NormResult norm_kju(const Kernel& h, const PartitionSpec& spec, double u, const NormOptions& opts) {
    // sup over g alone with no cap: attained at g = h / sqrt(E|h|^2) exactly.
    if (spec.J.blocks.empty() && spec.K.size() == h.d() && !std::isfinite(u)) {
        if (!is_valid_spec(spec, h.d())) throw InputError("partition spec does not partition {1..d}");
        NormResult res;
        res.value = std::sqrt(second_moment(h));
        res.converged = true;
        res.certificate.g.assign(h.raw().size(), 0.0);
        if (res.value > 0.0) {
            for (std::size_t x = 0; x < h.cells(); ++x) {
                if (h.cell_prob(x) == 0.0) continue;
                for (int r = 0; r < h.q(); ++r) {
                    std::size_t k = x * static_cast<std::size_t>(h.q()) + static_cast<std::size_t>(r);
                    res.certificate.g[k] = h.raw()[k] / res.value;
                }
            }
        }
        return res;
    }
    Problem pr = build_kernel_problem(h, spec, u);
    return solve_problem(pr, opts);
}

NormResult norm_kj(const Kernel& h, const PartitionSpec& spec, const NormOptions& opts) {
    return norm_kju(h, spec, kNoCap, opts);
}

double objective_at(const Kernel& h, const PartitionSpec& spec, const TestFunctionBundle& bundle) {
    Problem pr = build_kernel_problem(h, spec, kNoCap);
    std::vector<std::vector<double>> tab;
    tab.push_back(bundle.g);
    for (const std::vector<double>& f : bundle.f) tab.push_back(f);
    if (tab.size() != pr.factors.size()) throw InputError("bundle has the wrong number of factors");
    for (std::size_t b = 0; b < tab.size(); ++b) {
        std::size_t want = static_cast<std::size_t>(pr.factors[b].cells) * static_cast<std::size_t>(pr.factors[b].vdim);
        if (tab[b].size() != want) throw InputError("bundle factor has the wrong size");
    }
    return eval_objective(pr, tab);
}

double bruteforce_norm_oracle(const Kernel& h, const PartitionSpec& spec, double u, int samples,
                              std::uint64_t seed) {
    Problem pr = build_kernel_problem(h, spec, u);
    std::size_t dim = 0;
    for (const Factor& ft : pr.factors) dim += static_cast<std::size_t>(ft.cells) * static_cast<std::size_t>(ft.vdim);
    if (dim > 64) throw GuardError("bruteforce oracle limited to 64 total table entries");

    std::vector<std::vector<double>> tab(pr.factors.size());
    for (std::size_t b = 0; b < pr.factors.size(); ++b)
        tab[b].assign(static_cast<std::size_t>(pr.factors[b].cells) * static_cast<std::size_t>(pr.factors[b].vdim), 0.0);

    double best = 0.0;
    // Every one-cell spike at extreme feasible magnitude, combined across factors.
    std::function<void(std::size_t)> rec = [&](std::size_t b) {
        if (b == pr.factors.size()) {
            best = std::max(best, std::abs(eval_objective(pr, tab)));
            return;
        }
        const Factor& ft = pr.factors[b];
        for (std::size_t y = 0; y < static_cast<std::size_t>(ft.cells); ++y) {
            double mag;
            if (!ft.slice_of.empty()) {
                mag = std::min(1.0, std::sqrt(ft.radius2));
            } else {
                if (ft.w[y] == 0.0) continue;
                mag = std::min(ft.cap, std::sqrt(ft.radius2 / ft.w[y]));
            }
            for (std::size_t r = 0; r < static_cast<std::size_t>(ft.vdim); ++r) {
                std::size_t k = y * static_cast<std::size_t>(ft.vdim) + r;
                tab[b][k] = mag;
                rec(b + 1);
                tab[b][k] = 0.0;
            }
        }
    };
    rec(0);

    for (int s = 0; s < samples; ++s) {
        rng::Stream st = rng::Stream::from(seed, rng::kTagOracle, static_cast<std::uint64_t>(s));
        std::vector<std::vector<double>> cand = s % 2 == 0 ? random_tables(pr, st) : sign_pattern_tables(pr, st);
        best = std::max(best, std::abs(eval_objective(pr, cand)));
    }
    return best;
}

double array_norm(const DenseArray& a, const Partition& J, const NormOptions& opts) {
    if (a.d < 1 || a.n < 1) throw InputError("array must have d >= 1 and n >= 1");
    if (a.q != 1) throw InputError("array norm expects a plain real array (q = 1)");
    std::size_t joint = pow_size(a.n, a.d);
    if (a.v.size() != joint) throw InputError("array has the wrong number of entries");
    if (!is_valid_partition(J, CoordSet::full(a.d))) throw InputError("J must partition {1..d}");

    if (J.deg() == 1) {
        double s2 = 0.0;
        for (double v : a.v) s2 += v * v;
        return std::sqrt(s2);
    }
    Problem pr;
    pr.d = a.d;
    pr.base = a.n;
    pr.joint = joint;
    pr.values = a.v.data();
    pr.qv = 1;
    pr.contract_values = false;
    pr.weight.assign(joint, 1.0);
    for (const CoordSet& block : J.blocks) {
        Factor f;
        f.coords = zero_based(block);
        pr.factors.push_back(std::move(f));
    }
    fill_factor_maps(pr);
    for (Factor& f : pr.factors) f.w.assign(static_cast<std::size_t>(f.cells), 1.0);
    return solve_problem(pr, opts).value;
}

double chaos_star_norm(const DenseArray& a, const PartitionSpec& spec, double p, const NormOptions& opts) {
    if (a.d < 1 || a.n < 1 || a.q < 1) throw InputError("array must have d >= 1, n >= 1, q >= 1");
    std::size_t joint = pow_size(a.n, a.d);
    if (a.v.size() != joint * static_cast<std::size_t>(a.q)) throw InputError("array has the wrong number of entries");
    if (!is_valid_spec(spec, a.d)) throw InputError("partition spec does not partition {1..d}");
    if (!(p >= 1.0)) throw InputError("p must be at least 1");

    if (a.d == 1 && spec.J.blocks.empty()) {
        // Degree-one g-only spec: the unit L2 ball is the only constraint, so
        // the value is the Euclidean length, for every p.
        double ss = 0.0;
        for (double x : a.v) ss += x * x;
        return std::sqrt(ss);
    }

    Problem pr;
    pr.d = a.d;
    pr.base = a.n;
    pr.joint = joint;
    pr.values = a.v.data();
    pr.qv = a.q;
    pr.contract_values = true;
    pr.weight.assign(joint, 1.0);

    Factor g;  // alpha^0 block: sum of squares at most 1, no per-cell cap
    g.coords = zero_based(spec.K);
    g.vdim = a.q;
    pr.factors.push_back(std::move(g));
    for (const CoordSet& block : spec.J.blocks) {
        Factor f;
        f.coords = zero_based(block);
        f.radius2 = p;
        pr.factors.push_back(std::move(f));
    }
    fill_factor_maps(pr);
    for (std::size_t b = 0; b < pr.factors.size(); ++b) {
        Factor& f = pr.factors[b];
        f.w.assign(static_cast<std::size_t>(f.cells), 1.0);
        if (b == 0) continue;
        // Slices fix the largest coordinate of the block; with ascending
        // coordinate order and the last digit fastest that is cell mod n.
        f.slice_of.resize(static_cast<std::size_t>(f.cells));
        for (std::size_t y = 0; y < static_cast<std::size_t>(f.cells); ++y)
            f.slice_of[y] = static_cast<int>(y % static_cast<std::size_t>(a.n));
        f.nslices = a.n;
    }
    return solve_problem(pr, opts).value;
}

double replicated_array_norm(const Kernel& h, const PartitionSpec& spec, int n, const NormOptions& opts) {
    if (n < 1) throw InputError("n must be at least 1");
    if (!is_valid_spec(spec, h.d())) throw InputError("partition spec does not partition {1..d}");
    int m = h.m();
    int mext = n * m;
    std::vector<double> probs(static_cast<std::size_t>(mext));
    for (int i = 0; i < n; ++i)
        for (int y = 0; y < m; ++y)
            probs[static_cast<std::size_t>(i * m + y)] = h.law().p(y) / static_cast<double>(n);
    std::size_t cells = pow_size(mext, h.d());
    std::vector<double> values(cells * static_cast<std::size_t>(h.q()));
    std::vector<int> letters(static_cast<std::size_t>(h.d()));
    for (std::size_t x = 0; x < cells; ++x) {
        std::size_t rest = x;
        for (int k = h.d() - 1; k >= 0; --k) {
            letters[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(mext)) % m;
            rest /= static_cast<std::size_t>(mext);
        }
        std::span<const double> src = h.at(letters);
        std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(x * static_cast<std::size_t>(h.q())));
    }
    Kernel ext(h.d(), mext, h.q(), std::move(values), DiscreteDistribution(std::move(probs)), std::nullopt);
    return std::pow(static_cast<double>(n), static_cast<double>(h.d()) / 2.0) * norm_kju(ext, spec, kNoCap, opts).value;
}

}  // namespace ulab
