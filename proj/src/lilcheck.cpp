#include "ulab/lilcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ulab/errors.hpp"
#include "ulab/simulate.hpp"

namespace ulab {
namespace {

void check_grid(const std::vector<double>& u_grid) {
    if (u_grid.empty()) throw InputError("u grid must be nonempty");
    double prev = 0.0;
    for (double u : u_grid) {
        if (!(u > prev)) throw InputError("u grid must be positive and strictly increasing");
        prev = u;
    }
}

double saturation_for(const Kernel& h, const PartitionSpec& spec) {
    double pmin = h.law().min_positive();
    double sat = 1.0;
    auto block_sat = [&](int size) { return std::pow(pmin, -static_cast<double>(size) / 2.0); };
    if (!spec.K.empty()) sat = std::max(sat, block_sat(spec.K.size()));
    for (const CoordSet& block : spec.J.blocks) sat = std::max(sat, block_sat(block.size()));
    return sat;
}

}  // namespace

std::vector<double> default_u_grid(const Kernel& h) {
    double upper = 4.0 / std::sqrt(h.law().min_positive());
    const int npoints = 24;
    std::vector<double> grid(npoints);
    for (int i = 0; i < npoints; ++i)
        grid[static_cast<std::size_t>(i)] = std::pow(upper, static_cast<double>(i) / (npoints - 1));
    return grid;
}

GrowthCurve growth_curve(const Kernel& h, const PartitionSpec& spec, const std::vector<double>& u_grid,
                         const NormOptions& opts) {
    check_grid(u_grid);
    if (!is_valid_spec(spec, h.d())) throw InputError("partition spec does not partition {1..d}");
    GrowthCurve curve;
    curve.spec = spec;
    curve.saturation_u = saturation_for(h, spec);
    double expo = static_cast<double>(h.d() - spec.deg()) / 2.0;
    for (double u : u_grid) {
        NormResult res = norm_kju(h, spec, u, opts);
        GrowthPoint pt;
        pt.u = u;
        pt.norm = res.value;
        pt.normalized = res.value / std::pow(ll(u), expo);
        pt.converged = res.converged;
        curve.points.push_back(pt);
    }
    return curve;
}

LilCertificate lil_certificate(const Kernel& h, const std::vector<double>& u_grid,
                               const CalibrationConstants& consts, const LilSimOptions& sim,
                               const NormOptions& nopts) {
    check_grid(u_grid);
    consts.validate();
    LilCertificate cert;
    cert.canonical = is_canonical(h);
    cert.symmetric = h.d() <= 1 || h.is_symmetric(1e-12);
    cert.decoupled_only = !cert.symmetric;
    cert.integrability_value = ll_weighted_second_moment(h);
    cert.constants_used = consts;
    for (const PartitionSpec& spec : enumerate_partition_specs(h.d())) {
        GrowthCurve curve = growth_curve(h, spec, u_grid, nopts);
        for (const GrowthPoint& pt : curve.points) cert.d_star = std::max(cert.d_star, pt.normalized);
        cert.growth_curves.push_back(std::move(curve));
    }
    if (sim.enabled) {
        LilSequence seq = lil_ratio_sequence(h, SampleKind::decoupled, sim.n_max_exp, sim.reps, sim.seed,
                                             sim.threads);
        for (const LilLevel& lvl : seq.levels) cert.c_star = std::max(cert.c_star, lvl.median_ratio);
        cert.has_c_star = true;
    }
    return cert;
}

TruncationTrend truncation_trend(const std::vector<Kernel>& seq, const PartitionSpec& spec,
                                 const std::vector<double>& u_grid, const NormOptions& opts) {
    if (seq.empty()) throw InputError("refinement sequence must be nonempty");
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i].d() != seq[0].d() || seq[i].q() != seq[0].q())
            throw InputError("refinement sequence kernels must share d and q");
        if (seq[i].m() < seq[i - 1].m()) throw InputError("refinement sequence alphabets must be nondecreasing");
    }
    TruncationTrend out;
    for (const Kernel& h : seq) {
        GrowthCurve curve = growth_curve(h, spec, u_grid, opts);
        double mx = 0.0;
        for (const GrowthPoint& pt : curve.points) mx = std::max(mx, pt.normalized);
        out.maxima.push_back(mx);
        out.curves.push_back(std::move(curve));
    }
    if (out.maxima.size() >= 2) {
        double prev = out.maxima[out.maxima.size() - 2];
        double last = out.maxima.back();
        if (last > prev * 1.02)
            out.verdict = TrendVerdict::growing;
        else if (last < prev * 0.98)
            out.verdict = TrendVerdict::shrinking;
        else
            out.verdict = TrendVerdict::stabilizing;
    }
    return out;
}

}  // namespace ulab
