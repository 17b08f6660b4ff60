#include "ulab/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "ulab/bounds.hpp"
#include "ulab/errors.hpp"
#include "ulab/indexing.hpp"
#include "ulab/kernel.hpp"
#include "ulab/kernel_io.hpp"
#include "ulab/lilcheck.hpp"
#include "ulab/norms.hpp"
#include "ulab/numfmt.hpp"
#include "ulab/report.hpp"
#include "ulab/rng.hpp"
#include "ulab/simulate.hpp"

namespace ulab {
namespace {

// Flags shared by every subcommand. --threads and --out never enter the report
// echo: neither affects results, and comparing runs across them must be
// byte-exact.
struct CommonOpts {
    std::string kernel_path;
    std::uint64_t seed = 12345;
    int reps = 256;
    int threads = 1;
    double tol = 1e-10;
    double Ld = 1.0;
    std::string out;
    std::string format = "csv";
};

void add_common_flags(CLI::App* cmd, CommonOpts* c, bool needs_kernel) {
    if (needs_kernel) {
        cmd->add_option("--kernel", c->kernel_path, "kernel spec file")->required();
    }
    cmd->add_option("--seed", c->seed, "master seed (default 12345)");
    cmd->add_option("--reps", c->reps, "Monte Carlo replications (default 256)")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", c->threads, "worker cap (default 1)")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", c->tol, "solver relative tolerance (default 1e-10)")->check(CLI::PositiveNumber);
    cmd->add_option("--Ld", c->Ld, "constant L override (default 1)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c->out, "output path (default stdout)");
    cmd->add_option("--format", c->format, "csv or text-summary")
        ->check(CLI::IsMember({"csv", "text-summary"}));
}

NormOptions norm_options(const CommonOpts& c) {
    NormOptions o;
    o.rel_tol = c.tol;
    o.seed = c.seed;
    o.threads = c.threads;
    return o;
}

CalibrationConstants constants_from(const CommonOpts& c) {
    CalibrationConstants k;
    k.L = c.Ld;
    k.validate();
    return k;
}

void echo_common(Table& t, const CommonOpts& c) {
    t.echo.emplace_back("seed", std::to_string(c.seed));
    t.echo.emplace_back("reps", std::to_string(c.reps));
    t.echo.emplace_back("tol", format_double(c.tol));
    t.echo.emplace_back("format", c.format);
    CalibrationConstants k = constants_from(c);
    t.echo.emplace_back("constants_used", "L=" + format_double(k.L) + ";c=" + format_double(k.c) +
                                              ";eta=" + format_double(k.eta));
}

void emit(const Table& t, const CommonOpts& c) {
    std::string text = c.format == "csv" ? to_csv(t) : to_text_summary(t);
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw InputError("cannot open output path '" + c.out + "'");
    f << text;
    if (!f) throw InputError("failed writing output path '" + c.out + "'");
}

ReportRow row(std::string command, std::string metric, std::string value) {
    ReportRow r;
    r.command = std::move(command);
    r.metric = std::move(metric);
    r.value = std::move(value);
    return r;
}

std::string bool_str(bool b) { return b ? "1" : "0"; }

std::string cell_label(const Kernel& h, std::size_t flat) {
    // Decode a flat cell back to letters, most significant coordinate first.
    std::vector<int> letters(static_cast<std::size_t>(h.d()), 0);
    std::size_t rest = flat;
    for (int k = h.d() - 1; k >= 0; --k) {
        letters[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(h.m()));
        rest /= static_cast<std::size_t>(h.m());
    }
    std::string s = "cell=";
    for (int k = 0; k < h.d(); ++k) {
        if (k) s += ' ';
        s += std::to_string(letters[static_cast<std::size_t>(k)]);
    }
    return s;
}

// ---- project ----------------------------------------------------------------

struct ProjectOpts {
    CommonOpts common;
    std::string save_path;
};

int run_project(const ProjectOpts& o) {
    Kernel h = load_kernel(o.common.kernel_path);
    Table t;
    t.echo.emplace_back("command", "project");
    t.echo.emplace_back("kernel", o.common.kernel_path);
    if (!o.save_path.empty()) t.echo.emplace_back("save", o.save_path);
    echo_common(t, o.common);

    CanonicalReport before = is_canonical(h);
    Kernel ph = hoeffding_project(h);
    CanonicalReport after = is_canonical(ph);

    ReportRow r = row("project", "input_canonical", bool_str(before.canonical));
    r.extra = "max_violation=" + format_double(before.max_violation);
    t.rows.push_back(r);
    r = row("project", "projected_canonical", bool_str(after.canonical));
    r.extra = "max_violation=" + format_double(after.max_violation);
    t.rows.push_back(r);
    t.rows.push_back(row("project", "projected_second_moment", format_double(second_moment(ph))));
    t.rows.push_back(row("project", "symmetric", bool_str(ph.is_symmetric())));

    std::size_t entries = ph.cells() * static_cast<std::size_t>(ph.q());
    if (entries <= 4096) {
        for (std::size_t cell = 0; cell < ph.cells(); ++cell) {
            std::span<const double> v = ph.cell(cell);
            for (int rr = 0; rr < ph.q(); ++rr) {
                ReportRow pr = row("project", "projected_value", format_double(v[static_cast<std::size_t>(rr)]));
                pr.extra = cell_label(ph, cell);
                if (ph.q() > 1) pr.extra += ";component=" + std::to_string(rr);
                t.rows.push_back(pr);
            }
        }
    } else {
        t.rows.push_back(row("project", "values_omitted", std::to_string(entries)));
    }

    if (!o.save_path.empty()) save_kernel(ph, o.save_path);
    emit(t, o.common);
    return 0;
}

// ---- norms ------------------------------------------------------------------

struct NormsOpts {
    CommonOpts common;
    std::string spec_text;
    std::optional<double> u;
};

int run_norms(const NormsOpts& o) {
    Kernel h = load_kernel(o.common.kernel_path);
    Table t;
    t.echo.emplace_back("command", "norms");
    t.echo.emplace_back("kernel", o.common.kernel_path);
    if (!o.spec_text.empty()) t.echo.emplace_back("spec", o.spec_text);
    if (o.u) t.echo.emplace_back("u", format_double(*o.u));
    echo_common(t, o.common);

    std::vector<PartitionSpec> specs;
    if (o.spec_text.empty()) {
        specs = enumerate_partition_specs(h.d());
    } else {
        specs.push_back(parse_partition_spec(o.spec_text, h.d()));
    }
    if (o.u && *o.u <= 0.0) throw InputError("truncation level u must be positive");

    NormOptions nopts = norm_options(o.common);
    for (const PartitionSpec& spec : specs) {
        NormResult res = o.u ? norm_kju(h, spec, *o.u, nopts) : norm_kj(h, spec, nopts);
        ReportRow r = row("norms", "norm", format_double(res.value));
        r.spec = to_string(spec);
        if (o.u) r.u = format_double(*o.u);
        r.extra = "converged=" + bool_str(res.converged) + ";restarts=" + std::to_string(res.restarts_used) +
                  ";gap=" + format_double(res.gap_estimate);
        t.rows.push_back(r);
        if (!res.converged) {
            ReportRow w = row("norms", "warning", "solver did not converge");
            w.spec = to_string(spec);
            if (o.u) w.u = format_double(*o.u);
            t.rows.push_back(w);
        }
    }
    emit(t, o.common);
    return 0;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateOpts {
    CommonOpts common;
    std::string op = "moment";
    std::string kind_text = "undecoupled";
    int n = 4;
    double p = 2.0;
    double t = 1.0;
    int nmax = 8;
};

SampleKind parse_kind(const std::string& text) {
    if (text == "undecoupled") return SampleKind::undecoupled;
    if (text == "decoupled") return SampleKind::decoupled;
    if (text == "randomized_undecoupled") return SampleKind::randomized_undecoupled;
    if (text == "randomized_decoupled") return SampleKind::randomized_decoupled;
    throw InputError("unknown sample kind '" + text + "'");
}

int run_simulate(const SimulateOpts& o) {
    Kernel h = load_kernel(o.common.kernel_path);
    SampleKind kind = parse_kind(o.kind_text);
    Table t;
    t.echo.emplace_back("command", "simulate");
    t.echo.emplace_back("kernel", o.common.kernel_path);
    t.echo.emplace_back("op", o.op);
    t.echo.emplace_back("kind", o.kind_text);
    if (o.op == "lil") {
        t.echo.emplace_back("nmax", std::to_string(o.nmax));
    } else {
        t.echo.emplace_back("n", std::to_string(o.n));
    }
    if (o.op == "moment") t.echo.emplace_back("p", format_double(o.p));
    if (o.op == "tail") t.echo.emplace_back("t", format_double(o.t));
    echo_common(t, o.common);

    SampleConfig cfg;
    cfg.n = o.n;
    cfg.reps = o.common.reps;
    cfg.seed = o.common.seed;
    cfg.kind = kind;

    const std::string ns = std::to_string(o.n);
    if (o.op == "sum") {
        double acc = 0.0;
        for (int rep = 0; rep < cfg.reps; ++rep) {
            Sample s = draw_sample(h, cfg, rep);
            std::vector<double> S;
            if (is_randomized(kind)) {
                SignTable signs = draw_signs(cfg, h.d(), rep);
                S = ustat_sum(h, cfg, s, &signs);
            } else {
                S = ustat_sum(h, cfg, s);
            }
            double mag = 0.0;
            for (double x : S) mag += x * x;
            mag = std::sqrt(mag);
            acc += mag;
            if (rep < 32) {
                ReportRow r = row("simulate", "sum_magnitude", format_double(mag));
                r.n = ns;
                r.extra = "rep=" + std::to_string(rep);
                t.rows.push_back(r);
            }
        }
        ReportRow r = row("simulate", "mean_sum_magnitude", format_double(acc / cfg.reps));
        r.n = ns;
        r.extra = "reps=" + std::to_string(cfg.reps);
        t.rows.push_back(r);
    } else if (o.op == "moment") {
        if (o.p < 1.0) throw InputError("moment order p must be at least 1");
        SimReport mc = mc_moment(h, cfg, o.p, o.common.threads);
        for (const SimEntry& e : mc.entries) {
            ReportRow r = row("simulate", e.name, format_double(e.estimate));
            r.n = ns;
            r.p = format_double(o.p);
            r.extra = "half_width=" + format_double(e.half_width) + ";reps=" + std::to_string(mc.reps_used);
            t.rows.push_back(r);
        }
        bool integral = o.p == 2.0 || o.p == 4.0;
        if (integral && enumeration_feasible(h, o.n, kind)) {
            ReportRow r = row("simulate", "exact_moment",
                              format_double(exact_moment(h, o.n, static_cast<int>(o.p), kind)));
            r.n = ns;
            r.p = format_double(o.p);
            t.rows.push_back(r);
        }
    } else if (o.op == "tail") {
        if (o.t < 0.0) throw InputError("threshold t must be nonnegative");
        SimReport mc = mc_tail(h, cfg, o.t, o.common.threads);
        for (const SimEntry& e : mc.entries) {
            ReportRow r = row("simulate", e.name, format_double(e.estimate));
            r.n = ns;
            r.t = format_double(o.t);
            r.extra = "half_width=" + format_double(e.half_width) + ";reps=" + std::to_string(mc.reps_used);
            t.rows.push_back(r);
        }
        if (enumeration_feasible(h, o.n, kind)) {
            ReportRow r = row("simulate", "exact_tail_probability",
                              format_double(exact_tail_probability(h, o.n, kind, o.t)));
            r.n = ns;
            r.t = format_double(o.t);
            t.rows.push_back(r);
        }
    } else if (o.op == "lil") {
        LilSequence seq = lil_ratio_sequence(h, kind, o.nmax, o.common.reps, o.common.seed, o.common.threads);
        for (const LilLevel& lvl : seq.levels) {
            ReportRow r = row("simulate", "median_ratio", format_double(lvl.median_ratio));
            r.n = std::to_string(lvl.n);
            r.extra = "k=" + std::to_string(lvl.k);
            t.rows.push_back(r);
            r = row("simulate", "max_ratio", format_double(lvl.max_ratio));
            r.n = std::to_string(lvl.n);
            r.extra = "k=" + std::to_string(lvl.k);
            t.rows.push_back(r);
        }
        t.rows.push_back(row("simulate", "overall_max", format_double(seq.overall_max)));
        t.rows.push_back(row("simulate", "divergent", bool_str(seq.divergent)));
    } else {
        throw InputError("unknown simulate op '" + o.op + "'");
    }
    emit(t, o.common);
    return 0;
}

// ---- bounds -----------------------------------------------------------------

struct BoundsOpts {
    CommonOpts common;
    std::string op = "moment";
    int n = 4;
    double p = 2.0;
    double t = 1.0;
    std::string mode_text = "deterministic";
    double a = 1.0;
    double lambda = 0.5;
    bool verify = false;
};

int run_bounds(const BoundsOpts& o) {
    Kernel h = load_kernel(o.common.kernel_path);
    Table t;
    t.echo.emplace_back("command", "bounds");
    t.echo.emplace_back("kernel", o.common.kernel_path);
    t.echo.emplace_back("op", o.op);
    t.echo.emplace_back("n", std::to_string(o.n));
    if (o.op == "moment" || o.op == "decoupling") t.echo.emplace_back("p", format_double(o.p));
    if (o.op == "tail" || o.op == "pz") t.echo.emplace_back("t", format_double(o.t));
    if (o.op == "moment") t.echo.emplace_back("mode", o.mode_text);
    if (o.op == "pz") {
        t.echo.emplace_back("a", format_double(o.a));
        t.echo.emplace_back("lambda", format_double(o.lambda));
    }
    t.echo.emplace_back("verify", bool_str(o.verify));
    echo_common(t, o.common);

    CalibrationConstants consts = constants_from(o.common);
    const std::string ns = std::to_string(o.n);

    auto canonical_input = [&]() -> Kernel {
        // The moment and tail bounds assume a canonical kernel; project only
        // when needed so canonical inputs are used bit-exactly.
        if (is_canonical(h).canonical) {
            t.rows.push_back(row("bounds", "projected_first", "0"));
            return h;
        }
        t.rows.push_back(row("bounds", "projected_first", "1"));
        return hoeffding_project(h);
    };

    if (o.op == "moment") {
        if (o.p < 1.0) throw InputError("moment order p must be at least 1");
        EnvelopeMode mode;
        if (o.mode_text == "deterministic") {
            mode = EnvelopeMode::deterministic;
        } else if (o.mode_text == "stochastic") {
            mode = EnvelopeMode::stochastic;
        } else {
            throw InputError("unknown envelope mode '" + o.mode_text + "'");
        }
        Kernel hc = canonical_input();
        MomentBoundOptions mopts;
        mopts.norms = norm_options(o.common);
        mopts.envelope_reps = o.common.reps;
        mopts.seed = o.common.seed;
        mopts.threads = o.common.threads;
        BoundReport rep = moment_bound(hc, o.n, o.p, consts, mode, mopts);
        ReportRow r = row("bounds", "moment_bound", format_double(rep.bound_value));
        r.n = ns;
        r.p = format_double(o.p);
        t.rows.push_back(r);
        for (const BoundTerm& term : rep.terms) {
            ReportRow tr = row("bounds", "term", format_double(term.value));
            tr.spec = term.key;
            tr.n = ns;
            tr.p = format_double(o.p);
            t.rows.push_back(tr);
        }
        bool integral = o.p == 2.0 || o.p == 4.0;
        if (o.verify && integral && enumeration_feasible(hc, o.n, SampleKind::decoupled)) {
            double exact = exact_moment(hc, o.n, static_cast<int>(o.p), SampleKind::decoupled);
            ReportRow er = row("bounds", "exact_moment", format_double(exact));
            er.n = ns;
            er.p = format_double(o.p);
            t.rows.push_back(er);
            t.rows.push_back(row("bounds", "verified", bool_str(rep.bound_value >= exact)));
        }
    } else if (o.op == "tail") {
        if (o.t < 0.0) throw InputError("threshold t must be nonnegative");
        Kernel hc = canonical_input();
        NormOptions nopts = norm_options(o.common);
        TailBound canon = tail_bound_canonical(hc, o.n, o.t, consts, nopts);
        TailBound proj = tail_bound_projected(hc, o.n, o.t, consts, nopts);
        ReportRow r = row("bounds", "threshold", format_double(canon.threshold));
        r.n = ns;
        r.t = format_double(o.t);
        t.rows.push_back(r);
        r = row("bounds", "tail_bound_canonical", format_double(canon.bound));
        r.n = ns;
        r.t = format_double(o.t);
        t.rows.push_back(r);
        r = row("bounds", "tail_bound_projected", format_double(proj.bound));
        r.n = ns;
        r.t = format_double(o.t);
        t.rows.push_back(r);
        if (o.verify && enumeration_feasible(hc, o.n, SampleKind::decoupled)) {
            double exact = exact_tail_probability(hc, o.n, SampleKind::decoupled, canon.threshold);
            ReportRow er = row("bounds", "exact_tail_probability", format_double(exact));
            er.n = ns;
            er.t = format_double(o.t);
            t.rows.push_back(er);
            t.rows.push_back(row("bounds", "verified", bool_str(canon.bound >= exact)));
        }
    } else if (o.op == "variance") {
        double bound = variance_bound(h, o.n);
        ReportRow r = row("bounds", "variance_bound", format_double(bound));
        r.n = ns;
        t.rows.push_back(r);
        if (o.verify && enumeration_feasible(h, o.n, SampleKind::decoupled)) {
            ExactMoments em = exact_first_two_moments(h, o.n, SampleKind::decoupled);
            double mean2 = 0.0;
            for (double x : em.mean) mean2 += x * x;
            double exact = em.second_moment - mean2;
            ReportRow er = row("bounds", "exact_variance", format_double(exact));
            er.n = ns;
            t.rows.push_back(er);
            t.rows.push_back(row("bounds", "verified", bool_str(bound >= exact - 1e-12)));
        }
    } else if (o.op == "pz") {
        PzResult pz = pz_lower(h, o.n, o.a, o.t, o.lambda);
        t.rows.push_back(row("bounds", "applicable", bool_str(pz.applicable)));
        if (pz.applicable) {
            ReportRow r = row("bounds", "pz_lower_bound", format_double(pz.bound));
            r.n = ns;
            r.t = format_double(o.t);
            t.rows.push_back(r);
        } else {
            t.rows.push_back(row("bounds", "rejection", pz.rejection));
        }
        if (o.verify && pz.applicable && enumeration_feasible(h, o.n, SampleKind::decoupled)) {
            double thr = o.lambda * o.t * o.a;
            double exact = exact_tail_probability(h, o.n, SampleKind::decoupled, thr);
            ReportRow er = row("bounds", "exact_probability", format_double(exact));
            er.n = ns;
            er.t = format_double(o.t);
            t.rows.push_back(er);
            t.rows.push_back(row("bounds", "verified", bool_str(exact >= pz.bound - 1e-12)));
        }
    } else if (o.op == "decoupling") {
        if (o.p != 2.0 && o.p != 4.0) throw InputError("decoupling comparison expects p = 2 or 4");
        DecouplingComparison cmp = decoupling_comparison(h, o.n, static_cast<int>(o.p));
        ReportRow r = row("bounds", "lhs", format_double(cmp.lhs));
        r.n = ns;
        r.p = format_double(o.p);
        t.rows.push_back(r);
        r = row("bounds", "rhs", format_double(cmp.rhs));
        r.n = ns;
        r.p = format_double(o.p);
        t.rows.push_back(r);
        t.rows.push_back(row("bounds", "holds", bool_str(cmp.lhs <= cmp.rhs + 1e-12)));
    } else {
        throw InputError("unknown bounds op '" + o.op + "'");
    }
    emit(t, o.common);
    return 0;
}

// ---- lil-check --------------------------------------------------------------

struct LilCheckOpts {
    CommonOpts common;
    std::string u_grid_text;
    bool sim = false;
    int nmax = 8;
};

std::vector<double> parse_u_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        double u = parse_double(tok, "u-grid");
        if (u <= 0.0) throw InputError("u-grid entries must be positive");
        grid.push_back(u);
    }
    if (grid.empty()) throw InputError("u-grid must list at least one level");
    return grid;
}

int run_lil_check(const LilCheckOpts& o) {
    Kernel h = load_kernel(o.common.kernel_path);
    Table t;
    t.echo.emplace_back("command", "lil-check");
    t.echo.emplace_back("kernel", o.common.kernel_path);
    if (!o.u_grid_text.empty()) t.echo.emplace_back("u-grid", o.u_grid_text);
    t.echo.emplace_back("sim", bool_str(o.sim));
    if (o.sim) t.echo.emplace_back("nmax", std::to_string(o.nmax));
    echo_common(t, o.common);

    std::vector<double> grid = o.u_grid_text.empty() ? default_u_grid(h) : parse_u_grid(o.u_grid_text);
    LilSimOptions sopts;
    sopts.enabled = o.sim;
    sopts.n_max_exp = o.nmax;
    sopts.reps = o.common.reps;
    sopts.seed = o.common.seed;
    sopts.threads = o.common.threads;
    LilCertificate cert = lil_certificate(h, grid, constants_from(o.common), sopts, norm_options(o.common));

    t.rows.push_back(row("lil-check", "canonical", bool_str(cert.canonical.canonical)));
    t.rows.push_back(row("lil-check", "symmetric", bool_str(cert.symmetric)));
    t.rows.push_back(row("lil-check", "decoupled_only", bool_str(cert.decoupled_only)));
    t.rows.push_back(row("lil-check", "integrability", format_double(cert.integrability_value)));
    t.rows.push_back(row("lil-check", "d_star", format_double(cert.d_star)));
    if (cert.has_c_star) t.rows.push_back(row("lil-check", "c_star", format_double(cert.c_star)));
    for (const GrowthCurve& curve : cert.growth_curves) {
        for (const GrowthPoint& pt : curve.points) {
            ReportRow r = row("lil-check", "normalized_norm", format_double(pt.normalized));
            r.spec = to_string(curve.spec);
            r.u = format_double(pt.u);
            r.extra = "norm=" + format_double(pt.norm);
            t.rows.push_back(r);
            if (!pt.converged) {
                ReportRow w = row("lil-check", "warning", "solver did not converge");
                w.spec = to_string(curve.spec);
                w.u = format_double(pt.u);
                t.rows.push_back(w);
            }
        }
        ReportRow sr = row("lil-check", "saturation_u", format_double(curve.saturation_u));
        sr.spec = to_string(curve.spec);
        t.rows.push_back(sr);
    }
    emit(t, o.common);
    return 0;
}

// ---- selftest ---------------------------------------------------------------

struct SelftestCheck {
    std::string name;
    bool ok = false;
    std::string detail;
};

Kernel selftest_kernel(int d, int m, int q, std::uint64_t salt, bool project) {
    rng::Stream st = rng::Stream::from(7777, rng::kTagCalibration, salt);
    std::size_t cells = 1;
    for (int k = 0; k < d; ++k) cells *= static_cast<std::size_t>(m);
    std::vector<double> values(cells * static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = st.symmetric(i);
    std::vector<double> probs(static_cast<std::size_t>(m), 1.0 / m);
    Kernel h(d, m, q, std::move(values), DiscreteDistribution(std::move(probs)));
    return project ? hoeffding_project(h) : h;
}

std::vector<SelftestCheck> run_selftest_battery() {
    std::vector<SelftestCheck> out;
    auto check = [&](const std::string& name, const std::function<std::string()>& body) {
        SelftestCheck c;
        c.name = name;
        try {
            c.detail = body();
            c.ok = true;
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = e.what();
        }
        out.push_back(std::move(c));
    };

    check("partition_counts", []() -> std::string {
        // Bell triangle, computed right here as the oracle.
        std::vector<std::vector<unsigned long long>> tri{{1}};
        for (int r = 1; r <= 6; ++r) {
            std::vector<unsigned long long> rowv{tri.back().back()};
            for (unsigned long long x : tri.back()) rowv.push_back(rowv.back() + x);
            tri.push_back(std::move(rowv));
        }
        for (int d = 1; d <= 5; ++d) {
            unsigned long long bell = tri[static_cast<std::size_t>(d)][0];
            auto parts = enumerate_partitions(CoordSet::full(d));
            if (parts.size() != bell) throw InputError("partition count mismatch at d=" + std::to_string(d));
            unsigned long long bellNext = tri[static_cast<std::size_t>(d + 1)][0];
            auto specs = enumerate_partition_specs(d);
            if (specs.size() != bellNext) throw InputError("spec count mismatch at d=" + std::to_string(d));
        }
        return "d<=5";
    });

    check("projection_idempotent", []() -> std::string {
        Kernel h = selftest_kernel(2, 3, 2, 1, false);
        Kernel p1 = hoeffding_project(h);
        Kernel p2 = hoeffding_project(p1);
        double worst = 0.0;
        for (std::size_t i = 0; i < p1.raw().size(); ++i) {
            worst = std::max(worst, std::abs(p1.raw()[i] - p2.raw()[i]));
        }
        if (worst > 1e-12) throw InputError("idempotence gap " + format_double(worst));
        CanonicalReport rep = is_canonical(p1);
        if (!rep.canonical) throw InputError("projection not canonical");
        return "gap=" + format_double(worst);
    });

    check("closed_form_norm", []() -> std::string {
        Kernel h = selftest_kernel(2, 2, 1, 2, true);
        PartitionSpec spec;
        spec.K = CoordSet::full(2);
        NormResult res = norm_kj(h, spec);
        double want = std::sqrt(second_moment(h));
        if (std::abs(res.value - want) > 1e-9) {
            throw InputError("got " + format_double(res.value) + " want " + format_double(want));
        }
        return format_double(res.value);
    });

    check("truncated_norm_example", []() -> std::string {
        Kernel h(1, 2, 1, {-1.0, 3.0}, DiscreteDistribution({0.75, 0.25}));
        PartitionSpec spec;
        spec.J.blocks.push_back(CoordSet({1}));
        double at1 = norm_kju(h, spec, 1.0).value;
        double at2 = norm_kju(h, spec, 2.0).value;
        if (std::abs(at1 - 1.5) > 1e-9) throw InputError("u=1 gave " + format_double(at1));
        if (std::abs(at2 - std::sqrt(3.0)) > 1e-9) throw InputError("u=2 gave " + format_double(at2));
        return "u=1:" + format_double(at1) + ";u=2:" + format_double(at2);
    });

    check("chaos_degree_one", []() -> std::string {
        DenseArray a;
        a.d = 1;
        a.n = 5;
        a.v = {0.5, -1.0, 2.0, 0.0, -0.25};
        PartitionSpec spec;
        spec.K = CoordSet({1});
        double got = chaos_star_norm(a, spec, 3.0);
        double want = 0.0;
        for (double x : a.v) want += x * x;
        want = std::sqrt(want);
        if (std::abs(got - want) > 1e-12) {
            throw InputError("got " + format_double(got) + " want " + format_double(want));
        }
        return format_double(got);
    });

    check("exact_moment_identity", []() -> std::string {
        Kernel h = selftest_kernel(2, 2, 1, 3, true);
        int n = 3;
        double got = exact_moment(h, n, 2, SampleKind::decoupled);
        double want = std::pow(n, 2) * second_moment(h);
        if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want))) {
            throw InputError("got " + format_double(got) + " want " + format_double(want));
        }
        return format_double(got);
    });

    check("diagonal_split", []() -> std::string {
        Kernel h(2, 2, 1, {1.0, -2.0, -2.0, 3.0}, DiscreteDistribution({0.5, 0.5}));
        SampleConfig cfg;
        cfg.n = 5;
        cfg.reps = 8;
        cfg.kind = SampleKind::decoupled;
        for (int rep = 0; rep < cfg.reps; ++rep) {
            Sample s = draw_sample(h, cfg, rep);
            double full = ustat_sum(h, cfg, s)[0];
            double diag = diagonal_sum(h, cfg, s)[0];
            // Integer-valued kernel: the sums are exact, so the split must
            // hold with equality.
            double offdiag = full - diag;
            if (offdiag + diag != full) throw InputError("split failed at rep " + std::to_string(rep));
        }
        return "8 draws";
    });

    check("tail_bound_edges", []() -> std::string {
        Kernel h = selftest_kernel(2, 2, 1, 4, true);
        CalibrationConstants consts;
        TailBound at0 = tail_bound_canonical(h, 4, 0.0, consts);
        if (at0.bound != 1.0) throw InputError("t=0 bound " + format_double(at0.bound));
        TailBound a = tail_bound_canonical(h, 4, 1.0, consts);
        TailBound b = tail_bound_canonical(h, 4, 2.0, consts);
        if (b.bound > a.bound + 1e-15) throw InputError("not monotone in t");
        return "t=0:1;monotone";
    });

    check("decoupling_inequality", []() -> std::string {
        Kernel h = selftest_kernel(2, 2, 1, 5, false);
        DecouplingComparison cmp = decoupling_comparison(h, 3, 2);
        if (cmp.lhs > cmp.rhs + 1e-12) {
            throw InputError("lhs " + format_double(cmp.lhs) + " rhs " + format_double(cmp.rhs));
        }
        return format_double(cmp.lhs) + "<=" + format_double(cmp.rhs);
    });

    check("wilson_interval", []() -> std::string {
        Interval none = wilson95(0, 100);
        Interval all = wilson95(100, 100);
        if (none.low != 0.0 || none.high <= 0.0) throw InputError("empty-count interval wrong");
        if (all.high != 1.0 || all.low >= 1.0) throw InputError("full-count interval wrong");
        return "edges ok";
    });

    check("report_determinism", []() -> std::string {
        Table t;
        t.echo.emplace_back("command", "selftest");
        ReportRow r;
        r.command = "selftest";
        r.metric = "value";
        r.value = format_double(1.0 / 3.0);
        t.rows.push_back(r);
        if (to_csv(t) != to_csv(t)) throw InputError("csv not stable");
        if (to_text_summary(t) != to_text_summary(t)) throw InputError("summary not stable");
        double x = 1.0 / 3.0;
        if (parse_double(format_double(x), "x") != x) throw InputError("round trip failed");
        return "stable";
    });

    return out;
}

int run_selftest(const CommonOpts& common) {
    Table t;
    t.echo.emplace_back("command", "selftest");
    echo_common(t, common);
    std::vector<SelftestCheck> checks = run_selftest_battery();
    bool all_ok = true;
    for (const SelftestCheck& c : checks) {
        ReportRow r = row("selftest", c.name, c.ok ? "pass" : "fail");
        r.extra = c.detail;
        t.rows.push_back(r);
        all_ok = all_ok && c.ok;
    }
    t.rows.push_back(row("selftest", "all_checks", all_ok ? "pass" : "fail"));
    emit(t, common);
    return all_ok ? 0 : 4;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"discrete U-statistic laboratory"};
    app.require_subcommand(1);

    ProjectOpts project_opts;
    CLI::App* project_cmd = app.add_subcommand("project", "canonical projection and report");
    add_common_flags(project_cmd, &project_opts.common, true);
    project_cmd->add_option("--save", project_opts.save_path, "write the projected kernel here");

    NormsOpts norms_opts;
    CLI::App* norms_cmd = app.add_subcommand("norms", "partition norms, one spec or all");
    add_common_flags(norms_cmd, &norms_opts.common, true);
    norms_cmd->add_option("--spec", norms_opts.spec_text, "partition spec, e.g. \"K={1} J={{2}}\"");
    double u_value = 0.0;
    CLI::Option* u_opt = norms_cmd->add_option("--u", u_value, "truncation level");

    SimulateOpts sim_opts;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "sums, moments, tails, LIL ratios");
    add_common_flags(sim_cmd, &sim_opts.common, true);
    sim_cmd->add_option("--op", sim_opts.op, "sum, moment, tail, or lil")
        ->check(CLI::IsMember({"sum", "moment", "tail", "lil"}));
    sim_cmd->add_option("--kind", sim_opts.kind_text, "sample kind")
        ->check(CLI::IsMember({"undecoupled", "decoupled", "randomized_undecoupled", "randomized_decoupled"}));
    sim_cmd->add_option("--n", sim_opts.n, "sample size (default 4)")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--p", sim_opts.p, "moment order (default 2)");
    sim_cmd->add_option("--t", sim_opts.t, "tail threshold (default 1)");
    sim_cmd->add_option("--nmax", sim_opts.nmax, "dyadic exponent cap for lil (default 8)")
        ->check(CLI::PositiveNumber);

    BoundsOpts bounds_opts;
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "moment/tail/variance/PZ/decoupling bounds");
    add_common_flags(bounds_cmd, &bounds_opts.common, true);
    bounds_cmd->add_option("--op", bounds_opts.op, "moment, tail, variance, pz, or decoupling")
        ->check(CLI::IsMember({"moment", "tail", "variance", "pz", "decoupling"}));
    bounds_cmd->add_option("--n", bounds_opts.n, "sample size (default 4)")->check(CLI::PositiveNumber);
    bounds_cmd->add_option("--p", bounds_opts.p, "moment order (default 2)");
    bounds_cmd->add_option("--t", bounds_opts.t, "tail offset (default 1)");
    bounds_cmd->add_option("--mode", bounds_opts.mode_text, "envelope mode for moment")
        ->check(CLI::IsMember({"deterministic", "stochastic"}));
    bounds_cmd->add_option("--a", bounds_opts.a, "PZ scale parameter (default 1)");
    bounds_cmd->add_option("--lambda", bounds_opts.lambda, "PZ fraction in (0,1) (default 0.5)");
    bounds_cmd->add_flag("--verify", bounds_opts.verify, "add exact-enumeration comparison rows");

    LilCheckOpts lil_opts;
    CLI::App* lil_cmd = app.add_subcommand("lil-check", "growth-curve certificate");
    add_common_flags(lil_cmd, &lil_opts.common, true);
    lil_cmd->add_option("--u-grid", lil_opts.u_grid_text, "comma-separated truncation levels");
    lil_cmd->add_flag("--sim", lil_opts.sim, "also simulate a dyadic path envelope");
    lil_cmd->add_option("--nmax", lil_opts.nmax, "dyadic exponent cap (default 8)")->check(CLI::PositiveNumber);

    CommonOpts selftest_opts;
    CLI::App* selftest_cmd = app.add_subcommand("selftest", "oracle suite, exit 4 on failure");
    add_common_flags(selftest_cmd, &selftest_opts, false);

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ustatlab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(project_cmd)) return run_project(project_opts);
        if (app.got_subcommand(norms_cmd)) {
            if (u_opt->count() > 0) norms_opts.u = u_value;
            return run_norms(norms_opts);
        }
        if (app.got_subcommand(sim_cmd)) return run_simulate(sim_opts);
        if (app.got_subcommand(bounds_cmd)) return run_bounds(bounds_opts);
        if (app.got_subcommand(lil_cmd)) return run_lil_check(lil_opts);
        if (app.got_subcommand(selftest_cmd)) return run_selftest(selftest_opts);
        std::cerr << "input error: no subcommand selected\n";
        return 2;
    } catch (const GuardError& e) {
        std::cerr << "guard violation: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace ulab
