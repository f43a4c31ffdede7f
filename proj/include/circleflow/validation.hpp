#pragma once

// The acceptance suite: one check per criterion, each reporting pass/fail
// with the measured quantities. Shared by the acceptance binary and the
// CLI "validate" command.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "circleflow/circot.hpp"
#include "circleflow/config.hpp"
#include "circleflow/diagnostics.hpp"
#include "circleflow/energy.hpp"
#include "circleflow/fourier.hpp"
#include "circleflow/initial_data.hpp"
#include "circleflow/jko.hpp"
#include "circleflow/random.hpp"
#include "circleflow/spectral.hpp"
#include "circleflow/weak_form.hpp"

namespace circleflow {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace validation {

inline std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

inline SolverConfig fast_solver(double nu, double tau, double t_end, std::size_t n) {
    SolverConfig c;
    c.nu = nu;
    c.tau = tau;
    c.t_end = t_end;
    c.N = n;
    c.inner.method = InnerMethod::lbfgs;
    return c;
}

inline CriterionResult oracle_equivalence() {
    CriterionResult r{1, "OT oracle equivalence", false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial) % 7;
        const auto a = random_atoms(rng, n), b = random_atoms(rng, n);
        worst = std::max(worst, std::abs(dper2(a, b) - dper2_oracle(a, b, OracleMode::exhaustive)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = worst <= 1e-10 && secs < 5.0;
    r.detail = fmt("200 pairs N=2..8: max |dper2 - oracle| = %.3e (tol 1e-10), %.2f s (limit 5 s)", worst, secs);
    return r;
}

inline CriterionResult metric_axioms() {
    CriterionResult r{2, "metric axioms", false, "", 0.0};
    Rng rng(202);
    double sym = 0.0, tri = 0.0, self = 0.0, minpos = 1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_atoms(rng, 32), b = random_atoms(rng, 32), c = random_atoms(rng, 32);
        const double ab = std::sqrt(dper2(a, b)), ba = std::sqrt(dper2(b, a));
        const double bc = std::sqrt(dper2(b, c)), ac = std::sqrt(dper2(a, c));
        sym = std::max(sym, std::abs(ab - ba));
        tri = std::max(tri, ac - (ab + bc));
        self = std::max(self, std::sqrt(dper2(a, a)));
        minpos = std::min(minpos, ab);
    }
    r.pass = sym <= 1e-12 && tri <= 1e-10 && self == 0.0 && minpos > 0.0;
    r.detail = fmt("100 triples N=32: symmetry %.3e (tol 1e-12), triangle excess %.3e (tol 1e-10), d(a,a) max %.1e, "
                   "min d(a,b) %.3e",
                   sym, tri, self, minpos);
    return r;
}

inline CriterionResult geodesic_speed() {
    CriterionResult r{3, "geodesic constant speed", false, "", 0.0};
    Rng rng(303);
    const double ts[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_atoms(rng, 16), b = random_atoms(rng, 16);
        const double d = std::sqrt(dper2(a, b));
        std::vector<AtomMeasure> pts;
        for (double t : ts) pts.push_back(geodesic(a, b, t));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i + 1; j < 5; ++j)
                worst = std::max(worst, std::abs(std::sqrt(dper2(pts[i], pts[j])) - (ts[j] - ts[i]) * d));
    }
    r.pass = worst <= 1e-8;
    r.detail = fmt("20 pairs N=16, times {0,1/4,1/2,3/4,1}: max |d(s,t) - |t-s| d| = %.3e (tol 1e-8)", worst);
    return r;
}

inline CriterionResult hilbert_checks() {
    CriterionResult r{4, "Hilbert transform", false, "", 0.0};
    double worst = 0.0;
    const std::size_t m = 256;
    for (int k = 1; k <= 8; ++k) {
        std::vector<double> c(m), s(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double x = GridDensity::node(j, m);
            c[j] = std::cos(k * x);
            s[j] = std::sin(k * x);
        }
        const auto hc = hilbert_transform(c), hs = hilbert_transform(s);
        for (std::size_t j = 0; j < m; ++j) {
            worst = std::max(worst, std::abs(hc[j] - s[j]));
            worst = std::max(worst, std::abs(hs[j] + c[j]));
        }
    }
    const std::size_t mp = 1024;
    double pv = 0.0;
    const std::vector<std::function<double(double)>> fs{
        [](double x) { return (1.0 + 0.2 * std::cos(x)) / two_pi; },
        [](double x) { return std::exp(std::sin(x)); },
        [](double x) { return std::cos(3.0 * x) + 0.5 * std::sin(5.0 * x); }};
    for (const auto& f : fs) {
        std::vector<double> u(mp);
        for (std::size_t j = 0; j < mp; ++j) u[j] = f(GridDensity::node(j, mp));
        const auto a = hilbert_transform(u), b = hilbert_transform_pv(u);
        for (std::size_t j = 0; j < mp; ++j) pv = std::max(pv, std::abs(a[j] - b[j]));
    }
    r.pass = worst <= 1e-12 && pv <= 1e-4;
    r.detail = fmt("multiplier max error k<=8, M=256: %.3e (tol 1e-12); PV quadrature vs multiplier at M=1024: %.3e "
                   "(tol 1e-4)",
                   worst, pv);
    return r;
}

inline CriterionResult energy_anchors() {
    CriterionResult r{5, "analytic energy anchors", false, "", 0.0};
    const double ent = std::abs(entropy(uniform_measure(256)) + std::log(two_pi));
    const double exact = std::log(2.0) / pi;
    const double e128 = std::abs(interaction(uniform_measure(128), 1.0) - exact);
    const double e256 = std::abs(interaction(uniform_measure(256), 1.0) - exact);
    const double e512 = std::abs(interaction(uniform_measure(512), 1.0) - exact);
    const double q1 = e256 / e128, q2 = e512 / e256;
    r.pass = ent <= 1e-9 && e256 <= 2e-3 && std::abs(q1 - 0.5) <= 0.1 && std::abs(q2 - 0.5) <= 0.1;
    r.detail = fmt("|entropy + log 2pi| = %.2e (tol 1e-9); interaction error at N=256 %.3e (tol 2e-3); error ratios "
                   "under doubling %.4f, %.4f (target 0.5 +- 0.1)",
                   ent, e256, q1, q2);
    return r;
}

inline CriterionResult convexity_suite() {
    CriterionResult r{6, "convexity along generalized geodesics", false, "", 0.0};
    Rng rng(606);
    const double ts[] = {0.25, 0.5, 0.75};
    const double nus[] = {0.0, 0.1, 1.0};
    double f_excess = -1e300, d_excess = -1e300, chain = -1e300;
    for (int trial = 0; trial < 100; ++trial) {
        const AtomMeasure w = random_atoms(rng, 12), a = random_atoms(rng, 12), b = random_atoms(rng, 12);
        const double dwa = dper2(w, a), dwb = dper2(w, b), dab = dper2(a, b);
        const CellMeasure cw = mollify(w), ca = mollify(a), cb = mollify(b);
        const double nu = nus[trial % 3];
        const double fa = free_energy(ca, nu).total, fb = free_energy(cb, nu).total;
        for (double t : ts) {
            const auto g = generalized_geodesic(w, a, b, t);
            d_excess = std::max(d_excess, dper2(w, g.measure) - ((1 - t) * dwa + t * dwb - t * (1 - t) * g.dgamma2));
            chain = std::max(chain, dab - g.dgamma2);
            const auto gc = generalized_geodesic(cw, ca, cb, t);
            f_excess = std::max(f_excess, free_energy(gc.measure, nu).total - ((1 - t) * fa + t * fb));
        }
    }
    r.pass = f_excess <= 1e-6 && d_excess <= 1e-6 && chain <= 1e-10;
    r.detail = fmt("100 triples, t in {1/4,1/2,3/4}: F 0-convexity excess %.3e (tol 1e-6); d^2 2-convexity excess %.3e "
                   "(tol 1e-6); max dper2 - dgamma2 = %.3e (tol 1e-10)",
                   f_excess, d_excess, chain);
    return r;
}

/// Evolve configurations used when no bundle directory is supplied.
inline std::vector<ExperimentConfig> default_bundle() {
    std::vector<ExperimentConfig> out;
    auto add = [&](InitialKind kind, double a1, double nu, double tau, double t_end, std::size_t n) {
        ExperimentConfig c;
        c.command = "evolve";
        c.solver = fast_solver(nu, tau, t_end, n);
        c.initial.kind = kind;
        c.initial.a1 = a1;
        out.push_back(c);
    };
    add(InitialKind::cosine, 0.1, 0.1, 0.02, 5.0, 128);
    add(InitialKind::uniform, 0.0, 0.1, 0.02, 1.0, 128);
    add(InitialKind::dirac, 0.0, 0.0, 0.02, 1.0, 64);
    return out;
}

inline std::vector<ExperimentConfig> load_bundle(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<ExperimentConfig> out;
    for (const auto& f : files) {
        auto c = load_config(f);
        if (c.command == "evolve") out.push_back(std::move(c));
    }
    return out;
}

inline CriterionResult jko_structure(const std::vector<ExperimentConfig>& bundle) {
    CriterionResult r{7, "JKO structure", false, "", 0.0};
    double step_excess = -1e300, tele_excess = -1e300;
    std::size_t steps = 0;
    for (const auto& c : bundle) {
        const auto m0 = initial_data(c.initial, c.solver.N);
        const auto tr = evolve(m0, c.solver);
        const double inf_f = free_energy(uniform_measure(m0.size()), c.solver.nu, c.solver.coeff).total;
        double sum = 0.0;
        for (std::size_t k = 1; k < tr.size(); ++k) {
            const double lhs = tr.energies[k].total + tr.step_costs[k] / (2.0 * c.solver.tau);
            step_excess = std::max(step_excess, lhs - tr.energies[k - 1].total);
            sum += tr.step_costs[k] / (2.0 * c.solver.tau);
            ++steps;
        }
        tele_excess = std::max(tele_excess, sum - (tr.energies.front().total - inf_f));
    }

    SolverConfig cfg = fast_solver(0.1, 0.02, 0.02, 64);
    const auto u = uniform_measure(64);
    const double fixed = dper2_quantile(u, jko_step(cfg.tau, u, cfg));

    Rng rng(707);
    double fd = 0.0;
    const CellMeasure prev = cosine_measure(0.1, 32);
    cfg.N = 32;
    for (int trial = 0; trial < 5; ++trial) {
        auto cand = encode_candidate(prev);
        for (double& v : cand) v += uniform_real(rng, -0.05, 0.05);
        const auto g = jko_objective(0.05, prev, cand, cfg).gradient;
        double gmax = 0.0, emax = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            auto p = cand, q = cand;
            p[i] += 1e-6;
            q[i] -= 1e-6;
            const double num = (jko_objective(0.05, prev, p, cfg).value - jko_objective(0.05, prev, q, cfg).value) / 2e-6;
            gmax = std::max(gmax, std::abs(g[i]));
            emax = std::max(emax, std::abs(num - g[i]));
        }
        fd = std::max(fd, emax / gmax);
    }
    r.pass = !bundle.empty() && step_excess <= 1e-8 && tele_excess <= 1e-6 && fixed <= 1e-10 && fd <= 1e-5;
    r.detail = fmt("%zu bundled runs, %zu steps: max per-step excess %.3e (tol 1e-8), telescoping excess %.3e (tol 1e-6); "
                   "uniform fixed point dper2 %.3e (tol 1e-10); gradient vs central differences rel %.3e (tol 1e-5)",
                   bundle.size(), steps, step_excess, tele_excess, fixed, fd);
    return r;
}

inline CriterionResult long_time_decay() {
    CriterionResult r{8, "decay to the minimizer", false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = fast_solver(0.1, 0.02, 20.0, 128);
    const auto tr = evolve(cosine_measure(0.1 * (1.0 / two_pi) / 0.15, 128), cfg);
    const auto u = minimizer(cfg);
    double rise = -1e300, prev = 1e300, last = 0.0;
    for (const auto& s : tr.snapshots) {
        last = dper(s, u);
        rise = std::max(rise, last - prev);
        prev = last;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = rise <= 1e-4 && last <= 1e-2 && secs < 60.0;
    r.detail = fmt("max increase of dist_to_minimizer %.3e (slack 1e-4); distance at t=20 %.3e (tol 1e-2); %.1f s "
                   "(limit 60 s)",
                   std::max(rise, 0.0), last, secs);
    return r;
}

inline CriterionResult error_bound() {
    CriterionResult r{9, "error bound", false, "", 0.0};
    bool ok = true;
    std::string d;
    for (double tau : {0.1, 0.05}) {
        const auto rep = error_bound_check(cosine_measure(0.1, 128), fast_solver(0.1, tau, 1.0, 128));
        ok = ok && rep.pass;
        d += fmt("tau=%g: sup d^2 %.3e <= bound %.3e; ", tau, rep.sup_dist2, rep.bound);
    }
    r.pass = ok;
    r.detail = d + "cosine a1=0.1, nu=0.1, t<=1, reference tau/8";
    return r;
}

inline CriterionResult contraction() {
    CriterionResult r{10, "contraction", false, "", 0.0};
    const auto rep = contraction_check(cosine_measure(0.1, 128), cosine_measure(-0.05, 128), fast_solver(0.1, 0.02, 5.0, 128));
    r.pass = rep.pass;
    r.detail = fmt("cosine a1=0.1 vs a1=-0.05, nu=0.1, t<=5: d0 = %.6f, max d(t) - d0 = %.3e (slack 1e-4)",
                   rep.initial_distance, rep.max_excess);
    return r;
}

inline CriterionResult inviscid_limit() {
    CriterionResult r{11, "inviscid limit", false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = inviscid_sweep(cosine_measure(0.3 / two_pi, 128), {0.2, 0.1, 0.05, 0.0}, fast_solver(0.0, 0.02, 1.0, 128));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.pass = rep.pass && secs < 90.0;
    r.detail = fmt("e(0.2) = %.4e, e(0.1) = %.4e, e(0.05) = %.4e (each <= 1.2 x previous); %.1f s (limit 90 s)",
                   rep.errors[0], rep.errors[1], rep.errors[2], secs);
    return r;
}

inline CriterionResult singularity_escape() {
    CriterionResult r{12, "escape from concentrated data", false, "", 0.0};
    const auto tr = evolve(dirac_measure(1e-3, 64), fast_solver(0.0, 0.02, 5 * 0.02, 64));
    bool ok = tr.size() == 6;
    std::string widths, dens;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (k > 0) {
            ok = ok && tr.snapshots[k].min_width() > tr.snapshots[k - 1].min_width();
            ok = ok && tr.snapshots[k].max_density() < tr.snapshots[k - 1].max_density();
        }
        widths += fmt("%s%.3e", k ? " " : "", tr.snapshots[k].min_width());
        dens += fmt("%s%.3g", k ? " " : "", tr.snapshots[k].max_density());
    }
    r.pass = ok;
    r.detail = "dirac eps=1e-3, N=64, nu=0, tau=0.02: min width [" + widths + "], sup density [" + dens + "]";
    return r;
}

inline CriterionResult cantor_finiteness() {
    CriterionResult r{13, "Cantor energy finiteness", false, "", 0.0};
    std::vector<double> f;
    for (int n = 3; n <= 8; ++n) f.push_back(interaction(cantor_measure(n), 1.0));
    bool ok = true;
    double ratio = 0.0;
    std::string vals;
    for (std::size_t i = 0; i < f.size(); ++i) {
        ok = ok && std::isfinite(f[i]);
        vals += fmt("%s%.6f", i ? " " : "", f[i]);
        if (i >= 2) {
            const double prev = std::abs(f[i - 1] - f[i - 2]), cur = std::abs(f[i] - f[i - 1]);
            ok = ok && cur < prev;
            ratio = std::max(ratio, cur / prev);
        }
    }
    const double tail = ratio < 1.0 ? f.back() + std::abs(f.back() - f[f.size() - 2]) * ratio / (1.0 - ratio) : INFINITY;
    r.pass = ok && ratio < 1.0;
    r.detail = "F0 for n=3..8: [" + vals + fmt("]; max increment ratio %.3f; geometric tail bound %.6f", ratio, tail);
    return r;
}

// The residual carries an O(tau) time error and an O(1/N^2) space error of
// opposite sign, so coarse ladders pass through cancellations. The ladder
// starts where the time error dominates and the first-order rate is visible.
inline CriterionResult weak_form() {
    CriterionResult r{14, "weak formulation", false, "", 0.0};
    double tau = 0.02;
    std::size_t n = 256;
    std::vector<std::array<double, 3>> res;
    for (int level = 0; level < 3; ++level) {
        const auto tr = evolve(cosine_measure(0.1, n), fast_solver(0.5, tau, 0.15, n));
        res.push_back({weak_form_residual(tr, 1, 0.1), weak_form_residual(tr, 2, 0.1), weak_form_residual(tr, 3, 0.1)});
        tau /= 2.0;
        n *= 2;
    }
    double min_order = 1e300;
    std::string d;
    for (int k = 0; k < 3; ++k) {
        d += fmt("k=%d residuals", k + 1);
        for (std::size_t l = 0; l < res.size(); ++l) {
            d += fmt(" %.2e", res[l][k]);
            if (l > 0) min_order = std::min(min_order, std::log2(res[l - 1][k] / res[l][k]));
        }
        d += "; ";
    }
    r.pass = min_order >= 0.8;
    r.detail = d + fmt("(tau,N) from (0.02,256) halved twice, t=0.1, nu=0.5: min observed order %.3f (>= 0.8)", min_order);
    return r;
}

inline CriterionResult cross_validation() {
    CriterionResult r{15, "cross-validation with the spectral solver", false, "", 0.0};
    InitialData d;
    d.kind = InitialKind::cosine;
    d.a1 = 0.2 / two_pi;
    const auto rep = cross_validate(initial_data(d, 128), initial_grid(d, 256, 128), fast_solver(0.5, 1e-3, 0.5, 128));
    r.pass = rep.applicable && rep.pass;
    r.detail = fmt("cosine a1=0.2/(2pi), nu=0.5, t<=0.5, N=128, tau=1e-3, M=256: sup d_per = %.3e (tol 5e-2)",
                   rep.sup_distance);
    return r;
}

}  // namespace validation

/// Runs every criterion in order; `report` is called after each one.
inline std::vector<CriterionResult> run_acceptance(const std::vector<ExperimentConfig>& bundle,
                                                   const std::function<void(const CriterionResult&)>& report = {}) {
    using namespace validation;
    const std::vector<std::function<CriterionResult()>> checks{
        oracle_equivalence, metric_axioms,  geodesic_speed,     hilbert_checks,
        energy_anchors,     convexity_suite, [&] { return jko_structure(bundle); },
        long_time_decay,    error_bound,    contraction,        inviscid_limit,
        singularity_escape, cantor_finiteness, weak_form,       cross_validation};
    std::vector<CriterionResult> out;
    for (const auto& c : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = c();
        } catch (const std::exception& e) {
            r.id = static_cast<int>(out.size()) + 1;
            r.name = "criterion " + std::to_string(r.id);
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (report) report(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format_criterion(const CriterionResult& r) {
    return validation::fmt("[%s] %2d %s: %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(),
                           r.seconds);
}

}  // namespace circleflow
