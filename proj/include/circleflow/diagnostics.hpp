#pragma once

// Trajectory-level checks: error bound against a refined run, contraction
// between two flows, and the vanishing-viscosity sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "circleflow/circot.hpp"
#include "circleflow/energy.hpp"
#include "circleflow/jko.hpp"

namespace circleflow {

/// 2 pi nu / e, the constant offsetting inf nu U.
inline double entropy_offset(double nu) { return two_pi * nu / std::exp(1.0); }

struct ErrorBoundReport {
    double tau = 0.0;
    double tau_ref = 0.0;
    double sup_dist2 = 0.0;
    double bound = 0.0;
    std::vector<double> times;
    std::vector<double> dist2;
    bool pass = false;
};

/// Compares evolve at tau against evolve at tau/refine (the reference) at
/// the coarse times and checks sup d^2 <= tau (F(m0) + 2 pi nu / e).
inline ErrorBoundReport error_bound_check(const CellMeasure& m0, const SolverConfig& cfg, int refine = 8) {
    const EnergyReport e0 = free_energy(m0, cfg.nu, cfg.coeff);
    if (!std::isfinite(e0.total)) throw std::invalid_argument("error_bound_check: initial energy is infinite");
    SolverConfig fine = cfg;
    fine.tau = cfg.tau / refine;
    fine.inner.step_init = cfg.inner.step_init > 0.0 ? cfg.inner.step_init / refine : 0.0;
    const auto a = evolve(m0, cfg);
    const auto b = evolve(m0, fine);
    ErrorBoundReport r;
    r.tau = cfg.tau;
    r.tau_ref = fine.tau;
    r.bound = cfg.tau * (e0.total + entropy_offset(cfg.nu));
    for (std::size_t k = 0; k < a.size(); ++k) {
        const std::size_t j = k * static_cast<std::size_t>(refine);
        if (j >= b.size()) break;
        const double d2 = dper2_quantile(a.snapshots[k], b.snapshots[j]);
        r.times.push_back(a.times[k]);
        r.dist2.push_back(d2);
        r.sup_dist2 = std::max(r.sup_dist2, d2);
    }
    r.pass = r.sup_dist2 <= r.bound;
    return r;
}

struct ContractionReport {
    double initial_distance = 0.0;
    double max_excess = 0.0;       // max_t d(mu_t, rho_t) - d(mu_0, rho_0)
    double slack = 1e-4;
    std::vector<double> times;
    std::vector<double> distances;
    bool pass = false;
};

inline ContractionReport contraction_check(const CellMeasure& m0, const CellMeasure& r0, const SolverConfig& cfg,
                                           double slack = 1e-4) {
    const auto a = evolve(m0, cfg);
    const auto b = evolve(r0, cfg);
    ContractionReport r;
    r.slack = slack;
    r.initial_distance = dper(m0, r0);
    r.max_excess = -r.initial_distance;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        const double d = dper(a.snapshots[k], b.snapshots[k]);
        r.times.push_back(a.times[k]);
        r.distances.push_back(d);
        r.max_excess = std::max(r.max_excess, d - r.initial_distance);
    }
    r.pass = r.max_excess <= slack;
    return r;
}

struct InviscidReport {
    std::vector<double> nus;
    std::vector<double> errors;    // e(nu) = sup_t d(mu^nu_t, mu^0_t)
    double slack = 0.2;
    bool pass = false;
};

/// nus must be strictly decreasing and end at 0; the last run is the reference.
inline InviscidReport inviscid_sweep(const CellMeasure& m0, const std::vector<double>& nus, const SolverConfig& cfg,
                                     double slack = 0.2) {
    if (nus.empty() || nus.back() != 0.0) throw std::invalid_argument("inviscid_sweep: list must end at nu = 0");
    for (std::size_t i = 1; i < nus.size(); ++i)
        if (!(nus[i] < nus[i - 1])) throw std::invalid_argument("inviscid_sweep: nus must be strictly decreasing");
    SolverConfig c0 = cfg;
    c0.nu = 0.0;
    const auto ref = evolve(m0, c0);
    InviscidReport r;
    r.nus = nus;
    r.slack = slack;
    for (double nu : nus) {
        if (nu == 0.0) {
            r.errors.push_back(0.0);
            continue;
        }
        SolverConfig c = cfg;
        c.nu = nu;
        const auto tr = evolve(m0, c);
        double e = 0.0;
        for (std::size_t k = 0; k < std::min(tr.size(), ref.size()); ++k)
            e = std::max(e, dper(tr.snapshots[k], ref.snapshots[k]));
        r.errors.push_back(e);
    }
    r.pass = true;
    for (std::size_t i = 1; i < r.errors.size(); ++i)
        if (r.errors[i] > (1.0 + slack) * r.errors[i - 1]) r.pass = false;
    return r;
}

}  // namespace circleflow
