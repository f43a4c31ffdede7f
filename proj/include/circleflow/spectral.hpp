#pragma once

// Pseudo-spectral reference solver for u_t + (H(u) u)_x = nu u_xx on smooth
// positive data: classical RK4 in Fourier space, 2/3-rule dealiasing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "circleflow/circot.hpp"
#include "circleflow/fourier.hpp"
#include "circleflow/jko.hpp"
#include "circleflow/measure.hpp"

namespace circleflow {

struct SpectralState {
    GridDensity grid;
    double t = 0.0;
    double nu = 0.0;
    double dt = 0.0;
    std::size_t M = 0;
};

enum class SpectralStatus { completed, breakdown };

struct SpectralRun {
    std::vector<SpectralState> states;
    std::vector<double> l2_norm;        // ||u||_{L^2} at every step, index-aligned with step_times
    std::vector<double> step_times;
    SpectralStatus status = SpectralStatus::completed;
    double breakdown_time = std::numeric_limits<double>::quiet_NaN();
    double mass_drift = 0.0;            // max |u0^_0(t) - u0^_0(0)|
    std::string message;
};

/// 0.5 / (nu (M/2)^2 + M max|H(u0) u0|).
inline double spectral_dt_bound(const GridDensity& u0, double nu) {
    const auto h = hilbert_transform(u0);
    double flux = 0.0;
    for (std::size_t j = 0; j < u0.size(); ++j) flux = std::max(flux, std::abs(h[j] * u0[j]));
    const double m = static_cast<double>(u0.size());
    return 0.5 / (nu * 0.25 * m * m + m * flux);
}

namespace detail {

class SpectralRhs {
public:
    SpectralRhs(std::size_t m, double nu) : fft_(m), m_(m), nu_(nu), kcut_(m / 3) {}

    void truncate(std::vector<cplx>& c) const {
        for (std::size_t k = kcut_ + 1; k < c.size(); ++k) c[k] = 0.0;
        c[0] = c[0].real();
    }

    std::vector<cplx> operator()(const std::vector<cplx>& c) {
        std::vector<cplx> hc(c.size());
        for (std::size_t k = 1; k < c.size(); ++k) hc[k] = c[k] * cplx(0.0, -1.0);
        const auto u = fft_.backward(c);
        const auto hu = fft_.backward(hc);
        std::vector<double> prod(m_);
        for (std::size_t j = 0; j < m_; ++j) prod[j] = u[j] * hu[j];
        auto p = fft_.forward(prod);
        truncate(p);
        std::vector<cplx> out(c.size());
        for (std::size_t k = 1; k < c.size(); ++k) {
            const double kk = static_cast<double>(k);
            out[k] = -nu_ * kk * kk * c[k] - cplx(0.0, kk) * p[k];
        }
        return out;
    }

    std::vector<cplx> forward(std::span<const double> u) { return fft_.forward(u); }
    std::vector<double> backward(const std::vector<cplx>& c) { return fft_.backward(c); }

private:
    RealFft fft_;
    std::size_t m_;
    double nu_;
    std::size_t kcut_;
};

inline double l2_from_spectrum(const std::vector<cplx>& c, bool skip_mean) {
    double s = skip_mean ? 0.0 : std::norm(c[0]);
    for (std::size_t k = 1; k < c.size(); ++k) s += 2.0 * std::norm(c[k]);
    return std::sqrt(two_pi * s);
}

}  // namespace detail

/// Integrates to t_end, recording a state every `record_every` steps and at
/// the end. dt = 0 selects the stability bound; a larger dt is rejected. The
/// step is shortened so that a whole number of steps reaches t_end.
inline SpectralRun spectral_evolve(const GridDensity& u0, double nu, double dt, double t_end, std::size_t M,
                                   std::size_t record_every = 1) {
    if (!(nu > 0.0)) throw std::invalid_argument("spectral_evolve: nu must be > 0");
    if (u0.size() != M) throw std::invalid_argument("spectral_evolve: grid size does not match M");
    if (record_every < 1) throw std::invalid_argument("spectral_evolve: record_every must be >= 1");
    for (double v : u0.values())
        if (!(v > 0.0)) throw std::invalid_argument("spectral_evolve: initial density must be strictly positive");
    const double bound = spectral_dt_bound(u0, nu);
    if (dt == 0.0) dt = bound;
    if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12))
        throw std::invalid_argument("spectral_evolve: dt exceeds the stability bound " + std::to_string(bound));
    const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)));
    dt = t_end / static_cast<double>(steps);   // land exactly on t_end

    detail::SpectralRhs rhs(M, nu);
    auto c = rhs.forward(u0.values());
    rhs.truncate(c);
    const double mass0 = c[0].real();

    SpectralRun run;
    run.states.push_back({u0, 0.0, nu, dt, M});
    run.step_times.push_back(0.0);
    run.l2_norm.push_back(detail::l2_from_spectrum(c, false));

    std::vector<cplx> tmp(c.size());
    for (std::size_t n = 1; n <= steps; ++n) {
        const auto k1 = rhs(c);
        for (std::size_t k = 0; k < c.size(); ++k) tmp[k] = c[k] + 0.5 * dt * k1[k];
        const auto k2 = rhs(tmp);
        for (std::size_t k = 0; k < c.size(); ++k) tmp[k] = c[k] + 0.5 * dt * k2[k];
        const auto k3 = rhs(tmp);
        for (std::size_t k = 0; k < c.size(); ++k) tmp[k] = c[k] + dt * k3[k];
        const auto k4 = rhs(tmp);
        for (std::size_t k = 1; k < c.size(); ++k) c[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        rhs.truncate(c);

        const double t = static_cast<double>(n) * dt;
        run.mass_drift = std::max(run.mass_drift, std::abs(c[0].real() - mass0));
        const auto u = rhs.backward(c);
        double umin = std::numeric_limits<double>::infinity();
        bool finite = true;
        for (double v : u) {
            finite = finite && std::isfinite(v);
            umin = std::min(umin, v);
        }
        run.step_times.push_back(t);
        run.l2_norm.push_back(detail::l2_from_spectrum(c, false));
        if (!finite || umin < -1e-8) {
            run.status = SpectralStatus::breakdown;
            run.breakdown_time = t;
            run.message = "approaching breakdown";
            break;
        }
        if (n % record_every == 0 || n == steps) {
            std::vector<double> v(u);
            for (double& x : v) x = std::max(x, 0.0);
            run.states.push_back({GridDensity::normalized(std::move(v)), t, nu, dt, M});
        }
    }
    return run;
}

/// Squared L^2 distance of a grid density to the uniform density.
inline double l2_distance_to_uniform(const GridDensity& g) {
    double s = 0.0;
    for (double v : g.values()) s += (v - 1.0 / two_pi) * (v - 1.0 / two_pi);
    return std::sqrt(s * g.spacing());
}

struct BlowupReport {
    std::vector<double> times;
    std::vector<double> l2_norm;
    bool growth_detected = false;     // some window of strictly increasing L^2 norm
    double growth_start = std::numeric_limits<double>::quiet_NaN();
    SpectralStatus status = SpectralStatus::completed;
    double breakdown_time = std::numeric_limits<double>::quiet_NaN();
    bool in_blowup_regime = false;    // |a1| > nu
    bool pass = false;
};

/// Runs cosine data a0 + a1 cos x with a0 = 1/(2 pi) and reports whether the
/// L^2 norm increases over a window of at least `window` consecutive steps.
inline BlowupReport blowup_scenario(double a1, double nu, double t_end = 5.0, std::size_t M = 256,
                                    std::size_t window = 20) {
    if (!(std::abs(a1) < 1.0 / two_pi)) throw std::invalid_argument("blowup_scenario: need |a1| < 1/(2 pi)");
    if (!(nu > 0.0)) throw std::invalid_argument("blowup_scenario: nu must be > 0");
    const auto u0 = GridDensity::sample([a1](double x) { return 1.0 / two_pi + a1 * std::cos(x); }, M);
    const auto run = spectral_evolve(u0, nu, 0.0, t_end, M, 1u << 30);
    BlowupReport r;
    r.in_blowup_regime = std::abs(a1) > nu;
    r.times = run.step_times;
    r.l2_norm = run.l2_norm;
    r.status = run.status;
    r.breakdown_time = run.breakdown_time;
    std::size_t streak = 0;
    for (std::size_t i = 1; i < r.l2_norm.size(); ++i) {
        streak = (r.l2_norm[i] > r.l2_norm[i - 1] * (1.0 + 1e-14)) ? streak + 1 : 0;
        if (streak >= window && !r.growth_detected) {
            r.growth_detected = true;
            r.growth_start = r.times[i - streak];
        }
    }
    r.pass = r.growth_detected;
    return r;
}

struct CrossValidationReport {
    double sup_distance = 0.0;     // sup_t d_per(JKO, from_density(spectral))
    double tolerance = 5e-2;
    std::vector<double> times;
    std::vector<double> distances;
    bool applicable = true;
    bool pass = false;
};

/// Runs both solvers from the same data and compares at every
/// `compare_every`-th JKO step. The spectral step divides tau exactly.
inline CrossValidationReport cross_validate(const CellMeasure& m0, const GridDensity& u0, const SolverConfig& cfg,
                                            std::size_t compare_every = 10, double tolerance = 5e-2) {
    if (!(cfg.nu > 0.0)) throw std::invalid_argument("cross_validate: requires nu > 0");
    CrossValidationReport rep;
    rep.tolerance = tolerance;
    const double bound = spectral_dt_bound(u0, cfg.nu);
    const std::size_t sub = static_cast<std::size_t>(std::ceil(cfg.tau / bound));
    const double dt = cfg.tau / static_cast<double>(sub);
    const auto run = spectral_evolve(u0, cfg.nu, dt, cfg.t_end, u0.size(), sub * compare_every);
    if (run.status != SpectralStatus::completed) {
        rep.applicable = false;
        return rep;
    }
    const auto tr = evolve(m0, cfg);
    for (const auto& s : run.states) {
        const std::size_t k = static_cast<std::size_t>(std::llround(s.t / cfg.tau));
        if (k >= tr.size() || std::abs(static_cast<double>(k) * cfg.tau - s.t) > 1e-9) continue;
        const double d = dper(tr.snapshots[k], from_density(s.grid, m0.size()));
        rep.times.push_back(s.t);
        rep.distances.push_back(d);
        rep.sup_distance = std::max(rep.sup_distance, d);
    }
    rep.pass = rep.sup_distance <= tolerance;
    return rep;
}

inline CrossValidationReport cross_validate(const CellMeasure& m0, const SolverConfig& cfg, std::size_t M = 256,
                                            std::size_t compare_every = 10, double tolerance = 5e-2) {
    return cross_validate(m0, to_density(m0, M), cfg, compare_every, tolerance);
}

}  // namespace circleflow
