#pragma once

// Minimizing-movement scheme
//
//   mu^k = argmin_rho  (1/2tau) d^2(mu^{k-1}, rho) + F_nu(rho)
//
// over cell measures with the cell count of mu^{k-1}. Candidates are
// parametrised by their cell boundaries ("knots"). The transport term is the
// exact cost of the best lattice matching (cell i onto cell i+q, affinely),
// which is the periodic W2 cost restricted to quantile shifts in Z/N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "circleflow/circot.hpp"
#include "circleflow/energy.hpp"
#include "circleflow/measure.hpp"
#include "circleflow/trajectory.hpp"

namespace circleflow {

namespace detail {

inline double inf_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// One JKO subproblem. Closed layout: knots L_0..L_{N-1}, cell i = [L_i, L_{i+1}],
// L_N = L_0 + 2 pi. Open layout (supports with a single gap): knots L_0..L_N,
// cell i = [L_i, L_{i+1}], and the gap L_0 + 2 pi - L_N must stay >= 0.
class JkoProblem {
public:
    JkoProblem(const CellMeasure& prev, double tau, double nu, double coeff, bool closed)
        : n_(prev.size()), closed_(closed), tau_(tau), nu_(nu), coeff_(coeff) {
        if (!(tau > 0.0)) throw std::invalid_argument("jko: tau must be > 0");
        std::size_t first = 0;
        if (!closed) {
            const std::size_t gaps = prev.gap_count(1e-9);
            if (gaps > 1) throw std::invalid_argument("jko: supports with more than one gap are not supported");
            for (std::size_t i = 0; i < n_; ++i)
                if (prev.gap_after(i) > 1e-9 * two_pi) first = (i + 1) % n_;
        }
        pl_.resize(n_);
        pr_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i = (first + k) % n_;
            const double lift = (first + k >= n_) ? two_pi : 0.0;
            pl_[k] = prev.left(i) + lift;
            pr_[k] = prev.right(i) + lift;
        }
        lefts_.resize(n_);
        rights_.resize(n_);
        gl_.resize(n_);
        gr_.resize(n_);
    }

    std::size_t cells() const { return n_; }
    std::size_t dim() const { return closed_ ? n_ : n_ + 1; }
    bool closed() const { return closed_; }
    long shift() const { return shift_; }

    std::vector<double> initial_knots() const {
        std::vector<double> x(dim());
        for (std::size_t i = 0; i < n_; ++i) x[i] = pl_[i];
        if (!closed_) x[n_] = pr_[n_ - 1];
        return x;
    }

    /// Inverse lumped W2 mass matrix of the knot velocities.
    std::vector<double> preconditioner() const {
        std::vector<double> p(dim(), static_cast<double>(n_));
        if (!closed_) {
            p.front() = 2.0 * static_cast<double>(n_);
            p.back() = 2.0 * static_cast<double>(n_);
        }
        return p;
    }

    /// Objective value; +inf for infeasible knots. grad (size dim) may be null.
    double evaluate(std::span<const double> x, double* grad) {
        if (!unpack(x)) return std::numeric_limits<double>::infinity();
        update_shift();
        std::fill(gl_.begin(), gl_.end(), 0.0);
        std::fill(gr_.begin(), gr_.end(), 0.0);
        double* gl = grad ? gl_.data() : nullptr;
        double* gr = grad ? gr_.data() : nullptr;
        const CellGeometry g{lefts_, rights_};

        const double transport = transport_cost(shift_, gl, gr) / (2.0 * tau_);
        double ent = 0.0;
        if (nu_ > 0.0) {
            std::vector<double> el(grad ? n_ : 0, 0.0), er(grad ? n_ : 0, 0.0);
            ent = entropy(g, grad ? el.data() : nullptr, grad ? er.data() : nullptr);
            if (grad)
                for (std::size_t i = 0; i < n_; ++i) {
                    gl_[i] += nu_ * el[i];
                    gr_[i] += nu_ * er[i];
                }
        }
        std::vector<double> il(grad ? n_ : 0, 0.0), ir(grad ? n_ : 0, 0.0);
        const double inter = interaction_unit(g, grad ? il.data() : nullptr, grad ? ir.data() : nullptr);
        if (grad) {
            for (std::size_t i = 0; i < n_; ++i) {
                gl_[i] += coeff_ * il[i];
                gr_[i] += coeff_ * ir[i];
            }
            for (std::size_t k = 0; k < dim(); ++k) grad[k] = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                grad[i] += gl_[i];
                const std::size_t j = i + 1;
                if (j < n_)
                    grad[j] += gr_[i];
                else if (closed_)
                    grad[0] += gr_[i];
                else
                    grad[n_] += gr_[i];
            }
        }
        const double v = transport + nu_ * ent + coeff_ * inter;
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }

    /// Largest boundary displacement under the current matching.
    double max_displacement(std::span<const double> x) {
        if (!unpack(x)) return std::numeric_limits<double>::infinity();
        update_shift();
        const long ln = static_cast<long>(n_);
        double d = 0.0;
        for (long i = 0; i < ln; ++i) {
            const std::size_t j = positive_mod(i + shift_, ln);
            const double lift = two_pi * static_cast<double>(floor_div(i + shift_, ln));
            const std::size_t u = static_cast<std::size_t>(i);
            d = std::max({d, std::abs(lefts_[u] - pl_[j] - lift), std::abs(rights_[u] - pr_[j] - lift)});
        }
        return d;
    }

    CellMeasure to_measure(std::span<const double> x) {
        if (!unpack(x)) throw std::domain_error("jko: infeasible knot vector");
        std::vector<double> w(n_);
        for (std::size_t i = 0; i < n_; ++i) w[i] = rights_[i] - lefts_[i];
        return CellMeasure::from_cells(lefts_, std::move(w));
    }

private:
    bool unpack(std::span<const double> x) {
        if (x.size() != dim()) throw std::invalid_argument("jko: knot vector has wrong length");
        for (std::size_t i = 0; i < n_; ++i) {
            lefts_[i] = x[i];
            rights_[i] = (i + 1 < n_) ? x[i + 1] : (closed_ ? x[0] + two_pi : x[n_]);
            if (!(rights_[i] > lefts_[i]) || !std::isfinite(rights_[i])) return false;
        }
        if (!closed_ && !(x[n_] <= x[0] + two_pi)) return false;
        return true;
    }

    double transport_cost(long q, double* gl, double* gr) const {
        const long ln = static_cast<long>(n_);
        const double dn = static_cast<double>(n_);
        double c = 0.0;
        for (long i = 0; i < ln; ++i) {
            const std::size_t j = positive_mod(i + q, ln);
            const double lift = two_pi * static_cast<double>(floor_div(i + q, ln));
            const std::size_t u = static_cast<std::size_t>(i);
            const double a = lefts_[u] - (pl_[j] + lift);
            const double b = rights_[u] - (pr_[j] + lift);
            c += (a * a + a * b + b * b) / 3.0;
            if (gl) {
                gl[u] += (2.0 * a + b) / (3.0 * dn * 2.0 * tau_);
                gr[u] += (a + 2.0 * b) / (3.0 * dn * 2.0 * tau_);
            }
        }
        return c / dn;
    }

    void update_shift() {
        double c = transport_cost(shift_, nullptr, nullptr);
        for (;;) {
            const double down = transport_cost(shift_ - 1, nullptr, nullptr);
            const double up = transport_cost(shift_ + 1, nullptr, nullptr);
            if (down < c && down <= up) {
                --shift_;
                c = down;
            } else if (up < c) {
                ++shift_;
                c = up;
            } else {
                break;
            }
        }
    }

    std::size_t n_;
    bool closed_;
    double tau_, nu_, coeff_;
    long shift_ = 0;
    std::vector<double> pl_, pr_;
    std::vector<double> lefts_, rights_, gl_, gr_;
};

struct InnerResult {
    std::vector<double> x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

inline InnerResult minimize_knots(JkoProblem& prob, std::vector<double> x, const InnerConfig& cfg, double tau) {
    const std::size_t d = prob.dim();
    const double tol = cfg.grad_tol * std::sqrt(static_cast<double>(prob.cells()));
    const double step0 = cfg.step_init > 0.0 ? cfg.step_init : tau;
    const auto p = prob.preconditioner();

    std::vector<double> g(d), gn(d), xn(d), dir(d);
    double f = prob.evaluate(x, g.data());
    if (!std::isfinite(f)) throw std::domain_error("jko: initial measure has infinite energy");

    std::vector<std::vector<double>> S, Y;
    std::vector<double> rho;
    double gamma = step0;
    double alpha_prev = step0;

    InnerResult res;
    for (int it = 0; it < cfg.max_iter; ++it) {
        if (inf_norm(g) <= tol) break;

        bool quasi = cfg.method == InnerMethod::lbfgs && !S.empty();
        if (quasi) {
            std::vector<double> q(g);
            std::vector<double> a(S.size());
            for (std::size_t k = S.size(); k-- > 0;) {
                a[k] = rho[k] * dot(S[k], q);
                for (std::size_t i = 0; i < d; ++i) q[i] -= a[k] * Y[k][i];
            }
            for (std::size_t i = 0; i < d; ++i) q[i] *= gamma * p[i];
            for (std::size_t k = 0; k < S.size(); ++k) {
                const double b = rho[k] * dot(Y[k], q);
                for (std::size_t i = 0; i < d; ++i) q[i] += (a[k] - b) * S[k][i];
            }
            for (std::size_t i = 0; i < d; ++i) dir[i] = -q[i];
            if (dot(g, dir) >= 0.0) {
                S.clear();
                Y.clear();
                rho.clear();
                quasi = false;
            }
        }
        if (!quasi)
            for (std::size_t i = 0; i < d; ++i) dir[i] = -p[i] * g[i];

        const double slope = dot(g, dir);
        double alpha = quasi ? 1.0 : (cfg.method == InnerMethod::lbfgs ? step0 : std::min(step0, 2.0 * alpha_prev));
        const double slack = 1e-14 * (1.0 + std::abs(f));
        bool accepted = false;
        double fn = f;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < d; ++i) xn[i] = x[i] + alpha * dir[i];
            fn = prob.evaluate(xn, gn.data());
            if (std::isfinite(fn) && fn <= f + cfg.armijo_c * alpha * slope + slack) {
                accepted = true;
                break;
            }
            alpha *= cfg.armijo_shrink;
        }
        res.iterations = it + 1;
        if (!accepted) break;
        alpha_prev = alpha;

        if (cfg.method == InnerMethod::lbfgs) {
            std::vector<double> s(d), y(d);
            for (std::size_t i = 0; i < d; ++i) {
                s[i] = xn[i] - x[i];
                y[i] = gn[i] - g[i];
            }
            const double sy = dot(s, y);
            if (sy > 1e-300) {
                double ypy = 0.0;
                for (std::size_t i = 0; i < d; ++i) ypy += y[i] * p[i] * y[i];
                gamma = sy / ypy;
                S.push_back(std::move(s));
                Y.push_back(std::move(y));
                rho.push_back(1.0 / sy);
                if (static_cast<int>(S.size()) > cfg.lbfgs_memory) {
                    S.erase(S.begin());
                    Y.erase(Y.begin());
                    rho.erase(rho.begin());
                }
            }
        }
        x.swap(xn);
        g.swap(gn);
        f = fn;
    }
    res.value = f;
    res.grad_norm = inf_norm(g);
    res.x = std::move(x);
    return res;
}

inline bool prefers_closed(const CellMeasure& m) { return m.contiguous(1e-9); }

}  // namespace detail

/// Candidate vector (base, z_0..z_{N-1}) with h = 2 pi softmax(z).
inline std::vector<double> encode_candidate(const CellMeasure& m) {
    std::vector<double> c(m.size() + 1);
    c[0] = m.base();
    for (std::size_t i = 0; i < m.size(); ++i) c[i + 1] = std::log(m.width(i));
    return c;
}

inline std::vector<double> softmax_spacings(std::span<const double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> h(z.size());
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += (h[i] = std::exp(z[i] - zmax));
    for (double& v : h) v *= two_pi / s;
    return h;
}

inline CellMeasure decode_candidate(std::span<const double> cand) {
    if (cand.size() < 3) throw std::invalid_argument("candidate needs a base and at least 2 spacing parameters");
    return CellMeasure::from_spacings(cand[0], softmax_spacings(cand.subspan(1)));
}

struct ObjectiveValue {
    double value = 0.0;
    std::vector<double> gradient;   // with respect to (base, z)
};

/// JKO objective in the (base, z) parametrisation, with analytic gradient.
inline ObjectiveValue jko_objective(double tau, const CellMeasure& prev, std::span<const double> cand,
                                    const SolverConfig& cfg) {
    const std::size_t n = cand.size() - 1;
    if (n != prev.size()) throw std::invalid_argument("jko_objective: candidate and prev sizes differ");
    const auto h = softmax_spacings(cand.subspan(1));
    std::vector<double> knots(n);
    knots[0] = cand[0];
    for (std::size_t i = 1; i < n; ++i) knots[i] = knots[i - 1] + h[i - 1];

    detail::JkoProblem prob(prev, tau, cfg.nu, cfg.coeff, true);
    std::vector<double> gk(n);
    ObjectiveValue out;
    out.value = prob.evaluate(knots, gk.data());
    out.gradient.assign(n + 1, 0.0);
    if (!std::isfinite(out.value)) return out;

    double gb = 0.0;
    for (double v : gk) gb += v;
    out.gradient[0] = gb;
    std::vector<double> gh(n, 0.0);
    for (std::size_t j = n - 1; j-- > 0;) gh[j] = gh[j + 1] + gk[j + 1];
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += h[j] * gh[j];
    mean /= two_pi;
    for (std::size_t i = 0; i < n; ++i) out.gradient[i + 1] = h[i] * (gh[i] - mean);
    return out;
}

struct StepOutcome {
    CellMeasure measure;
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = true;
    bool halved = false;
};

namespace detail {

inline StepOutcome single_step(double tau, const CellMeasure& prev, const SolverConfig& cfg, int depth) {
    JkoProblem prob(prev, tau, cfg.nu, cfg.coeff, prefers_closed(prev));
    const auto x0 = prob.initial_knots();
    const double psi_prev = prob.evaluate(x0, nullptr);
    InnerResult r = minimize_knots(prob, x0, cfg.inner, tau);
    const double tol = cfg.inner.grad_tol * std::sqrt(static_cast<double>(prev.size()));
    const bool ok = r.grad_norm <= 10.0 * tol && prob.max_displacement(r.x) < pi;

    if (!ok && depth < cfg.max_halvings) {
        StepOutcome a = single_step(0.5 * tau, prev, cfg, depth + 1);
        StepOutcome b = single_step(0.5 * tau, a.measure, cfg, depth + 1);
        b.iterations += a.iterations + r.iterations;
        b.converged = a.converged && b.converged;
        b.halved = true;
        return b;
    }
    StepOutcome out{prev, r.iterations, r.grad_norm, ok, false};
    if (prob.evaluate(r.x, nullptr) <= psi_prev) out.measure = prob.to_measure(r.x);
    return out;
}

}  // namespace detail

/// One minimizing-movement step with full diagnostics. Non-converged or
/// guard-violating steps are retried as two half steps.
inline StepOutcome jko_step_detailed(double tau, const CellMeasure& prev, const SolverConfig& cfg) {
    return detail::single_step(tau, prev, cfg, 0);
}

inline CellMeasure jko_step(double tau, const CellMeasure& prev, const SolverConfig& cfg) {
    return jko_step_detailed(tau, prev, cfg).measure;
}

/// Unique minimizer of F_nu: the uniform measure.
inline CellMeasure minimizer(const SolverConfig& cfg) { return uniform_measure(cfg.N); }

inline std::size_t step_count(const SolverConfig& cfg) {
    return static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.tau - 1e-9));
}

inline FlowTrajectory evolve(const CellMeasure& m0, const SolverConfig& cfg) {
    cfg.validate();
    FlowTrajectory tr;
    const std::size_t steps = step_count(cfg);
    tr.times.reserve(steps + 1);
    tr.times.push_back(0.0);
    tr.snapshots.push_back(m0);
    tr.energies.push_back(free_energy(m0, cfg.nu, cfg.coeff));
    tr.step_costs.push_back(0.0);
    tr.inner_iterations.push_back(0);
    for (std::size_t k = 1; k <= steps; ++k) {
        const CellMeasure& prev = tr.snapshots.back();
        StepOutcome s = jko_step_detailed(cfg.tau, prev, cfg);
        tr.step_costs.push_back(dper2_quantile(prev, s.measure));
        tr.times.push_back(static_cast<double>(k) * cfg.tau);
        tr.energies.push_back(free_energy(s.measure, cfg.nu, cfg.coeff));
        tr.inner_iterations.push_back(s.iterations);
        if (s.halved) tr.halved_steps.push_back(k);
        if (!s.converged) tr.nonconverged_steps.push_back(k);
        tr.snapshots.push_back(std::move(s.measure));
    }
    return tr;
}

}  // namespace circleflow
