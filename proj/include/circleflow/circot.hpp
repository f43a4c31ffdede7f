#pragma once

// Optimal transport on the circle with quadratic geodesic cost.
//
// Equal-weight atomic problems are solved over the N cyclic-shift
// matchings; dper2_oracle solves the same problem by brute force or by an
// assignment solver. Cell measures go through their quantile lifts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "circleflow/measure.hpp"

namespace circleflow {

struct TransportPlan {
    std::size_t n = 0;
    std::size_t shift = 0;                 // source i is matched to target (i + shift) mod n
    std::vector<double> sources;           // source atom positions
    std::vector<double> lifted_targets;    // target lifts with |lift - source| <= pi
    std::vector<double> displacements;     // source - lifted target
    double cost = 0.0;                     // (1/n) * sum of squared displacements
};

namespace detail {

// Signed geodesic step from x to y in [-pi, pi). An antipodal pair gets
// -pi, i.e. the lift of y is placed below x.
inline double geodesic_step(double x, double y) { return wrap(y - x); }

inline void require_equal_size_uniform(const AtomMeasure& a, const AtomMeasure& b, const char* who) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": atom counts differ");
    if (!a.equal_weights() || !b.equal_weights())
        throw std::invalid_argument(std::string(who) + ": equal weights required (use dper2_quantile for general measures)");
}

inline long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::size_t positive_mod(long a, long b) { return static_cast<std::size_t>(a - b * floor_div(a, b)); }

}  // namespace detail

/// Optimal plan among cyclic shifts; ties are broken by the smallest shift.
inline TransportPlan dper2_plan(const AtomMeasure& a, const AtomMeasure& b) {
    detail::require_equal_size_uniform(a, b, "dper2");
    const std::size_t n = a.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = detail::geodesic_step(a.position(i), b.position((i + k) % n));
            c += d * d;
        }
        if (c < best) {
            best = c;
            best_k = k;
        }
    }
    TransportPlan p;
    p.n = n;
    p.shift = best_k;
    p.sources.assign(a.positions().begin(), a.positions().end());
    p.lifted_targets.resize(n);
    p.displacements.resize(n);
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a.position(i);
        const double step = detail::geodesic_step(x, b.position((i + best_k) % n));
        p.lifted_targets[i] = x + step;
        p.displacements[i] = -step;
        c += step * step;
    }
    p.cost = c / static_cast<double>(n);
    return p;
}

inline double dper2(const AtomMeasure& a, const AtomMeasure& b) { return dper2_plan(a, b).cost; }

enum class OracleMode { automatic, exhaustive, assignment };

namespace detail {

// Hungarian method with potentials; returns the minimum total cost of a
// perfect matching for a square cost matrix (row-major).
inline double min_cost_assignment(const std::vector<double>& cost, std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
    return total;
}

}  // namespace detail

/// Kantorovich optimum over all permutation couplings of two equal-weight
/// atom systems, without any cyclic-order assumption.
inline double dper2_oracle(const AtomMeasure& a, const AtomMeasure& b, OracleMode mode = OracleMode::automatic) {
    detail::require_equal_size_uniform(a, b, "dper2_oracle");
    const std::size_t n = a.size();
    std::vector<double> c(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = point_dist(a.position(i), b.position(j));
            c[i * n + j] = d * d;
        }
    if (mode == OracleMode::automatic) mode = n <= 8 ? OracleMode::exhaustive : OracleMode::assignment;
    if (mode == OracleMode::exhaustive) {
        if (n > 10) throw std::invalid_argument("dper2_oracle: exhaustive mode limited to 10 atoms");
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        do {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += c[i * n + perm[i]];
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best / static_cast<double>(n);
    }
    return detail::min_cost_assignment(c, n) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Quantile formulation.
//
// With X, Y the quantile lifts of m and r, the squared distance is
// min over real theta of f(theta) = int_0^1 |X(s) - Y(s + theta)|^2 ds.
// f is convex in theta (its second derivative is 2 int X'(s) Y'(s+theta) ds).

namespace detail {

inline double mean_position(const CellMeasure& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.midpoint(i);
    return s / static_cast<double>(m.size());
}

// Integrates g(D(s), Y'(s+theta)) over the common refinement, where D is
// linear on each piece. Returns {int D^2, int D * Y'}.
struct QuantileGap {
    double value = 0.0;
    double slope_moment = 0.0;
};

inline QuantileGap quantile_gap(const CellMeasure& m, const CellMeasure& r, double theta) {
    const long n = static_cast<long>(m.size());
    const long k = static_cast<long>(r.size());
    const double dn = static_cast<double>(n), dk = static_cast<double>(k);
    long i = 0;
    long j = static_cast<long>(std::floor(theta * dk));
    double s0 = 0.0;
    QuantileGap out;
    while (i < n) {
        const double xb = static_cast<double>(i + 1) / dn;
        const double yb = static_cast<double>(j + 1) / dk - theta;
        double s1 = std::min(xb, yb);
        const std::size_t jy = positive_mod(j, k);
        const double lift = two_pi * static_cast<double>(floor_div(j, k));
        auto x_at = [&](double s) { return m.left(static_cast<std::size_t>(i)) + (s * dn - static_cast<double>(i)) * m.width(static_cast<std::size_t>(i)); };
        auto y_at = [&](double s) { return r.left(jy) + ((s + theta) * dk - static_cast<double>(j)) * r.width(jy) + lift; };
        if (s1 > s0) {
            const double d0 = x_at(s0) - y_at(s0);
            const double d1 = x_at(s1) - y_at(s1);
            const double len = s1 - s0;
            out.value += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
            out.slope_moment += len * 0.5 * (d0 + d1) * dk * r.width(jy);
        }
        if (xb <= yb) ++i;
        if (yb <= xb) ++j;
        s0 = std::max(s0, s1);
    }
    return out;
}

}  // namespace detail

struct QuantileMatch {
    double cost = 0.0;
    double theta = 0.0;   // optimal shift of the target quantile argument
};

/// Squared periodic Wasserstein distance between cell measures of any sizes.
inline QuantileMatch dper2_quantile_match(const CellMeasure& m, const CellMeasure& r) {
    const double center = (detail::mean_position(m) - detail::mean_position(r)) / two_pi;
    auto f = [&](double t) { return detail::quantile_gap(m, r, t).value; };
    // Any minimizer lies within one period of the mean-matching shift.
    double a = center - 1.0, b = center + 1.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // Derivative refinement; f' = -2 int D Y' is continuous when r has no gaps.
    if (r.contiguous()) {
        auto df = [&](double t) { return -2.0 * detail::quantile_gap(m, r, t).slope_moment; };
        double lo = a - 1e-10, hi = b + 1e-10;
        if (df(lo) < 0.0 && df(hi) > 0.0) {
            while (hi - lo > 1e-13) {
                const double mid = 0.5 * (lo + hi);
                (df(mid) < 0.0 ? lo : hi) = mid;
            }
            a = lo;
            b = hi;
        }
    }
    const double theta = 0.5 * (a + b);
    double best = f(theta);
    // Guard against the bracket endpoints being marginally better.
    for (double t : {a, b})
        best = std::min(best, f(t));
    return {std::max(best, 0.0), theta};
}

inline double dper2_quantile(const CellMeasure& m, const CellMeasure& r) { return dper2_quantile_match(m, r).cost; }

inline double dper(const CellMeasure& m, const CellMeasure& r) { return std::sqrt(dper2_quantile(m, r)); }

// ---------------------------------------------------------------------------
// Lattice matchings between cell measures with the same N: cell i of m is
// mapped affinely onto cell (i + q) mod N of r. The cost equals f(q/N).

struct LatticeMatch {
    long shift = 0;
    double cost = 0.0;
};

/// Cost of the lattice matching with integer quantile shift q.
inline double lattice_cost(const CellMeasure& m, const CellMeasure& r, long q) {
    if (m.size() != r.size()) throw std::invalid_argument("lattice_cost: cell counts differ");
    const long n = static_cast<long>(m.size());
    double c = 0.0;
    for (long i = 0; i < n; ++i) {
        const std::size_t j = detail::positive_mod(i + q, n);
        const double lift = two_pi * static_cast<double>(detail::floor_div(i + q, n));
        const double a = m.left(static_cast<std::size_t>(i)) - (r.left(j) + lift);
        const double b = m.right(static_cast<std::size_t>(i)) - (r.right(j) + lift);
        c += (a * a + a * b + b * b) / 3.0;
    }
    return c / static_cast<double>(n);
}

/// Best lattice shift. The cost is convex in q, so a downhill walk from the
/// mean-matching shift finds the global minimum.
inline LatticeMatch best_lattice_match(const CellMeasure& m, const CellMeasure& r) {
    const double n = static_cast<double>(m.size());
    long q = std::lround((detail::mean_position(m) - detail::mean_position(r)) / two_pi * n);
    double c = lattice_cost(m, r, q);
    for (;;) {
        const double down = lattice_cost(m, r, q - 1);
        const double up = lattice_cost(m, r, q + 1);
        if (down < c && down <= up) {
            --q;
            c = down;
        } else if (up < c) {
            ++q;
            c = up;
        } else {
            break;
        }
    }
    return {q, c};
}

// ---------------------------------------------------------------------------
// Geodesics.

/// Displacement interpolation along an optimal cyclic-shift plan.
inline AtomMeasure geodesic(const AtomMeasure& m0, const AtomMeasure& m1, double t) {
    const TransportPlan p = dper2_plan(m0, m1);
    std::vector<double> x(p.n);
    for (std::size_t i = 0; i < p.n; ++i) x[i] = wrap((1.0 - t) * p.sources[i] + t * p.lifted_targets[i]);
    return AtomMeasure::uniform_weights(std::move(x));
}

namespace detail {

// Lifted cell boundaries of r matched to the cells of m under shift q.
struct LiftedCells {
    std::vector<double> lefts, rights;
};

inline LiftedCells lifted_cells(const CellMeasure& r, std::size_t n, long q) {
    LiftedCells c;
    c.lefts.resize(n);
    c.rights.resize(n);
    const long ln = static_cast<long>(n);
    for (long i = 0; i < ln; ++i) {
        const std::size_t j = positive_mod(i + q, ln);
        const double lift = two_pi * static_cast<double>(floor_div(i + q, ln));
        c.lefts[static_cast<std::size_t>(i)] = r.left(j) + lift;
        c.rights[static_cast<std::size_t>(i)] = r.right(j) + lift;
    }
    return c;
}

inline CellMeasure interpolate_cells(const LiftedCells& a, const LiftedCells& b, double t) {
    const std::size_t n = a.lefts.size();
    std::vector<double> l(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        l[i] = (1.0 - t) * a.lefts[i] + t * b.lefts[i];
        w[i] = (1.0 - t) * a.rights[i] + t * b.rights[i] - l[i];
    }
    return CellMeasure::from_cells(std::move(l), std::move(w));
}

}  // namespace detail

/// Interpolation of cell measures along the best lattice matching.
inline CellMeasure geodesic(const CellMeasure& m0, const CellMeasure& m1, double t) {
    const LatticeMatch lm = best_lattice_match(m0, m1);
    const auto a = detail::lifted_cells(m0, m0.size(), 0);
    const auto b = detail::lifted_cells(m1, m0.size(), lm.shift);
    return detail::interpolate_cells(a, b, t);
}

template <class Measure>
struct GeneralizedGeodesicPoint {
    Measure measure;
    double dgamma2 = 0.0;   // int |x2 - x3|^2 d(gamma) of the induced three-plan
};

/// ((1-t) T0 + t T1) # w, with T0, T1 the lifted optimal maps from the base w.
inline GeneralizedGeodesicPoint<AtomMeasure> generalized_geodesic(const AtomMeasure& w, const AtomMeasure& m0,
                                                                   const AtomMeasure& m1, double t) {
    const TransportPlan p0 = dper2_plan(w, m0);
    const TransportPlan p1 = dper2_plan(w, m1);
    std::vector<double> x(p0.n);
    double dg = 0.0;
    for (std::size_t i = 0; i < p0.n; ++i) {
        const double y0 = p0.lifted_targets[i], y1 = p1.lifted_targets[i];
        x[i] = wrap((1.0 - t) * y0 + t * y1);
        dg += (y0 - y1) * (y0 - y1);
    }
    return {AtomMeasure::uniform_weights(std::move(x)), dg / static_cast<double>(p0.n)};
}

/// Cell version using the best lattice matchings from the base.
inline GeneralizedGeodesicPoint<CellMeasure> generalized_geodesic(const CellMeasure& w, const CellMeasure& m0,
                                                                   const CellMeasure& m1, double t) {
    if (w.size() != m0.size() || w.size() != m1.size())
        throw std::invalid_argument("generalized_geodesic: cell counts differ");
    const std::size_t n = w.size();
    const auto a = detail::lifted_cells(m0, n, best_lattice_match(w, m0).shift);
    const auto b = detail::lifted_cells(m1, n, best_lattice_match(w, m1).shift);
    double dg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = a.lefts[i] - b.lefts[i], q = a.rights[i] - b.rights[i];
        dg += (p * p + p * q + q * q) / 3.0;
    }
    return {detail::interpolate_cells(a, b, t), dg / static_cast<double>(n)};
}

}  // namespace circleflow
