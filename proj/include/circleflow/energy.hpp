#pragma once

// Free energy F = nu * U + c * I on cell measures.
//
//   W(x) = -(1/pi) log|sin(x/2)|          interaction kernel, +inf on 2*pi*Z
//   U    = int u log u                    entropy of the piecewise-constant density
//   I    = int int W(x - y) du(x) du(y)   interaction
//
// c = 1/2 makes the gradient flow coincide with u_t + (H(u) u)_x = nu u_xx;
// c = 1 is the functional with the unit coefficient.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "circleflow/measure.hpp"

namespace circleflow {

inline constexpr double pde_coefficient = 0.5;

inline double kernel_W(double x) {
    const double y = wrap(x);
    if (y == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(std::abs(std::sin(0.5 * y))) / pi;
}

/// W'(x) = -(1/(2 pi)) cot(x/2).
inline double kernel_W_prime(double x) { return -0.5 / (pi * std::tan(0.5 * x)); }

/// Deterministic pairwise (tree) summation.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Cell boundaries in a monotone lift. Rights may exceed the next left
/// only in invalid configurations, which callers reject.
struct CellGeometry {
    std::span<const double> lefts;
    std::span<const double> rights;
    std::size_t size() const { return lefts.size(); }
};

namespace detail {

struct Gauss4 {
    static constexpr std::size_t n = 4;
    double node[n];
    double weight[n];
};

// 4-point Gauss-Legendre rule on [0, 1] with unit total weight.
inline const Gauss4& gauss4() {
    static const Gauss4 g = [] {
        Gauss4 q{};
        const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
        const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
        const double wa = (18.0 + std::sqrt(30.0)) / 72.0;
        const double wb = (18.0 - std::sqrt(30.0)) / 72.0;
        const double x[4] = {-b, -a, a, b};
        const double w[4] = {wb, wa, wa, wb};
        for (std::size_t i = 0; i < 4; ++i) {
            q.node[i] = 0.5 * (1.0 + x[i]);
            q.weight[i] = w[i];
        }
        return q;
    }();
    return g;
}

inline bool cyclic_neighbors(std::size_t i, std::size_t j, std::size_t n) {
    return j == i + 1 || (i == 0 && j + 1 == n && n > 2);
}

}  // namespace detail

/// Entropy of the piecewise-constant density: -(1/N) sum log(N h_i).
/// Optional gradient with respect to the cell boundaries is accumulated.
inline double entropy(const CellGeometry& g, double* grad_l = nullptr, double* grad_r = nullptr) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = g.rights[i] - g.lefts[i];
        if (!(h > 0.0)) throw std::domain_error("entropy: non-positive cell width");
        terms[i] = -std::log(dn * h) / dn;
        if (grad_l) {
            const double d = -1.0 / (dn * h);
            grad_r[i] += d;
            grad_l[i] -= d;
        }
    }
    return pairwise_sum(terms);
}

/// Interaction with unit coefficient. Cell pairs use midpoint collocation,
/// cyclic neighbours a 4x4 Gauss rule, and each cell's self-interaction the
/// closed-form integral of the leading log singularity,
/// -(1/(pi N^2)) (log(h/2) - 3/2).
inline double interaction_unit(const CellGeometry& g, double* grad_l = nullptr, double* grad_r = nullptr) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    const double inv_n2 = 1.0 / (dn * dn);
    const auto& q = detail::gauss4();
    std::vector<double> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double li = g.lefts[i], hi = g.rights[i] - li, mi = li + 0.5 * hi;
        if (!(hi > 0.0)) throw std::domain_error("interaction: non-positive cell width");
        double row = -inv_n2 * (std::log(0.5 * hi) - 1.5) / pi;
        if (grad_l) {
            const double d = -inv_n2 / (pi * hi);
            grad_r[i] += d;
            grad_l[i] -= d;
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            const double lj = g.lefts[j], hj = g.rights[j] - lj;
            if (detail::cyclic_neighbors(i, j, n)) {
                double s = 0.0;
                for (std::size_t a = 0; a < q.n; ++a) {
                    const double xa = li + hi * q.node[a];
                    for (std::size_t b = 0; b < q.n; ++b) {
                        const double z = 0.5 * (xa - (lj + hj * q.node[b]));
                        const double sz = std::sin(z);
                        const double w = q.weight[a] * q.weight[b];
                        s += w * std::log(std::abs(sz));
                        if (grad_l) {
                            const double d = -2.0 * inv_n2 * w * 0.5 * std::cos(z) / (pi * sz);
                            grad_l[i] += d * (1.0 - q.node[a]);
                            grad_r[i] += d * q.node[a];
                            grad_l[j] -= d * (1.0 - q.node[b]);
                            grad_r[j] -= d * q.node[b];
                        }
                    }
                }
                row += -2.0 * inv_n2 * s / pi;
            } else {
                const double z = 0.5 * (mi - (lj + 0.5 * hj));
                const double sz = std::sin(z);
                row += -2.0 * inv_n2 * std::log(std::abs(sz)) / pi;
                if (grad_l) {
                    const double d = -inv_n2 * std::cos(z) / (pi * sz);
                    grad_l[i] += 0.5 * d;
                    grad_r[i] += 0.5 * d;
                    grad_l[j] -= 0.5 * d;
                    grad_r[j] -= 0.5 * d;
                }
            }
        }
        rows[i] = row;
    }
    return pairwise_sum(rows);
}

namespace detail {

struct OwnedGeometry {
    std::vector<double> lefts, rights;
    CellGeometry view() const { return {lefts, rights}; }
};

inline OwnedGeometry geometry_of(const CellMeasure& m) {
    OwnedGeometry g;
    g.lefts.assign(m.lefts().begin(), m.lefts().end());
    g.rights.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) g.rights[i] = m.right(i);
    return g;
}

}  // namespace detail

inline double entropy(const CellMeasure& m) {
    const double dn = static_cast<double>(m.size());
    std::vector<double> terms(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!(m.width(i) > 0.0)) throw std::domain_error("entropy: non-positive cell width");
        terms[i] = -std::log(dn * m.width(i)) / dn;
    }
    return pairwise_sum(terms);
}

inline double interaction(const CellMeasure& m, double coeff = pde_coefficient) {
    const auto g = detail::geometry_of(m);
    return coeff * interaction_unit(g.view());
}

struct EnergyReport {
    double entropy = 0.0;
    double interaction = 0.0;   // already multiplied by the coefficient
    double total = 0.0;
    double nu = 0.0;
    double interaction_coefficient = pde_coefficient;
};

inline EnergyReport free_energy(const CellMeasure& m, double nu, double coeff = pde_coefficient) {
    if (nu < 0.0) throw std::invalid_argument("free_energy: nu must be >= 0");
    EnergyReport r;
    r.entropy = entropy(m);
    r.interaction = interaction(m, coeff);
    r.nu = nu;
    r.interaction_coefficient = coeff;
    r.total = nu * r.entropy + r.interaction;
    return r;
}

}  // namespace circleflow
