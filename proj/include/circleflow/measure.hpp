#pragma once

// Periodic probability measures on the circle [-pi, pi).
//
// The canonical representation is CellMeasure: N cells of equal mass 1/N,
// each with uniform density over its arc. Cell left endpoints form a
// monotone lift starting at the base point, which makes the quantile
// function piecewise linear on the lattice s = i/N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace circleflow {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Representative of x in [-pi, pi).
inline double wrap(double x) {
    double y = x - two_pi * std::floor((x + pi) / two_pi);
    if (y >= pi) y -= two_pi;
    if (y < -pi) y = -pi;
    return y;
}

/// Geodesic distance on the circle, always in [0, pi].
inline double point_dist(double x, double y) { return std::abs(wrap(x - y)); }

class CellMeasure {
public:
    /// Contiguous layout: cells tile the circle starting at `base`.
    /// Spacings are rescaled to sum to 2*pi and the base is wrapped.
    static CellMeasure from_spacings(double base, std::vector<double> spacings) {
        if (spacings.empty()) throw std::invalid_argument("CellMeasure: no cells");
        double total = 0.0;
        for (double h : spacings) {
            if (!(h > 0.0) || !std::isfinite(h))
                throw std::invalid_argument("CellMeasure: spacings must be positive and finite");
            total += h;
        }
        for (double& h : spacings) h *= two_pi / total;
        std::vector<double> lefts(spacings.size());
        double x = wrap(base);
        for (std::size_t i = 0; i < spacings.size(); ++i) {
            lefts[i] = x;
            x += spacings[i];
        }
        return CellMeasure(std::move(lefts), std::move(spacings));
    }

    /// General layout with explicit boundaries. Gaps between cells are
    /// allowed (zero-density arcs); overlaps are not.
    static CellMeasure from_cells(std::vector<double> lefts, std::vector<double> widths) {
        if (lefts.empty() || lefts.size() != widths.size())
            throw std::invalid_argument("CellMeasure: lefts and widths must be non-empty and equal length");
        const double shift = wrap(lefts[0]) - lefts[0];
        for (double& l : lefts) l += shift;
        CellMeasure m(std::move(lefts), std::move(widths));
        m.validate();
        return m;
    }

    std::size_t size() const { return lefts_.size(); }
    double base() const { return lefts_.front(); }
    std::span<const double> lefts() const { return lefts_; }
    std::span<const double> widths() const { return widths_; }
    double left(std::size_t i) const { return lefts_[i]; }
    double width(std::size_t i) const { return widths_[i]; }
    double right(std::size_t i) const { return lefts_[i] + widths_[i]; }
    double midpoint(std::size_t i) const { return lefts_[i] + 0.5 * widths_[i]; }
    double density(std::size_t i) const { return 1.0 / (static_cast<double>(size()) * widths_[i]); }
    double min_width() const { return *std::min_element(widths_.begin(), widths_.end()); }
    double max_density() const { return 1.0 / (static_cast<double>(size()) * min_width()); }

    double total_width() const {
        double s = 0.0;
        for (double h : widths_) s += h;
        return s;
    }

    /// Zero-density arc between the end of cell i and the start of the next.
    double gap_after(std::size_t i) const {
        const double next = (i + 1 < size()) ? lefts_[i + 1] : lefts_[0] + two_pi;
        return next - right(i);
    }

    /// True when the cells tile the whole circle.
    bool contiguous(double tol = 1e-12) const {
        for (std::size_t i = 0; i < size(); ++i)
            if (std::abs(gap_after(i)) > tol * two_pi) return false;
        return true;
    }

    /// Number of cells followed by a gap wider than tol.
    std::size_t gap_count(double tol = 1e-12) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < size(); ++i)
            if (gap_after(i) > tol * two_pi) ++n;
        return n;
    }

    /// Quantile lift X(s) for any real s, with X(s + 1) = X(s) + 2*pi.
    double quantile(double s) const {
        const double fl = std::floor(s);
        const double frac = s - fl;
        const double pos = frac * static_cast<double>(size());
        std::size_t i = std::min(static_cast<std::size_t>(pos), size() - 1);
        return lefts_[i] + (pos - static_cast<double>(i)) * widths_[i] + two_pi * fl;
    }

    /// Cumulative mass of the lifted measure: G(x + 2*pi) = G(x) + 1, G(base) = 0.
    double cumulative(double x) const {
        const double periods = std::floor((x - base()) / two_pi);
        const double y = x - two_pi * periods;
        const double n = static_cast<double>(size());
        auto it = std::upper_bound(lefts_.begin(), lefts_.end(), y);
        std::size_t i = static_cast<std::size_t>(it - lefts_.begin());
        double mass = 0.0;
        if (i > 0) {
            const std::size_t c = i - 1;
            const double inside = std::clamp((y - lefts_[c]) / widths_[c], 0.0, 1.0);
            mass = (static_cast<double>(c) + inside) / n;
        }
        return periods + mass;
    }

    /// Rigid rotation by delta; the result is re-wrapped so the base stays in [-pi, pi).
    CellMeasure rotated(double delta) const {
        std::vector<double> l(lefts_);
        for (double& x : l) x += delta;
        const double shift = wrap(l[0]) - l[0];
        for (double& x : l) x += shift;
        return CellMeasure(std::move(l), widths_);
    }

    friend bool operator==(const CellMeasure&, const CellMeasure&) = default;

private:
    CellMeasure(std::vector<double> lefts, std::vector<double> widths)
        : lefts_(std::move(lefts)), widths_(std::move(widths)) {}

    void validate() const {
        for (std::size_t i = 0; i < size(); ++i) {
            if (!(widths_[i] > 0.0) || !std::isfinite(widths_[i]) || !std::isfinite(lefts_[i]))
                throw std::invalid_argument("CellMeasure: cell " + std::to_string(i) + " has non-positive width");
            if (gap_after(i) < -1e-12 * two_pi)
                throw std::invalid_argument("CellMeasure: cell " + std::to_string(i) + " overlaps its successor");
        }
    }

    std::vector<double> lefts_;
    std::vector<double> widths_;
};

/// Weighted point masses on the circle, positions sorted in [-pi, pi).
class AtomMeasure {
public:
    AtomMeasure(std::vector<double> positions, std::vector<double> weights) {
        if (positions.empty() || positions.size() != weights.size())
            throw std::invalid_argument("AtomMeasure: positions and weights must be non-empty and equal length");
        std::vector<std::pair<double, double>> a;
        double total = 0.0;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (!(weights[i] >= 0.0)) throw std::invalid_argument("AtomMeasure: negative weight");
            a.emplace_back(wrap(positions[i]), weights[i]);
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("AtomMeasure: weights must sum to 1");
        std::sort(a.begin(), a.end());
        for (const auto& [x, w] : a) {
            if (!positions_.empty() && x == positions_.back())
                weights_.back() += w;
            else {
                positions_.push_back(x);
                weights_.push_back(w);
            }
        }
    }

    /// Equal weights 1/N.
    static AtomMeasure uniform_weights(std::vector<double> positions) {
        const std::size_t n = positions.size();
        return AtomMeasure(std::move(positions), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return positions_.size(); }
    std::span<const double> positions() const { return positions_; }
    std::span<const double> weights() const { return weights_; }
    double position(std::size_t i) const { return positions_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    bool equal_weights(double tol = 1e-12) const {
        const double w = 1.0 / static_cast<double>(size());
        return std::all_of(weights_.begin(), weights_.end(), [&](double x) { return std::abs(x - w) <= tol; });
    }

private:
    std::vector<double> positions_;
    std::vector<double> weights_;
};

/// Density samples at nodes x_j = -pi + 2*pi*j/M. Each value is read as
/// the mean density over the box [x_j - dx/2, x_j + dx/2].
class GridDensity {
public:
    explicit GridDensity(std::vector<double> values) : values_(std::move(values)) {
        const std::size_t m = values_.size();
        if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("GridDensity: size must be a power of two >= 2");
        double mass = 0.0;
        for (double v : values_) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("GridDensity: values must be finite and >= 0");
            mass += v;
        }
        mass *= spacing();
        if (std::abs(mass - 1.0) > 1e-10) throw std::invalid_argument("GridDensity: total mass must be 1");
    }

    /// Rescales non-negative values to unit mass.
    static GridDensity normalized(std::vector<double> values) {
        double s = 0.0;
        for (double v : values) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("GridDensity: values must be finite and >= 0");
            s += v;
        }
        if (!(s > 0.0)) throw std::invalid_argument("GridDensity: density is not normalizable");
        const double scale = static_cast<double>(values.size()) / (two_pi * s);
        for (double& v : values) v *= scale;
        return GridDensity(std::move(values));
    }

    static GridDensity sample(const std::function<double(double)>& f, std::size_t m) {
        std::vector<double> v(m);
        for (std::size_t j = 0; j < m; ++j) v[j] = f(node(j, m));
        return normalized(std::move(v));
    }

    static double node(std::size_t j, std::size_t m) {
        return -pi + two_pi * static_cast<double>(j) / static_cast<double>(m);
    }

    std::size_t size() const { return values_.size(); }
    double spacing() const { return two_pi / static_cast<double>(values_.size()); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t j) const { return values_[j]; }

private:
    std::vector<double> values_;
};

inline CellMeasure uniform_measure(std::size_t n) {
    if (n < 2) throw std::invalid_argument("uniform_measure: need at least 2 cells");
    return CellMeasure::from_spacings(-pi, std::vector<double>(n, two_pi / static_cast<double>(n)));
}

namespace detail {

// Piecewise-linear CDF on [-pi, pi] built from box-averaged grid values.
struct GridCdf {
    std::vector<double> x;  // breakpoints
    std::vector<double> f;  // cumulative mass at breakpoints

    explicit GridCdf(const GridDensity& g) {
        const std::size_t m = g.size();
        const double dx = g.spacing();
        x.push_back(-pi);
        f.push_back(0.0);
        auto push = [&](double len, double rho) {
            x.push_back(x.back() + len);
            f.push_back(f.back() + len * rho);
        };
        push(0.5 * dx, g[0]);
        for (std::size_t j = 1; j < m; ++j) push(dx, g[j]);
        push(0.5 * dx, g[0]);
        x.back() = pi;
        const double total = f.back();
        for (double& v : f) v /= total;
        f.back() = 1.0;
    }

    // Smallest x with F(x) >= q.
    double lower_inverse(double q) const {
        auto it = std::lower_bound(f.begin(), f.end(), q);
        std::size_t k = static_cast<std::size_t>(it - f.begin());
        if (k == 0) return x[0];
        const double df = f[k] - f[k - 1];
        return x[k - 1] + (x[k] - x[k - 1]) * (q - f[k - 1]) / df;
    }

    // Largest x with F(x) <= q.
    double upper_inverse(double q) const {
        auto it = std::upper_bound(f.begin(), f.end(), q);
        std::size_t k = static_cast<std::size_t>(it - f.begin());
        if (k >= f.size()) return x.back();
        const double df = f[k] - f[k - 1];
        return x[k - 1] + (x[k] - x[k - 1]) * (q - f[k - 1]) / df;
    }
};

inline CellMeasure cells_from_boundaries(std::vector<double> b) {
    const std::size_t n = b.size();
    std::vector<double> widths(n);
    for (std::size_t i = 0; i + 1 < n; ++i) widths[i] = b[i + 1] - b[i];
    widths[n - 1] = b[0] + two_pi - b[n - 1];
    for (double w : widths)
        if (!(w > 0.0)) throw std::invalid_argument("cell inversion produced an empty cell (density vanishes on too wide an arc)");
    return CellMeasure::from_spacings(b[0], std::move(widths));
}

}  // namespace detail

/// Cell boundaries at mass levels i/N of the grid CDF (measured from -pi).
/// On zero-density plateaus the boundary is the midpoint of the level set.
/// Levels are widened by a rounding margin so that plateaus whose cumulative
/// mass misses i/N in the last bits are still detected.
inline CellMeasure from_density(const GridDensity& g, std::size_t n) {
    if (n < 2) throw std::invalid_argument("from_density: need at least 2 cells");
    detail::GridCdf cdf(g);
    constexpr double margin = 1e-13;
    std::vector<double> b(n);
    for (std::size_t i = 1; i < n; ++i) {
        const double q = static_cast<double>(i) / static_cast<double>(n);
        b[i] = 0.5 * (cdf.lower_inverse(q - margin) + cdf.upper_inverse(q + margin));
    }
    // Level 0 wraps around: the plateau {F = 0} joins {F = 1} across -pi.
    const double lo = cdf.upper_inverse(0.0);
    const double hi = cdf.lower_inverse(1.0) - two_pi;
    b[0] = 0.5 * (lo + hi);
    return detail::cells_from_boundaries(std::move(b));
}

/// Cell boundaries at levels i/N of a continuous increasing CDF on [-pi, pi].
inline CellMeasure from_cdf(const std::function<double(double)>& cdf, std::size_t n) {
    if (n < 2) throw std::invalid_argument("from_cdf: need at least 2 cells");
    std::vector<double> b(n);
    b[0] = -pi;
    for (std::size_t i = 1; i < n; ++i) {
        const double q = static_cast<double>(i) / static_cast<double>(n);
        double lo = -pi, hi = pi;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cdf(mid) < q ? lo : hi) = mid;
        }
        b[i] = 0.5 * (lo + hi);
    }
    return detail::cells_from_boundaries(std::move(b));
}

/// Deposits each cell's mass uniformly over its arc onto M grid boxes.
inline GridDensity to_density(const CellMeasure& m, std::size_t grid_size) {
    std::vector<double> v(grid_size);
    const double dx = two_pi / static_cast<double>(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double x = GridDensity::node(j, grid_size);
        v[j] = (m.cumulative(x + 0.5 * dx) - m.cumulative(x - 0.5 * dx)) / dx;
    }
    return GridDensity::normalized(std::move(v));
}

/// Midpoint collocation: one atom of weight 1/N per cell.
inline AtomMeasure atoms_of(const CellMeasure& m) {
    std::vector<double> x(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) x[i] = wrap(m.midpoint(i));
    return AtomMeasure::uniform_weights(std::move(x));
}

/// Level-n ternary Cantor construction on [-pi, pi]: 2^n cells of width
/// 2*pi*3^-n and mass 2^-n each; the removed middle thirds are gaps.
inline CellMeasure cantor_measure(int level) {
    if (level < 1 || level > 12) throw std::invalid_argument("cantor_measure: level must be in [1, 12]");
    std::vector<double> lefts{-pi};
    double width = two_pi;
    for (int k = 0; k < level; ++k) {
        width /= 3.0;
        std::vector<double> next;
        next.reserve(2 * lefts.size());
        for (double l : lefts) {
            next.push_back(l);
            next.push_back(l + 2.0 * width);
        }
        lefts = std::move(next);
    }
    std::vector<double> widths(lefts.size(), width);
    return CellMeasure::from_cells(std::move(lefts), std::move(widths));
}

/// Density 1/(2*pi) + a1*cos(x), positive for |a1| < 1/(2*pi).
inline CellMeasure cosine_measure(double a1, std::size_t n) {
    if (!(std::abs(a1) < 1.0 / two_pi)) throw std::invalid_argument("cosine data requires |a1| < 1/(2*pi)");
    return from_cdf([a1](double x) { return (x + pi) / two_pi + a1 * std::sin(x); }, n);
}

/// N equal cells packed into an arc of length epsilon centred at 0.
inline CellMeasure dirac_measure(double epsilon, std::size_t n) {
    if (!(epsilon > 0.0 && epsilon < two_pi)) throw std::invalid_argument("dirac data requires 0 < epsilon < 2*pi");
    if (n < 2) throw std::invalid_argument("dirac_measure: need at least 2 cells");
    std::vector<double> lefts(n), widths(n, epsilon / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) lefts[i] = -0.5 * epsilon + epsilon * static_cast<double>(i) / static_cast<double>(n);
    return CellMeasure::from_cells(std::move(lefts), std::move(widths));
}

}  // namespace circleflow
