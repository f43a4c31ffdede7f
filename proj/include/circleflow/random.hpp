#pragma once

// Seeded generators of random measures for property checks.

#include <cstddef>
#include <random>
#include <vector>

#include "circleflow/measure.hpp"

namespace circleflow {

using Rng = std::mt19937_64;

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// n distinct equal-weight atoms at independent uniform positions.
inline AtomMeasure random_atoms(Rng& rng, std::size_t n) {
    for (;;) {
        std::vector<double> x(n);
        for (double& v : x) v = uniform_real(rng, -pi, pi);
        AtomMeasure a = AtomMeasure::uniform_weights(x);
        if (a.size() == n) return a;
    }
}

/// Contiguous cell measure with spacings drawn from [1 - spread, 1 + spread]
/// before normalisation and a uniform random base.
inline CellMeasure random_cells(Rng& rng, std::size_t n, double spread = 0.8) {
    std::vector<double> h(n);
    for (double& v : h) v = uniform_real(rng, 1.0 - spread, 1.0 + spread);
    return CellMeasure::from_spacings(uniform_real(rng, -pi, pi), std::move(h));
}

/// Atoms mollified to cells: cell i spans the arc between consecutive atom
/// midpoints, so each cell contains its atom.
inline CellMeasure mollify(const AtomMeasure& a) {
    const std::size_t n = a.size();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a.position(i);
        const double prev = (i == 0) ? a.position(n - 1) - two_pi : a.position(i - 1);
        b[i] = 0.5 * (prev + x);
    }
    std::vector<double> h(n);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = b[i + 1] - b[i];
    h[n - 1] = b[0] + two_pi - b[n - 1];
    return CellMeasure::from_spacings(b[0], std::move(h));
}

}  // namespace circleflow
