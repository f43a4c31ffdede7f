#pragma once

// Distributional form of the flow, tested against phi in {cos kx, sin kx}:
//
//   d/dt int phi dmu = nu int phi'' dmu
//                      + (c / 2pi) int int (phi'(x) - phi'(y)) cot((x-y)/2) dmu dmu
//
// where c is the interaction coefficient (c = 1/2 gives 1/(4 pi)).

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "circleflow/measure.hpp"
#include "circleflow/trajectory.hpp"

namespace circleflow {

enum class TestFunction { cosine, sine };

namespace detail {

struct Trig {
    double k;
    TestFunction kind;
    double phi(double x) const { return kind == TestFunction::cosine ? std::cos(k * x) : std::sin(k * x); }
    double d1(double x) const { return kind == TestFunction::cosine ? -k * std::sin(k * x) : k * std::cos(k * x); }
    double d2(double x) const { return -k * k * phi(x); }
    // Antiderivative of phi.
    double prim(double x) const { return kind == TestFunction::cosine ? std::sin(k * x) / k : -std::cos(k * x) / k; }
};

// Exact int phi dmu for the piecewise-constant density.
inline double cell_average(const CellMeasure& m, const Trig& f) {
    const double n = static_cast<double>(m.size());
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (f.k == 0.0)
            s += f.kind == TestFunction::cosine ? 1.0 : 0.0;
        else
            s += (f.prim(m.right(i)) - f.prim(m.left(i))) / m.width(i);
    }
    return s / n;
}

inline double rhs(const CellMeasure& m, const Trig& f, double nu, double coeff) {
    if (f.k == 0.0) return 0.0;
    const std::size_t n = m.size();
    const double dn = static_cast<double>(n);
    // int phi'' dmu = -k^2 int phi dmu, exactly.
    const double diffusion = -f.k * f.k * cell_average(m, f);
    double pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = m.midpoint(i);
        double row = 2.0 * f.d2(xi);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double xj = m.midpoint(j);
            row += (f.d1(xi) - f.d1(xj)) / std::tan(0.5 * (xi - xj));
        }
        pairs += row;
    }
    pairs /= dn * dn;
    return nu * diffusion + coeff / two_pi * pairs;
}

}  // namespace detail

/// |d/dt int phi dmu_t - RHS(mu_t)| at the recorded time nearest to t, with a
/// central difference over the neighbouring snapshots.
inline double weak_form_residual(const FlowTrajectory& traj, int k, double t,
                                 TestFunction kind = TestFunction::cosine) {
    if (traj.size() < 3) throw std::invalid_argument("weak_form_residual: need at least 3 snapshots");
    if (t < traj.times.front() || t > traj.times.back())
        throw std::out_of_range("weak_form_residual: t outside the trajectory");
    std::size_t idx = 0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        if (std::abs(traj.times[i] - t) < std::abs(traj.times[idx] - t)) idx = i;
    if (idx == 0) idx = 1;
    if (idx + 1 >= traj.size()) idx = traj.size() - 2;

    const detail::Trig f{static_cast<double>(k), kind};
    const double dt = traj.times[idx + 1] - traj.times[idx - 1];
    const double lhs = (detail::cell_average(traj.snapshots[idx + 1], f) - detail::cell_average(traj.snapshots[idx - 1], f)) / dt;
    const auto& e = traj.energies[idx];
    return std::abs(lhs - detail::rhs(traj.snapshots[idx], f, e.nu, e.interaction_coefficient));
}

}  // namespace circleflow
