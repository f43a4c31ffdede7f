#pragma once

// Periodic Hilbert transform and the interaction velocity on uniform grids.
//
//   H(u)(x) = (1/2pi) p.v. int cot((x - y)/2) u(y) dy,   (Hu)^_k = -i sgn(k) u^_k
//   d/dx (W * u) = -H(u)
//
// Grid functions live on x_j = -pi + 2 pi j / M. The half-period offset only
// multiplies mode k by (-1)^k, which cancels for diagonal multipliers.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "circleflow/measure.hpp"

namespace circleflow {

using cplx = std::complex<double>;

/// Real-to-half-complex transforms of fixed size with owned FFTW plans.
/// Forward output is normalised: c_k = (1/M) sum_j u_j e^{-2 pi i j k / M}.
class RealFft {
public:
    explicit RealFft(std::size_t m) : m_(m), real_(m), spec_(m / 2 + 1) {
        if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("RealFft: size must be a power of two");
        std::lock_guard<std::mutex> lock(planner_mutex());
        const int n = static_cast<int>(m);
        auto* c = reinterpret_cast<fftw_complex*>(spec_.data());
        fwd_ = fftw_plan_dft_r2c_1d(n, real_.data(), c, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_c2r_1d(n, c, real_.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !bwd_) throw std::runtime_error("RealFft: plan creation failed");
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

    std::size_t size() const { return m_; }
    std::size_t modes() const { return m_ / 2 + 1; }

    std::vector<cplx> forward(std::span<const double> u) {
        if (u.size() != m_) throw std::invalid_argument("RealFft: length mismatch");
        std::vector<double> in(u.begin(), u.end());
        std::vector<cplx> out(modes());
        fftw_execute_dft_r2c(fwd_, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
        const double s = 1.0 / static_cast<double>(m_);
        for (auto& c : out) c *= s;
        return out;
    }

    /// Inverse of forward. The input is copied because c2r destroys it.
    std::vector<double> backward(std::span<const cplx> c) {
        if (c.size() != modes()) throw std::invalid_argument("RealFft: spectrum length mismatch");
        std::vector<cplx> in(c.begin(), c.end());
        std::vector<double> out(m_);
        fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
        return out;
    }

private:
    static std::mutex& planner_mutex() {
        static std::mutex mu;
        return mu;
    }

    std::size_t m_;
    std::vector<double> real_;
    std::vector<cplx> spec_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

namespace detail {

// Applies mult(k) to modes 0..M/2-1 of the real signal u; the Nyquist mode is dropped.
template <class Mult>
std::vector<double> apply_multiplier(std::span<const double> u, Mult mult) {
    RealFft fft(u.size());
    auto c = fft.forward(u);
    const std::size_t nyq = u.size() / 2;
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = (k == nyq) ? cplx(0.0) : c[k] * mult(static_cast<double>(k));
    return fft.backward(c);
}

}  // namespace detail

/// Multiplier evaluation of H on a periodic grid function.
inline std::vector<double> hilbert_transform(std::span<const double> u) {
    return detail::apply_multiplier(u, [](double k) { return k > 0.0 ? cplx(0.0, -1.0) : cplx(0.0); });
}

inline std::vector<double> hilbert_transform(const GridDensity& g) { return hilbert_transform(g.values()); }

/// Direct principal-value quadrature: the trapezoid rule on nodes of
/// opposite parity to the target, with doubled weight.
inline std::vector<double> hilbert_transform_pv(std::span<const double> u) {
    const std::size_t m = u.size();
    if (m < 2 || m % 2 != 0) throw std::invalid_argument("hilbert_transform_pv: even grid size required");
    const double dx = two_pi / static_cast<double>(m);
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = (j + 1) % 2; i < m; i += 2) {
            const double d = dx * (static_cast<double>(j) - static_cast<double>(i));
            s += u[i] / std::tan(0.5 * d);
        }
        out[j] = 2.0 * dx * s / two_pi;
    }
    return out;
}

/// d/dx (W * u) from the kernel's Fourier series W = log2/pi + sum_{k != 0} e^{ikx} / (2 pi |k|).
inline std::vector<double> interaction_velocity(std::span<const double> u) {
    return detail::apply_multiplier(u, [](double k) {
        if (k == 0.0) return cplx(0.0);
        const double wk = 1.0 / (two_pi * k);
        return cplx(0.0, k) * two_pi * wk;
    });
}

inline std::vector<double> interaction_velocity(const GridDensity& g) { return interaction_velocity(g.values()); }

/// Velocity induced by a cell measure, from the exact Fourier coefficients
/// of its piecewise-constant density, sampled on an M-point grid.
inline std::vector<double> interaction_velocity(const CellMeasure& m, std::size_t grid_size) {
    if (grid_size < 2 || (grid_size & (grid_size - 1)) != 0)
        throw std::invalid_argument("interaction_velocity: grid size must be a power of two");
    const std::size_t kmax = grid_size / 2;
    const double n = static_cast<double>(m.size());
    // Coefficients relative to the shifted origin -pi so that they match RealFft's layout.
    std::vector<cplx> c(kmax + 1, cplx(0.0));
    for (std::size_t k = 1; k < kmax; ++k) {
        const double kk = static_cast<double>(k);
        cplx s(0.0);
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double a = m.left(i) + pi, b = m.right(i) + pi;
            s += (std::exp(cplx(0.0, -kk * a)) - std::exp(cplx(0.0, -kk * b))) / (cplx(0.0, kk) * m.width(i));
        }
        c[k] = s / (n * two_pi) * cplx(0.0, 1.0);
    }
    RealFft fft(grid_size);
    return fft.backward(c);
}

}  // namespace circleflow
