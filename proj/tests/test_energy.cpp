#include <gtest/gtest.h>

#include <cmath>

#include "circleflow/circot.hpp"
#include "circleflow/energy.hpp"
#include "circleflow/random.hpp"

using namespace circleflow;

namespace {

CellMeasure half_circle(std::size_t n) {
    std::vector<double> l(n), h(n, pi / n);
    for (std::size_t i = 0; i < n; ++i) l[i] = -pi / 2 + i * pi / n;
    return CellMeasure::from_cells(l, h);
}

CellMeasure cluster(double centre, double width, std::size_t n) {
    std::vector<double> l(n), h(n, width / n);
    for (std::size_t i = 0; i < n; ++i) l[i] = centre - width / 2 + i * width / n;
    return CellMeasure::from_cells(l, h);
}

CellMeasure two_clusters(double width, std::size_t n) {
    std::vector<double> l, h;
    for (double c : {-pi / 2, pi / 2})
        for (std::size_t i = 0; i < n / 2; ++i) {
            l.push_back(c - width / 2 + i * width / (n / 2));
            h.push_back(width / (n / 2));
        }
    return CellMeasure::from_cells(l, h);
}

// int_0^1 x^k dx by Gauss-Legendre on [0,1], using the library's 4-point rule.
double gauss_unit(int k) {
    const auto& g = detail::gauss4();
    double s = 0.0;
    for (std::size_t q = 0; q < g.n; ++q) s += g.weight[q] * std::pow(g.node[q], k);
    return s;
}

}  // namespace

TEST(Kernel, Values) {
    EXPECT_NEAR(kernel_W(pi), 0.0, 1e-16);
    EXPECT_TRUE(std::isinf(kernel_W(0.0)));
    EXPECT_TRUE(std::isinf(kernel_W(two_pi)));
    EXPECT_NEAR(kernel_W(pi / 3), std::log(2.0) / pi, 1e-15);
    EXPECT_NEAR(kernel_W(-1.3), kernel_W(1.3), 1e-15);
}

TEST(Kernel, ConvexBetweenSingularities) {
    const double h = 1e-3;
    for (double x = 0.05; x < two_pi - 0.05; x += 0.01) {
        const double second = (kernel_W(x + h) - 2 * kernel_W(x) + kernel_W(x - h)) / (h * h);
        EXPECT_GT(second, 0.0) << x;
        EXPECT_NEAR(second, 1.0 / (4 * pi * std::pow(std::sin(x / 2), 2)), 1e-3 * second);
    }
}

TEST(Kernel, DerivativeMatchesDifference) {
    for (double x : {0.3, 1.0, 2.5, 4.0, 6.0}) {
        const double h = 1e-6;
        EXPECT_NEAR(kernel_W_prime(x), (kernel_W(x + h) - kernel_W(x - h)) / (2 * h), 1e-7);
    }
}

TEST(Quadrature, GaussRuleExactToDegreeSeven) {
    for (int k = 0; k <= 7; ++k) EXPECT_NEAR(gauss_unit(k), 1.0 / (k + 1), 1e-15);
}

TEST(Entropy, Examples) {
    EXPECT_NEAR(entropy(uniform_measure(64)), -std::log(two_pi), 1e-13);
    EXPECT_NEAR(entropy(half_circle(32)), -std::log(pi), 1e-13);
    EXPECT_GT(entropy(cosine_measure(0.1, 128)), -std::log(two_pi));
}

TEST(Interaction, UniformAnchors) {
    const auto u = uniform_measure(256);
    EXPECT_NEAR(interaction(u, 1.0), std::log(2.0) / pi, 2e-3);
    EXPECT_NEAR(interaction(u), std::log(2.0) / two_pi, 1e-3);
}

TEST(Interaction, SelfCellMatchesOneDimensionalReduction) {
    // A single cell of width h: int int W over [0,h]^2 with density 1/h, reduced to
    // (2/h^2) int_0^h (h - r) W(r) dr and integrated numerically in r = h s^2.
    // The closed form drops the O(r^2) part of log|sin(r/2)| - log(r/2).
    for (double h : {0.01, 0.1, 0.5}) {
        const int k = 200000;
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            const double t = (i + 0.5) / k, r = h * t * t;
            s += (h - r) * kernel_W(r) * 2 * h * t;
        }
        const double oracle = 2.0 / (h * h) * s / k;
        const double closed = -(std::log(h / 2) - 1.5) / pi;
        EXPECT_NEAR(closed, oracle, h * h / 100 + 1e-5) << h;
    }
}

TEST(Interaction, ConcentrationRaisesEnergy) {
    const double spread = interaction(two_clusters(0.4, 64), 1.0);
    const double single = interaction(cluster(0.0, 0.4, 64), 1.0);
    EXPECT_LT(spread, single);
    EXPECT_GT(interaction(cluster(0.0, 0.01, 64)), interaction(cluster(0.0, 0.1, 64)));
    EXPECT_GT(interaction(cluster(0.0, 1e-6, 64), 1.0), 4.0);
}

TEST(Interaction, RotationInvariant) {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_cells(rng, 40);
        EXPECT_NEAR(interaction(m.rotated(uniform_real(rng, -4, 4))), interaction(m), 1e-12);
    }
}

TEST(FreeEnergy, Examples) {
    const auto u = uniform_measure(128);
    const auto r = free_energy(u, 0.1);
    EXPECT_NEAR(r.entropy, -std::log(two_pi), 1e-13);
    EXPECT_NEAR(r.total, 0.1 * r.entropy + r.interaction, 1e-15);
    EXPECT_DOUBLE_EQ(free_energy(u, 0.0).total, interaction(u));
    EXPECT_THROW(free_energy(u, -1.0), std::invalid_argument);
}

TEST(Property, FreeEnergyBoundedBelow) {
    Rng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_cells(rng, 16 + trial % 50, 0.95);
        const double nu = uniform_real(rng, 0.0, 2.0);
        EXPECT_GE(free_energy(m, nu).total, -two_pi * nu / std::exp(1.0) - 1e-12);
    }
}

TEST(Property, EntropyGradientMatchesDifferences) {
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_cells(rng, 12);
        auto g = detail::geometry_of(m);
        std::vector<double> gl(m.size()), gr(m.size());
        entropy(g.view(), gl.data(), gr.data());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double h = 1e-6, l = g.lefts[i];
            g.lefts[i] = l + h;
            const double fp = entropy(g.view());
            g.lefts[i] = l - h;
            const double fm = entropy(g.view());
            g.lefts[i] = l;
            EXPECT_NEAR(gl[i], (fp - fm) / (2 * h), 1e-5 * (1 + std::abs(gl[i])));
        }
    }
}

TEST(Property, InteractionGradientMatchesDifferences) {
    Rng rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_cells(rng, 16);
        auto g = detail::geometry_of(m);
        std::vector<double> gl(m.size()), gr(m.size());
        interaction_unit(g.view(), gl.data(), gr.data());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double h = 1e-6;
            for (auto* side : {&g.lefts, &g.rights}) {
                const double v = (*side)[i];
                (*side)[i] = v + h;
                const double fp = interaction_unit(g.view());
                (*side)[i] = v - h;
                const double fm = interaction_unit(g.view());
                (*side)[i] = v;
                const double an = side == &g.lefts ? gl[i] : gr[i];
                EXPECT_NEAR(an, (fp - fm) / (2 * h), 1e-5 * (1 + std::abs(an)));
            }
        }
    }
}

TEST(Property, LowerSemicontinuityAlongGeodesics) {
    Rng rng(35);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_cells(rng, 32), r = random_cells(rng, 32);
        const double f = free_energy(m, 0.1).total;
        double last = 0.0;
        for (int k = 1; k <= 30; ++k) {
            const auto mk = geodesic(m, r, std::ldexp(1.0, -k));
            last = free_energy(mk, 0.1).total;
        }
        EXPECT_GE(last, f - 1e-6);
    }
}
