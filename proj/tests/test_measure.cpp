#include <gtest/gtest.h>

#include <cmath>

#include "circleflow/circot.hpp"
#include "circleflow/energy.hpp"
#include "circleflow/measure.hpp"
#include "circleflow/random.hpp"

using namespace circleflow;

namespace {

// Independent inverse of a monotone CDF by plain bisection.
double invert(const std::function<double(double)>& F, double q) {
    double lo = -pi, hi = pi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void expect_valid(const CellMeasure& m) {
    double mass = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_GT(m.width(i), 0.0);
        mass += m.density(i) * m.width(i);
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);
    double prev = -1e300;
    for (int k = 0; k <= 1000; ++k) {
        const double x = m.quantile(k / 1000.0);
        EXPECT_GE(x, prev);
        prev = x;
    }
}

}  // namespace

TEST(Wrap, ExamplesAndRange) {
    EXPECT_NEAR(wrap(1.5 * pi), -0.5 * pi, 1e-15);
    EXPECT_EQ(wrap(pi), -pi);
    EXPECT_EQ(wrap(-pi), -pi);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = uniform_real(rng, -100.0, 100.0);
        const double y = wrap(x);
        EXPECT_GE(y, -pi);
        EXPECT_LT(y, pi);
        const double k = (y - x) / two_pi;
        EXPECT_NEAR(k, std::round(k), 1e-12);
    }
}

TEST(PointDist, Examples) {
    EXPECT_NEAR(point_dist(0.0, pi), pi, 1e-15);
    EXPECT_NEAR(point_dist(-3.0, 3.0), two_pi - 6.0, 1e-14);
    EXPECT_NEAR(point_dist(0.1, 0.1 + 4 * pi), 0.0, 1e-13);
}

TEST(UniformMeasure, EqualSpacings) {
    const auto m = uniform_measure(4);
    EXPECT_EQ(m.base(), -pi);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(m.width(i), pi / 2, 1e-15);
        EXPECT_NEAR(m.density(i), 1.0 / two_pi, 1e-15);
    }
    const auto m2 = uniform_measure(2);
    EXPECT_NEAR(m2.width(0), pi, 1e-15);
    EXPECT_NEAR(m2.width(1), pi, 1e-15);
    EXPECT_THROW(uniform_measure(1), std::invalid_argument);
}

TEST(UniformMeasure, EntropyClosedForm) {
    for (std::size_t n : {2, 3, 17, 128, 1000}) EXPECT_NEAR(entropy(uniform_measure(n)), -std::log(two_pi), 1e-12);
}

TEST(CellMeasure, RejectsBadCells) {
    EXPECT_THROW(CellMeasure::from_spacings(0.0, {1.0, -1.0}), std::invalid_argument);
    EXPECT_THROW(CellMeasure::from_cells({0.0, 0.5}, {1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(CellMeasure::from_cells({0.0}, {0.0}), std::invalid_argument);
}

TEST(CellMeasure, SpacingsRenormalised) {
    const auto m = CellMeasure::from_spacings(7.0, {1.0, 2.0, 3.0});
    EXPECT_NEAR(m.total_width(), two_pi, 1e-12);
    EXPECT_NEAR(m.base(), wrap(7.0), 1e-15);
    EXPECT_TRUE(m.contiguous());
}

TEST(CellMeasure, QuantileAndCumulativeInvert) {
    Rng rng(2);
    const auto m = random_cells(rng, 20);
    for (int k = 0; k < 200; ++k) {
        const double s = uniform_real(rng, -2.0, 3.0);
        EXPECT_NEAR(m.cumulative(m.quantile(s)), s, 1e-12);
    }
}

TEST(FromDensity, ConstantGivesUniform) {
    const auto g = GridDensity::sample([](double) { return 1.0; }, 64);
    const auto m = from_density(g, 8);
    const auto u = uniform_measure(8);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(wrap(m.left(i) - u.left(i)), 0.0, 1e-12);
        EXPECT_NEAR(m.width(i), u.width(i), 1e-12);
    }
}

TEST(ToDensity, UniformGivesConstant) {
    const auto g = to_density(uniform_measure(8), 64);
    for (double v : g.values()) EXPECT_NEAR(v, 1.0 / two_pi, 1e-14);
}

TEST(FromDensity, CosineMatchesBisectionOracle) {
    const std::size_t n = 64, m = 4096;
    const auto g = GridDensity::sample([](double x) { return (1.0 + std::cos(x)) / two_pi; }, m);
    const auto cells = from_density(g, n);
    const auto F = [](double x) { return (x + pi + std::sin(x)) / two_pi; };
    for (std::size_t i = 1; i < n; ++i) {
        const double expect = invert(F, static_cast<double>(i) / n);
        EXPECT_NEAR(wrap(cells.left(i) - expect), 0.0, 2e-5) << "boundary " << i;
    }
    std::size_t narrowest = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (cells.width(i) < cells.width(narrowest)) narrowest = i;
    EXPECT_LT(std::abs(wrap(cells.midpoint(narrowest))), 0.5);
}

TEST(FromDensity, PlateauUsesMidpointOfLevelSet) {
    const std::size_t m = 64;
    std::vector<double> v(m, 1.0);
    // Box 0 straddles -pi, so zeroing boxes 24..40 leaves 23.5 boxes of mass
    // on either side and the level set {F = 1/2} is centred on x = 0.
    for (std::size_t j = 24; j <= 40; ++j) v[j] = 0.0;
    const auto cells = from_density(GridDensity::normalized(v), 2);
    EXPECT_NEAR(cells.left(1), 0.0, 1e-9);
}

TEST(AtomsOf, Midpoints) {
    const auto a = atoms_of(uniform_measure(2));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR(a.position(0), -pi / 2, 1e-15);
    EXPECT_NEAR(a.position(1), pi / 2, 1e-15);
    EXPECT_NEAR(a.weight(0) + a.weight(1), 1.0, 1e-15);
    const auto b = atoms_of(uniform_measure(4));
    const double expect[] = {-0.75 * pi, -0.25 * pi, 0.25 * pi, 0.75 * pi};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(b.position(i), expect[i], 1e-15);
}

TEST(AtomMeasure, MergesTiesAndValidates) {
    const AtomMeasure a({0.0, two_pi, 1.0}, {0.25, 0.25, 0.5});
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR(a.weight(0), 0.5, 1e-15);
    EXPECT_THROW(AtomMeasure({0.0, 1.0}, {0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(AtomMeasure({0.0, 1.0}, {1.5, -0.5}), std::invalid_argument);
}

TEST(Cantor, FirstLevels) {
    const auto c1 = cantor_measure(1);
    ASSERT_EQ(c1.size(), 2u);
    EXPECT_NEAR(c1.left(0), -pi, 1e-15);
    EXPECT_NEAR(c1.right(0), -pi / 3, 1e-14);
    EXPECT_NEAR(c1.left(1), pi / 3, 1e-14);
    EXPECT_NEAR(c1.right(1), pi, 1e-14);
    EXPECT_EQ(c1.gap_count(), 1u);   // the outer thirds meet across -pi
    EXPECT_EQ(cantor_measure(2).gap_count(), 3u);
    const auto c2 = cantor_measure(2);
    ASSERT_EQ(c2.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(c2.width(i), two_pi / 9, 1e-14);
    expect_valid(c2);
    EXPECT_THROW(cantor_measure(0), std::invalid_argument);
    EXPECT_THROW(cantor_measure(13), std::invalid_argument);
}

TEST(Cosine, ZeroAmplitudeIsUniform) {
    const auto m = cosine_measure(0.0, 16);
    const auto u = uniform_measure(16);
    for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(m.width(i), u.width(i), 1e-13);
}

TEST(Cosine, DensityAtOrigin) {
    const auto m = cosine_measure(0.1, 512);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.left(i) <= 0.0 && m.right(i) > 0.0) {
            EXPECT_NEAR(m.density(i), 1.0 / two_pi + 0.1, 1e-4);
        }
    EXPECT_THROW(cosine_measure(0.2, 16), std::invalid_argument);
}

TEST(Dirac, SupportWithinArc) {
    const auto m = dirac_measure(1e-3, 64);
    EXPECT_NEAR(m.right(63) - m.left(0), 1e-3, 1e-15);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(m.width(i), 1e-3 / 64, 1e-18);
    EXPECT_EQ(m.gap_count(), 1u);
}

TEST(Constructors, MassSpacingsQuantile) {
    expect_valid(uniform_measure(9));
    expect_valid(cosine_measure(0.15, 33));
    expect_valid(dirac_measure(0.01, 10));
    expect_valid(cantor_measure(4));
    Rng rng(3);
    expect_valid(random_cells(rng, 40));
    expect_valid(from_density(GridDensity::sample([](double x) { return std::exp(std::sin(3 * x)); }, 256), 50));
}

TEST(GridDensity, Validation) {
    EXPECT_THROW(GridDensity(std::vector<double>(6, 1.0 / two_pi)), std::invalid_argument);
    EXPECT_THROW(GridDensity(std::vector<double>(8, 1.0)), std::invalid_argument);
    std::vector<double> v(8, 1.0 / two_pi);
    v[0] = -1e-3;
    EXPECT_THROW(GridDensity{v}, std::invalid_argument);
    EXPECT_THROW(GridDensity::normalized(std::vector<double>(8, 0.0)), std::invalid_argument);
}

TEST(Property, EntropyInvariantUnderTranslation) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_cells(rng, 1 + 2 + trial % 30);
        const double delta = uniform_real(rng, -20.0, 20.0);
        EXPECT_NEAR(entropy(m.rotated(delta)), entropy(m), 1e-12);
    }
}

TEST(Property, DensityRoundTrip) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 8 + static_cast<std::size_t>(trial) * 3;
        const auto m = random_cells(rng, n);
        std::size_t grid = 1;
        while (grid < 4 * n) grid *= 2;
        const auto back = from_density(to_density(m, grid), n);
        EXPECT_LE(dper(back, m), 4 * pi / static_cast<double>(n));
    }
}
