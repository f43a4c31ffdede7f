#include <gtest/gtest.h>

#include <cmath>

#include "circleflow/circot.hpp"
#include "circleflow/diagnostics.hpp"
#include "circleflow/jko.hpp"
#include "circleflow/random.hpp"
#include "circleflow/weak_form.hpp"

using namespace circleflow;

namespace {

SolverConfig solver(double nu, double tau, double t_end, std::size_t n) {
    SolverConfig c;
    c.nu = nu;
    c.tau = tau;
    c.t_end = t_end;
    c.N = n;
    c.inner.method = InnerMethod::lbfgs;
    return c;
}

}  // namespace

TEST(Objective, AtPreviousEqualsFreeEnergy) {
    const auto m = cosine_measure(0.1, 32);
    const auto cfg = solver(0.1, 0.05, 1.0, 32);
    const auto v = jko_objective(cfg.tau, m, encode_candidate(m), cfg);
    EXPECT_NEAR(v.value, free_energy(m, cfg.nu).total, 1e-12);
}

TEST(Objective, GradientMatchesDifferences) {
    Rng rng(51);
    const auto prev = random_cells(rng, 16);
    const auto cand = encode_candidate(random_cells(rng, 16));
    const auto cfg = solver(0.2, 0.05, 1.0, 16);
    const auto v = jko_objective(cfg.tau, prev, cand, cfg);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        auto p = cand, q = cand;
        const double h = 1e-6;
        p[i] += h;
        q[i] -= h;
        const double fd = (jko_objective(cfg.tau, prev, p, cfg).value - jko_objective(cfg.tau, prev, q, cfg).value) / (2 * h);
        EXPECT_NEAR(v.gradient[i], fd, 1e-5 * (1 + std::abs(fd))) << i;
    }
}

TEST(Objective, InvariantUnderZShift) {
    Rng rng(52);
    const auto prev = random_cells(rng, 12);
    auto cand = encode_candidate(random_cells(rng, 12));
    const auto cfg = solver(0.1, 0.05, 1.0, 12);
    const double a = jko_objective(cfg.tau, prev, cand, cfg).value;
    for (std::size_t i = 1; i < cand.size(); ++i) cand[i] += 3.7;
    EXPECT_NEAR(jko_objective(cfg.tau, prev, cand, cfg).value, a, 1e-12);
}

TEST(Knots, OpenLayoutGradientMatchesDifferences) {
    const auto prev = dirac_measure(0.05, 12);
    detail::JkoProblem prob(prev, 0.02, 0.1, 0.5, false);
    auto x = prob.initial_knots();
    ASSERT_EQ(x.size(), 13u);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 0.002 * std::sin(3.0 * i);
    std::vector<double> g(x.size());
    prob.evaluate(x, g.data());
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto p = x, q = x;
        const double h = 1e-7;
        p[i] += h;
        q[i] -= h;
        const double fd = (prob.evaluate(p, nullptr) - prob.evaluate(q, nullptr)) / (2 * h);
        EXPECT_NEAR(g[i], fd, 1e-5 * (1 + std::abs(fd))) << i;
    }
}

TEST(Step, UniformIsFixedPoint) {
    const auto u = uniform_measure(64);
    for (double nu : {0.0, 0.1, 1.0}) {
        const auto m = jko_step(0.05, u, solver(nu, 0.05, 1.0, 64));
        EXPECT_LE(dper2_quantile(m, u), 1e-10);
    }
}

TEST(Step, DecreasesEnergyAndObeysStepBound) {
    const auto cfg = solver(0.1, 0.05, 1.0, 64);
    const auto prev = cosine_measure(0.1, 64);
    const auto next = jko_step(cfg.tau, prev, cfg);
    const double f0 = free_energy(prev, cfg.nu).total, f1 = free_energy(next, cfg.nu).total;
    EXPECT_LT(f1, f0);
    EXPECT_LE(dper2_quantile(prev, next), 2 * cfg.tau * (f0 - f1) + 1e-8);
}

TEST(Step, RejectsSeveralGaps) {
    EXPECT_THROW(jko_step(0.01, cantor_measure(3), solver(0.1, 0.01, 1.0, 8)), std::invalid_argument);
}

TEST(Step, DiracSpreads) {
    const auto cfg = solver(0.1, 0.02, 1.0, 64);
    const auto m0 = dirac_measure(1e-3, 64);
    const auto m1 = jko_step(cfg.tau, m0, cfg);
    EXPECT_GT(m1.min_width(), m0.min_width());
    EXPECT_LT(free_energy(m1, cfg.nu).total, free_energy(m0, cfg.nu).total);
}

TEST(Evolve, UniformStaysUniform) {
    const auto cfg = solver(0.1, 0.05, 1.0, 32);
    const auto tr = evolve(uniform_measure(32), cfg);
    ASSERT_EQ(tr.size(), 21u);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_NEAR(tr.times[k], 0.05 * k, 1e-12);
        EXPECT_LE(dper2_quantile(tr.snapshots[k], uniform_measure(32)), 1e-10);
        EXPECT_NEAR(tr.energies[k].total, tr.energies[0].total, 1e-12);
    }
}

TEST(Evolve, EnergyAndDistanceDecay) {
    const auto cfg = solver(0.1, 0.05, 2.0, 64);
    const auto tr = evolve(cosine_measure(0.12, 64), cfg);
    const auto u = minimizer(cfg);
    double prev_d = dper(tr.snapshots[0], u);
    for (std::size_t k = 1; k < tr.size(); ++k) {
        EXPECT_LE(tr.energies[k].total, tr.energies[k - 1].total + 1e-12);
        const double d = dper(tr.snapshots[k], u);
        EXPECT_LE(d, prev_d + 1e-4);
        prev_d = d;
    }
    EXPECT_TRUE(tr.nonconverged_steps.empty());
}

TEST(Evolve, TelescopingEnergyBudget) {
    const auto cfg = solver(0.1, 0.05, 1.0, 48);
    const auto tr = evolve(cosine_measure(0.1, 48), cfg);
    double sum = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) sum += tr.step_costs[k] / (2 * cfg.tau);
    EXPECT_LE(sum, tr.energies.front().total - tr.energies.back().total + 1e-6);
}

TEST(Evolve, LongRunApproachesUniform) {
    const auto cfg = solver(1.0, 0.05, 5.0, 64);
    const auto tr = evolve(cosine_measure(0.15, 64), cfg);
    EXPECT_LE(dper2_quantile(tr.snapshots.back(), minimizer(cfg)), 1e-4);
}

TEST(Evolve, GradientDescentMatchesLbfgs) {
    auto a = solver(0.2, 0.05, 0.2, 24), b = a;
    b.inner.method = InnerMethod::gradient_descent;
    b.inner.max_iter = 5000;
    const auto m0 = cosine_measure(0.1, 24);
    EXPECT_LE(dper(evolve(m0, a).snapshots.back(), evolve(m0, b).snapshots.back()), 1e-6);
}

TEST(Minimizer, UniformMinimisesEnergy) {
    Rng rng(53);
    for (double nu : {0.0, 0.1, 1.0}) {
        const double fu = free_energy(uniform_measure(64), nu).total;
        for (int trial = 0; trial < 100; ++trial) {
            const auto m = random_cells(rng, 64, 0.3);
            EXPECT_LE(fu, free_energy(m, nu).total + 1e-12);
        }
    }
}

TEST(Minimizer, EnergyGradientVanishesAtUniform) {
    // At cand = prev the transport gradient is zero, so this is the gradient of F.
    const auto u = uniform_measure(64).rotated(0.3);
    detail::JkoProblem prob(u, 1.0, 0.1, 0.5, true);
    const auto x = prob.initial_knots();
    std::vector<double> g(x.size());
    prob.evaluate(x, g.data());
    for (double v : g) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(Property, StepObjectiveConvexAlongGeneralizedGeodesics) {
    Rng rng(54);
    const double tau = 0.05, nu = 0.1;
    for (int trial = 0; trial < 10; ++trial) {
        const auto prev = random_cells(rng, 24), a = random_cells(rng, 24), b = random_cells(rng, 24);
        std::vector<double> psi;
        for (int i = 0; i <= 8; ++i) {
            const auto g = generalized_geodesic(prev, a, b, i / 8.0);
            psi.push_back(best_lattice_match(g.measure, prev).cost / (2 * tau) + free_energy(g.measure, nu).total);
        }
        for (int i = 1; i < 8; ++i) EXPECT_GE(psi[i - 1] - 2 * psi[i] + psi[i + 1], -1e-6);
    }
}

TEST(Diagnostics, ErrorBoundForUniformIsTrivial) {
    const auto cfg = solver(0.1, 0.1, 0.5, 32);
    const auto r = error_bound_check(uniform_measure(32), cfg, 2);
    EXPECT_LE(r.sup_dist2, 1e-10);
    EXPECT_TRUE(r.pass);
    const double expect = 0.1 * (free_energy(uniform_measure(32), 0.1).total + two_pi * 0.1 / std::exp(1.0));
    EXPECT_NEAR(r.bound, expect, 1e-14);
}

TEST(Diagnostics, ContractionOfIdenticalData) {
    const auto cfg = solver(0.1, 0.05, 0.5, 32);
    const auto m = cosine_measure(0.1, 32);
    const auto r = contraction_check(m, m, cfg);
    EXPECT_LE(r.max_excess, 1e-6);
    EXPECT_TRUE(r.pass);
}

TEST(Diagnostics, InviscidSweepValidatesList) {
    const auto cfg = solver(0.1, 0.05, 0.2, 16);
    const auto m = cosine_measure(0.1, 16);
    EXPECT_THROW(inviscid_sweep(m, {0.1, 0.05}, cfg), std::invalid_argument);
    EXPECT_THROW(inviscid_sweep(m, {0.05, 0.1, 0.0}, cfg), std::invalid_argument);
    const auto r = inviscid_sweep(m, {0.0}, cfg);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0], 0.0);
}

TEST(WeakForm, UniformIsStationary) {
    const auto tr = evolve(uniform_measure(64), solver(0.1, 0.05, 0.5, 64));
    for (int k : {1, 2, 3}) {
        EXPECT_NEAR(weak_form_residual(tr, k, 0.25), 0.0, 1e-10);
        EXPECT_NEAR(weak_form_residual(tr, k, 0.25, TestFunction::sine), 0.0, 1e-10);
    }
}

TEST(WeakForm, ConstantTestFunctionHasNoResidual) {
    const auto tr = evolve(cosine_measure(0.1, 32), solver(0.1, 0.05, 0.5, 32));
    EXPECT_NEAR(weak_form_residual(tr, 0, 0.25), 0.0, 1e-12);
    EXPECT_THROW(weak_form_residual(tr, 1, 0.6), std::out_of_range);
}

TEST(WeakForm, ResidualShrinksUnderRefinement) {
    const auto coarse = evolve(cosine_measure(0.1, 32), solver(0.1, 0.02, 0.2, 32));
    const auto fine = evolve(cosine_measure(0.1, 64), solver(0.1, 0.01, 0.2, 64));
    EXPECT_LT(weak_form_residual(fine, 1, 0.1), weak_form_residual(coarse, 1, 0.1));
}
