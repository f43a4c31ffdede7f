#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "circleflow/energy.hpp"
#include "circleflow/measure.hpp"

namespace circleflow {

enum class InnerMethod { gradient_descent, lbfgs };

inline const char* method_name(InnerMethod m) { return m == InnerMethod::lbfgs ? "lbfgs" : "gd"; }

inline InnerMethod parse_method(const std::string& s) {
    if (s == "gd") return InnerMethod::gradient_descent;
    if (s == "lbfgs") return InnerMethod::lbfgs;
    throw std::invalid_argument("unknown inner method '" + s + "' (expected gd or lbfgs)");
}

struct InnerConfig {
    int max_iter = 500;
    double grad_tol = 1e-9;
    double armijo_c = 1e-4;
    double armijo_shrink = 0.5;
    double step_init = 0.0;   // 0 selects tau
    InnerMethod method = InnerMethod::gradient_descent;
    int lbfgs_memory = 8;
};

struct SolverConfig {
    double nu = 0.1;
    double tau = 0.02;
    double t_end = 5.0;
    std::size_t N = 128;
    double coeff = pde_coefficient;
    InnerConfig inner;
    std::uint64_t seed = 0;
    int max_halvings = 4;

    void validate() const {
        if (!(nu >= 0.0)) throw std::invalid_argument("nu must be >= 0");
        if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
        if (!(t_end >= tau)) throw std::invalid_argument("t_end must be >= tau");
        if (N < 2) throw std::invalid_argument("N must be >= 2");
        if (!(inner.grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
        if (inner.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
        if (!(inner.armijo_c > 0.0 && inner.armijo_c < 1.0)) throw std::invalid_argument("armijo_c must lie in (0,1)");
        if (!(inner.armijo_shrink > 0.0 && inner.armijo_shrink < 1.0))
            throw std::invalid_argument("armijo_shrink must lie in (0,1)");
        if (!(inner.step_init >= 0.0)) throw std::invalid_argument("step_init must be >= 0");
    }
};

struct FlowTrajectory {
    std::vector<double> times;
    std::vector<CellMeasure> snapshots;
    std::vector<EnergyReport> energies;
    std::vector<double> step_costs;        // dper2(mu^{k-1}, mu^k); 0 for k = 0
    std::vector<int> inner_iterations;     // 0 for k = 0
    std::vector<std::size_t> halved_steps;
    std::vector<std::size_t> nonconverged_steps;

    std::size_t size() const { return snapshots.size(); }
};

}  // namespace circleflow
