// circleflow: run one experiment described by a JSON config file.
//
// Exit status: 0 all assertions passed, 1 an assertion failed (or a runtime
// error occurred), 2 the config violates the schema, 3 the inner solver did
// not converge on some step.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "circleflow/circleflow.hpp"
#include "circleflow/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace circleflow;

namespace {

struct Report {
    json assertions = json::array();
    json results = json::object();
    bool all_pass = true;

    void check(const std::string& name, bool pass, double value, double limit) {
        assertions.push_back({{"name", name}, {"pass", pass}, {"value", value}, {"limit", limit}});
        all_pass = all_pass && pass;
    }
};

struct Run {
    const ExperimentConfig& cfg;
    fs::path out;
    bool quiet;
    Report report;
    int exit_code = 0;

    void say(const std::string& s) const {
        if (!quiet) std::cout << s << "\n";
    }
};

json plan_json(const TransportPlan& p) {
    return {{"n", p.n},
            {"shift", p.shift},
            {"sources", p.sources},
            {"lifted_targets", p.lifted_targets},
            {"displacements", p.displacements},
            {"cost", p.cost}};
}

json energy_json(const EnergyReport& e) {
    return {{"entropy", e.entropy},
            {"interaction", e.interaction},
            {"total", e.total},
            {"nu", e.nu},
            {"interaction_coefficient", e.interaction_coefficient}};
}

void cmd_evolve(Run& r) {
    const auto& c = r.cfg;
    const auto m0 = initial_data(c.initial, c.solver.N);
    const auto tr = evolve(m0, c.solver);
    const auto u = uniform_measure(m0.size());
    std::vector<double> dist(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) dist[k] = dper(tr.snapshots[k], u);
    write_trajectory(r.out, tr, dist, c.snapshot_every);

    const double inf_f = free_energy(u, c.solver.nu, c.solver.coeff).total;
    double rise = 0.0, step_excess = -1e300, sum = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        rise = std::max(rise, tr.energies[k].total - tr.energies[k - 1].total);
        step_excess = std::max(step_excess, tr.energies[k].total + tr.step_costs[k] / (2 * c.solver.tau) -
                                                 tr.energies[k - 1].total);
        sum += tr.step_costs[k] / (2 * c.solver.tau);
    }
    const double tele = sum - (tr.energies.front().total - inf_f);
    r.report.check("energy_nonincreasing", rise <= 1e-6, rise, 1e-6);
    r.report.check("energy_decay_per_step", step_excess <= 1e-8, step_excess, 1e-8);
    r.report.check("telescoping_energy_identity", tele <= 1e-6, tele, 1e-6);
    r.report.results = {{"steps", tr.size() - 1},
                        {"final_energy", energy_json(tr.energies.back())},
                        {"final_dist_to_minimizer", dist.back()},
                        {"halved_steps", tr.halved_steps},
                        {"nonconverged_steps", tr.nonconverged_steps}};
    r.say("evolve: " + std::to_string(tr.size() - 1) + " steps, F " + format_real(tr.energies.front().total) + " -> " +
          format_real(tr.energies.back().total) + ", dist_to_minimizer " + format_real(dist.back()));
    if (!tr.nonconverged_steps.empty()) {
        std::cerr << "circleflow: inner solver did not converge at step " << tr.nonconverged_steps.front() << "\n";
        r.exit_code = 3;
    }
}

void cmd_distance(Run& r) {
    const auto a = read_measure_file(r.cfg.a_file);
    const auto b = read_measure_file(r.cfg.b_file);
    const double q = dper2_quantile(a, b);
    r.report.results["dper2_quantile"] = q;
    r.say("dper2_quantile " + format_real(q));
    if (a.size() == b.size()) {
        const auto aa = atoms_of(a), ab = atoms_of(b);
        if (aa.size() == a.size() && ab.size() == b.size()) {
            const auto plan = dper2_plan(aa, ab);
            const double o = dper2_oracle(aa, ab);
            r.report.results["dper2"] = plan.cost;
            r.report.results["dper2_oracle"] = o;
            r.report.results["plan"] = plan_json(plan);
            r.report.check("oracle_agreement", std::abs(plan.cost - o) <= 1e-10, std::abs(plan.cost - o), 1e-10);
            r.say("dper2 " + format_real(plan.cost) + "\ndper2_oracle " + format_real(o));
        }
    }
}

void cmd_energy(Run& r) {
    const auto m = initial_data(r.cfg.initial, r.cfg.solver.N);
    const auto e = free_energy(m, r.cfg.solver.nu, r.cfg.solver.coeff);
    r.report.results = energy_json(e);
    const double gap = std::abs(e.total - (e.nu * e.entropy + e.interaction));
    r.report.check("total_consistent", gap <= 1e-12, gap, 1e-12);
    r.say("entropy " + format_real(e.entropy) + "\ninteraction " + format_real(e.interaction) + "\ntotal " +
          format_real(e.total));
}

void cmd_geodesic(Run& r) {
    const auto a = read_measure_file(r.cfg.a_file);
    const auto b = read_measure_file(r.cfg.b_file);
    if (a.size() != b.size()) throw std::invalid_argument("geodesic: measures must have the same cell count");
    const auto g = geodesic(a, b, r.cfg.t);
    fs::create_directories(r.out);
    write_measure_file(r.out / "geodesic.msr", g);
    const double dab = std::sqrt(best_lattice_match(a, b).cost);
    const double dag = std::sqrt(best_lattice_match(a, g).cost);
    const double dgb = std::sqrt(best_lattice_match(g, b).cost);
    const double err = std::max(std::abs(dag - r.cfg.t * dab), std::abs(dgb - (1 - r.cfg.t) * dab));
    r.report.check("constant_speed", err <= 1e-8, err, 1e-8);
    r.report.results = {{"t", r.cfg.t}, {"d_ab", dab}, {"d_ag", dag}, {"d_gb", dgb}, {"dper2_quantile_ab", dper2_quantile(a, b)}};
    r.say("geodesic point written to " + (r.out / "geodesic.msr").string());
}

void cmd_hilbert(Run& r) {
    const auto u = initial_grid(r.cfg.initial, r.cfg.M, r.cfg.solver.N);
    const auto h = hilbert_transform(u);
    const auto pv = hilbert_transform_pv(u.values());
    const auto v = interaction_velocity(u);
    double dpv = 0.0, dv = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        dpv = std::max(dpv, std::abs(h[j] - pv[j]));
        dv = std::max(dv, std::abs(v[j] + h[j]));
    }
    fs::create_directories(r.out);
    write_grid_file(r.out / "hilbert.grd", h);
    r.report.check("velocity_equals_minus_hilbert", dv <= 1e-8, dv, 1e-8);
    r.report.results = {{"M", u.size()}, {"max_abs_multiplier_minus_pv", dpv}};
    r.say("max |H_multiplier - H_pv| " + format_real(dpv));
}

void cmd_sweep(Run& r) {
    const auto m0 = initial_data(r.cfg.initial, r.cfg.solver.N);
    const auto rep = inviscid_sweep(m0, r.cfg.nus, r.cfg.solver);
    r.report.results = {{"nus", rep.nus}, {"errors", rep.errors}, {"slack", rep.slack}};
    r.report.check("errors_nonincreasing", rep.pass, 0.0, rep.slack);
    for (std::size_t i = 0; i < rep.nus.size(); ++i) r.say("nu " + format_real(rep.nus[i]) + " e " + format_real(rep.errors[i]));
}

void cmd_error_bound(Run& r) {
    const auto m0 = initial_data(r.cfg.initial, r.cfg.solver.N);
    json rows = json::array();
    for (double tau : r.cfg.taus) {
        SolverConfig s = r.cfg.solver;
        s.tau = tau;
        const auto rep = error_bound_check(m0, s);
        rows.push_back({{"tau", tau}, {"tau_ref", rep.tau_ref}, {"sup_dist2", rep.sup_dist2}, {"bound", rep.bound}});
        r.report.check("error_bound_tau_" + format_real(tau), rep.pass, rep.sup_dist2, rep.bound);
        r.say("tau " + format_real(tau) + " sup d^2 " + format_real(rep.sup_dist2) + " bound " + format_real(rep.bound));
    }
    r.report.results["runs"] = rows;
}

void cmd_spectral(Run& r) {
    const auto& c = r.cfg;
    const auto u0 = initial_grid(c.initial, c.M, c.solver.N);
    const double dt = c.dt > 0.0 ? c.dt : spectral_dt_bound(u0, c.solver.nu);
    const auto run = spectral_evolve(u0, c.solver.nu, dt, c.solver.t_end, c.M, c.snapshot_every);
    fs::create_directories(r.out);
    for (std::size_t i = 0; i < run.states.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "grid_%06zu.grd", i);
        write_grid_file(r.out / name, run.states[i].grid.values());
    }
    std::string csv = "t,l2_norm\n";
    for (std::size_t i = 0; i < run.step_times.size(); ++i)
        csv += format_real(run.step_times[i]) + "," + format_real(run.l2_norm[i]) + "\n";
    detail::write_file(r.out / "spectral.csv", csv);
    r.report.check("mass_conservation", run.mass_drift <= 1e-14, run.mass_drift, 1e-14);
    r.report.results = {{"dt", dt},
                        {"status", run.status == SpectralStatus::completed ? "completed" : "breakdown"},
                        {"message", run.message},
                        {"l2_initial", run.l2_norm.front()},
                        {"l2_final", run.l2_norm.back()},
                        {"l2_dist_to_uniform_final", l2_distance_to_uniform(run.states.back().grid)}};
    if (run.status == SpectralStatus::breakdown) r.report.results["breakdown_time"] = run.breakdown_time;
    r.say(std::string("spectral: ") + (run.status == SpectralStatus::completed ? "completed" : run.message) +
          ", L2 norm " + format_real(run.l2_norm.front()) + " -> " + format_real(run.l2_norm.back()));
}

void cmd_cross_validate(Run& r) {
    const auto& c = r.cfg;
    const auto m0 = initial_data(c.initial, c.solver.N);
    const auto u0 = initial_grid(c.initial, c.M, c.solver.N);
    const auto rep = cross_validate(m0, u0, c.solver);
    r.report.results = {{"applicable", rep.applicable}, {"times", rep.times}, {"distances", rep.distances}};
    r.report.check("sup_distance", rep.applicable && rep.pass, rep.sup_distance, rep.tolerance);
    r.say("cross-validate: sup d_per " + format_real(rep.sup_distance) + " (tolerance " + format_real(rep.tolerance) + ")");
}

void cmd_validate(Run& r) {
    const auto bundle = r.cfg.bundle_dir.empty() ? validation::default_bundle() : validation::load_bundle(r.cfg.bundle_dir);
    const auto res = run_acceptance(bundle, [&](const CriterionResult& c) { r.say(format_criterion(c)); });
    json rows = json::array();
    for (const auto& c : res) {
        rows.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}});
        r.report.check("criterion_" + std::to_string(c.id), c.pass, c.pass ? 1.0 : 0.0, 1.0);
    }
    r.report.results["criteria"] = rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-flow experiments on the circle"};
    std::string config_path, output;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--output", output, "output directory (overrides output_dir)");
    app.add_flag("--quiet", quiet, "suppress progress output");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "circleflow: schema error: " << e.what() << "\n";
        return 2;
    }

    Run run{cfg, output.empty() ? cfg.output_dir : fs::path(output), quiet, {}, 0};
    try {
        fs::create_directories(run.out);
        const std::string& cmd = cfg.command;
        if (cmd == "evolve") cmd_evolve(run);
        else if (cmd == "distance") cmd_distance(run);
        else if (cmd == "energy") cmd_energy(run);
        else if (cmd == "geodesic") cmd_geodesic(run);
        else if (cmd == "hilbert") cmd_hilbert(run);
        else if (cmd == "sweep-nu") cmd_sweep(run);
        else if (cmd == "error-bound") cmd_error_bound(run);
        else if (cmd == "spectral") cmd_spectral(run);
        else if (cmd == "cross-validate") cmd_cross_validate(run);
        else if (cmd == "validate") cmd_validate(run);

        json meta = {{"library_version", library_version}, {"config", cfg.raw}, {"resolved", resolved_json(cfg)}};
        detail::write_file(run.out / "meta.json", meta.dump(2) + "\n");
        json rep = {{"command", cmd},
                    {"pass", run.report.all_pass},
                    {"assertions", run.report.assertions},
                    {"results", run.report.results}};
        detail::write_file(run.out / "report.json", rep.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "circleflow: error: " << e.what() << "\n";
        return 1;
    }
    if (run.exit_code != 0) return run.exit_code;
    if (!run.report.all_pass) {
        for (const auto& a : run.report.assertions)
            if (!a["pass"].get<bool>()) std::cerr << "circleflow: assertion failed: " << a["name"].get<std::string>() << "\n";
        return 1;
    }
    return 0;
}
