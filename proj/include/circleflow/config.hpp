#pragma once

// Experiment configuration: a flat JSON object with "version": 1.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "circleflow/initial_data.hpp"
#include "circleflow/io.hpp"
#include "circleflow/trajectory.hpp"

namespace circleflow {

inline constexpr const char* library_version = "1.0.0";

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& field, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " +
                             (field.empty() ? std::string() : "field '" + field + "': ") + what),
          field_(field),
          line_(line) {}
    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }

private:
    std::string field_;
    std::size_t line_;
};

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> c{"evolve",   "distance",    "energy",   "geodesic",       "hilbert",
                                            "sweep-nu", "error-bound", "spectral", "cross-validate", "validate"};
    return c;
}

struct ExperimentConfig {
    std::string command;
    SolverConfig solver;
    InitialData initial;
    std::filesystem::path output_dir = "out";
    std::size_t snapshot_every = 1;
    std::filesystem::path a_file, b_file;   // distance, geodesic
    double t = 0.5;                          // geodesic parameter
    std::vector<double> nus{0.2, 0.1, 0.05, 0.0};
    std::vector<double> taus;
    std::size_t M = 256;
    double dt = 0.0;                         // 0 selects the stability bound
    std::filesystem::path bundle_dir;        // validate: directory of evolve configs
    nlohmann::json raw;
};

namespace detail {

class FieldReader {
public:
    FieldReader(const nlohmann::json& j, const std::string& text, const std::string& source)
        : j_(j), text_(text), source_(source) {}

    std::size_t line_of(const std::string& field) const {
        const auto pos = text_.find("\"" + field + "\"");
        if (pos == std::string::npos) return 1;
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ConfigError(source_, line_of(field), field, what);
    }

    bool has(const std::string& f) const { return j_.contains(f); }

    double number(const std::string& f, double def) const {
        if (!has(f)) return def;
        if (!j_[f].is_number()) fail(f, "expected a number");
        const double v = j_[f].get<double>();
        if (!std::isfinite(v)) fail(f, "must be finite");
        return v;
    }

    long integer(const std::string& f, long def) const {
        if (!has(f)) return def;
        if (!j_[f].is_number_integer()) fail(f, "expected an integer");
        return j_[f].get<long>();
    }

    std::string string(const std::string& f, const std::string& def) const {
        if (!has(f)) return def;
        if (!j_[f].is_string()) fail(f, "expected a string");
        return j_[f].get<std::string>();
    }

    std::vector<double> numbers(const std::string& f, std::vector<double> def) const {
        if (!has(f)) return def;
        if (!j_[f].is_array()) fail(f, "expected an array of numbers");
        std::vector<double> v;
        for (const auto& x : j_[f]) {
            if (!x.is_number()) fail(f, "expected an array of numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }

private:
    const nlohmann::json& j_;
    const std::string& text_;
    const std::string& source_;
};

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

}  // namespace detail

/// Parses and validates a configuration. Relative paths resolve against base_dir.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>",
                                     const std::filesystem::path& base_dir = ".") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
        const std::size_t line =
            1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos ? pos - 1 : 0), '\n'));
        throw ConfigError(source, line, "", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError(source, 1, "", "top level must be a JSON object");

    static const std::set<std::string> allowed{
        "version", "command",     "nu",     "tau",    "t_end",        "N",        "coeff",   "seed",
        "max_iter", "grad_tol",   "armijo_c", "armijo_shrink", "step_init", "method", "initial", "a1",
        "epsilon", "level",       "initial_file", "a", "b",          "t",        "nus",     "taus",
        "M",       "dt",          "snapshot_every", "output_dir", "bundle_dir"};
    detail::FieldReader rd(j, text, source);
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) rd.fail(item.key(), "unknown field");

    if (!rd.has("version")) rd.fail("version", "missing required field");
    if (rd.integer("version", 0) != 1) rd.fail("version", "unsupported schema version (expected 1)");
    if (!rd.has("command")) rd.fail("command", "missing required field");

    ExperimentConfig c;
    c.raw = j;
    c.command = rd.string("command", "");
    const auto& cmds = known_commands();
    if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end()) rd.fail("command", "unknown command '" + c.command + "'");

    SolverConfig& s = c.solver;
    s.nu = rd.number("nu", s.nu);
    if (!(s.nu >= 0.0)) rd.fail("nu", "must be >= 0");
    s.tau = rd.number("tau", s.tau);
    if (!(s.tau > 0.0)) rd.fail("tau", "must be > 0");
    s.t_end = rd.number("t_end", s.t_end);
    if (!(s.t_end >= s.tau)) rd.fail("t_end", "must be >= tau");
    const long n = rd.integer("N", static_cast<long>(s.N));
    if (n < 2) rd.fail("N", "must be >= 2");
    s.N = static_cast<std::size_t>(n);
    s.coeff = rd.number("coeff", s.coeff);
    if (s.coeff != 0.5 && s.coeff != 1.0) rd.fail("coeff", "must be 0.5 or 1");
    const long seed = rd.integer("seed", 0);
    if (seed < 0) rd.fail("seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
    const long mi = rd.integer("max_iter", s.inner.max_iter);
    if (mi < 1) rd.fail("max_iter", "must be >= 1");
    s.inner.max_iter = static_cast<int>(mi);
    s.inner.grad_tol = rd.number("grad_tol", s.inner.grad_tol);
    if (!(s.inner.grad_tol > 0.0)) rd.fail("grad_tol", "must be > 0");
    s.inner.armijo_c = rd.number("armijo_c", s.inner.armijo_c);
    if (!(s.inner.armijo_c > 0.0 && s.inner.armijo_c < 1.0)) rd.fail("armijo_c", "must lie in (0,1)");
    s.inner.armijo_shrink = rd.number("armijo_shrink", s.inner.armijo_shrink);
    if (!(s.inner.armijo_shrink > 0.0 && s.inner.armijo_shrink < 1.0)) rd.fail("armijo_shrink", "must lie in (0,1)");
    s.inner.step_init = rd.number("step_init", s.inner.step_init);
    if (!(s.inner.step_init >= 0.0)) rd.fail("step_init", "must be >= 0");
    try {
        s.inner.method = parse_method(rd.string("method", "gd"));
    } catch (const std::invalid_argument& e) {
        rd.fail("method", e.what());
    }

    try {
        c.initial.kind = parse_initial_kind(rd.string("initial", "uniform"));
    } catch (const std::invalid_argument& e) {
        rd.fail("initial", e.what());
    }
    c.initial.a1 = rd.number("a1", 0.0);
    if (c.initial.kind == InitialKind::cosine && !(std::abs(c.initial.a1) < 1.0 / two_pi))
        rd.fail("a1", "cosine data requires |a1| < 1/(2*pi) for a positive density");
    c.initial.epsilon = rd.number("epsilon", c.initial.epsilon);
    if (!(c.initial.epsilon > 0.0 && c.initial.epsilon < two_pi)) rd.fail("epsilon", "must lie in (0, 2*pi)");
    const long lvl = rd.integer("level", c.initial.level);
    if (lvl < 1 || lvl > 12) rd.fail("level", "must lie in [1, 12]");
    c.initial.level = static_cast<int>(lvl);
    if (rd.has("initial_file")) c.initial.file = detail::resolve(base_dir, rd.string("initial_file", ""));
    if (c.initial.kind == InitialKind::file) {
        if (!rd.has("initial_file")) rd.fail("initial_file", "required when initial is 'file'");
        if (!std::filesystem::exists(c.initial.file)) rd.fail("initial_file", "file not found: " + c.initial.file.string());
    }

    if (rd.has("a")) c.a_file = detail::resolve(base_dir, rd.string("a", ""));
    if (rd.has("b")) c.b_file = detail::resolve(base_dir, rd.string("b", ""));
    if (c.command == "distance" || c.command == "geodesic") {
        for (const char* f : {"a", "b"}) {
            if (!rd.has(f)) rd.fail(f, "required by command '" + c.command + "'");
            const auto& p = std::string(f) == "a" ? c.a_file : c.b_file;
            if (!std::filesystem::exists(p)) rd.fail(f, "file not found: " + p.string());
        }
    }
    c.t = rd.number("t", c.t);
    if (!(c.t >= 0.0 && c.t <= 1.0)) rd.fail("t", "must lie in [0, 1]");
    c.nus = rd.numbers("nus", c.nus);
    if (c.nus.empty() || c.nus.back() != 0.0) rd.fail("nus", "must end at 0");
    for (std::size_t i = 1; i < c.nus.size(); ++i)
        if (!(c.nus[i] < c.nus[i - 1])) rd.fail("nus", "must be strictly decreasing");
    c.taus = rd.numbers("taus", {s.tau});
    for (double v : c.taus)
        if (!(v > 0.0)) rd.fail("taus", "entries must be > 0");
    const long m = rd.integer("M", static_cast<long>(c.M));
    if (m < 2 || (m & (m - 1)) != 0) rd.fail("M", "must be a power of two >= 2");
    c.M = static_cast<std::size_t>(m);
    c.dt = rd.number("dt", 0.0);
    if (!(c.dt >= 0.0)) rd.fail("dt", "must be >= 0");
    const long se = rd.integer("snapshot_every", 1);
    if (se < 1) rd.fail("snapshot_every", "must be >= 1");
    c.snapshot_every = static_cast<std::size_t>(se);
    c.output_dir = detail::resolve(base_dir, rd.string("output_dir", "out"));
    if (rd.has("bundle_dir")) {
        c.bundle_dir = detail::resolve(base_dir, rd.string("bundle_dir", ""));
        if (!std::filesystem::is_directory(c.bundle_dir)) rd.fail("bundle_dir", "not a directory: " + c.bundle_dir.string());
    }
    if ((c.command == "spectral" || c.command == "cross-validate") && !(s.nu > 0.0))
        rd.fail("nu", "command '" + c.command + "' requires nu > 0");
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const std::runtime_error& e) {
        throw ConfigError(path.string(), 0, "", e.what());
    }
    return parse_config(text, path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

/// Effective settings, echoed into meta.json.
inline nlohmann::json resolved_json(const ExperimentConfig& c) {
    const auto& s = c.solver;
    return {{"command", c.command},
            {"nu", s.nu},
            {"tau", s.tau},
            {"t_end", s.t_end},
            {"N", s.N},
            {"coeff", s.coeff},
            {"seed", s.seed},
            {"max_iter", s.inner.max_iter},
            {"grad_tol", s.inner.grad_tol},
            {"armijo_c", s.inner.armijo_c},
            {"armijo_shrink", s.inner.armijo_shrink},
            {"step_init", s.inner.step_init},
            {"method", method_name(s.inner.method)},
            {"initial", initial_kind_name(c.initial.kind)},
            {"a1", c.initial.a1},
            {"epsilon", c.initial.epsilon},
            {"level", c.initial.level},
            {"initial_file", c.initial.file.string()},
            {"a", c.a_file.string()},
            {"b", c.b_file.string()},
            {"t", c.t},
            {"nus", c.nus},
            {"taus", c.taus},
            {"M", c.M},
            {"dt", c.dt},
            {"snapshot_every", c.snapshot_every},
            {"output_dir", c.output_dir.string()}};
}

}  // namespace circleflow
