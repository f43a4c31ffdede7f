#pragma once

// Text formats.
//
//   circleflow-measure v1 N=<int>      then N lines "<left> <spacing>"
//   circleflow-grid v1 M=<int>         then M lines "<value>"
//
// All reals are written with 17 significant digits so that reading back
// reproduces every bit.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "circleflow/measure.hpp"
#include "circleflow/trajectory.hpp"

namespace circleflow {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), source_(source), line_(line) {}
    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline std::size_t parse_count(const std::string& line, const std::string& magic, const std::string& key,
                               const std::string& source) {
    const std::string prefix = magic + " v1 " + key + "=";
    if (line.compare(0, prefix.size(), prefix) != 0)
        throw ParseError(source, 1, "malformed header, expected '" + prefix + "<int>'");
    const std::string digits = line.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(source, 1, "malformed header, count is not a non-negative integer");
    return static_cast<std::size_t>(std::stoull(digits));
}

inline double parse_real(const std::string& tok, const std::string& source, std::size_t line) {
    const char* s = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0') throw ParseError(source, line, "not a number: '" + tok + "'");
    if (!std::isfinite(v)) throw ParseError(source, line, "non-finite entry");
    return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace detail

inline std::string format_measure(const CellMeasure& m) {
    std::string s = "circleflow-measure v1 N=" + std::to_string(m.size()) + "\n";
    for (std::size_t i = 0; i < m.size(); ++i) s += format_real(m.left(i)) + " " + format_real(m.width(i)) + "\n";
    return s;
}

inline CellMeasure parse_measure(const std::string& text, const std::string& source = "<measure>") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty input, missing header");
    const std::size_t n = detail::parse_count(line, "circleflow-measure", "N", source);
    if (n == 0) throw ParseError(source, 1, "N must be positive");
    std::vector<double> lefts, widths;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 2) throw ParseError(source, lineno, "expected '<left> <spacing>'");
        if (lefts.size() == n) throw ParseError(source, lineno, "more entries than N=" + std::to_string(n));
        lefts.push_back(detail::parse_real(tok[0], source, lineno));
        widths.push_back(detail::parse_real(tok[1], source, lineno));
    }
    if (lefts.size() != n)
        throw ParseError(source, lineno, "count mismatch: header says N=" + std::to_string(n) + ", found " +
                                             std::to_string(lefts.size()));
    try {
        return CellMeasure::from_cells(std::move(lefts), std::move(widths));
    } catch (const std::invalid_argument& e) {
        throw ParseError(source, lineno, e.what());
    }
}

inline void write_measure_file(const std::filesystem::path& p, const CellMeasure& m) {
    detail::write_file(p, format_measure(m));
}

inline CellMeasure read_measure_file(const std::filesystem::path& p) {
    return parse_measure(detail::read_file(p), p.string());
}

inline std::string format_grid(std::span<const double> values) {
    std::string s = "circleflow-grid v1 M=" + std::to_string(values.size()) + "\n";
    for (double v : values) s += format_real(v) + "\n";
    return s;
}

/// Raw grid values; the caller decides whether they form a density.
inline std::vector<double> parse_grid(const std::string& text, const std::string& source = "<grid>") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty input, missing header");
    const std::size_t m = detail::parse_count(line, "circleflow-grid", "M", source);
    std::vector<double> v;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 1) throw ParseError(source, lineno, "expected one value per line");
        if (v.size() == m) throw ParseError(source, lineno, "more entries than M=" + std::to_string(m));
        v.push_back(detail::parse_real(tok[0], source, lineno));
    }
    if (v.size() != m)
        throw ParseError(source, lineno,
                         "count mismatch: header says M=" + std::to_string(m) + ", found " + std::to_string(v.size()));
    return v;
}

inline void write_grid_file(const std::filesystem::path& p, std::span<const double> values) {
    detail::write_file(p, format_grid(values));
}

inline std::vector<double> read_grid_file(const std::filesystem::path& p) {
    return parse_grid(detail::read_file(p), p.string());
}

// --- trajectories -----------------------------------------------------------

inline constexpr std::string_view series_header = "t,entropy,interaction,total_energy,dist_to_minimizer,step_cost,inner_iterations";

/// One CSV row per recorded step. dist_to_minimizer is d_per (not squared).
inline std::string format_series(const FlowTrajectory& tr, const std::vector<double>& dist_to_minimizer) {
    std::string s = std::string(series_header) + "\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto& e = tr.energies[k];
        s += format_real(tr.times[k]) + "," + format_real(e.entropy) + "," + format_real(e.interaction) + "," +
             format_real(e.total) + "," + format_real(dist_to_minimizer[k]) + "," + format_real(tr.step_costs[k]) +
             "," + std::to_string(tr.inner_iterations[k]) + "\n";
    }
    return s;
}

inline std::string snapshot_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06zu.msr", k);
    return buf;
}

struct SeriesRow {
    double t, entropy, interaction, total_energy, dist_to_minimizer, step_cost;
    int inner_iterations;
};

inline std::vector<SeriesRow> parse_series(const std::string& text, const std::string& source = "series.csv") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != series_header) throw ParseError(source, 1, "unexpected CSV header");
    std::vector<SeriesRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        if (f.size() != 7) throw ParseError(source, lineno, "expected 7 columns");
        SeriesRow r{};
        double* d[] = {&r.t, &r.entropy, &r.interaction, &r.total_energy, &r.dist_to_minimizer, &r.step_cost};
        for (std::size_t i = 0; i < 6; ++i) *d[i] = detail::parse_real(f[i], source, lineno);
        r.inner_iterations = static_cast<int>(detail::parse_real(f[6], source, lineno));
        rows.push_back(r);
    }
    return rows;
}

/// Writes series.csv and every `every`-th snapshot (plus the last) into dir.
inline void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& tr,
                             const std::vector<double>& dist_to_minimizer, std::size_t every = 1) {
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "series.csv", format_series(tr, dist_to_minimizer));
    for (std::size_t k = 0; k < tr.size(); ++k)
        if (k % every == 0 || k + 1 == tr.size()) write_measure_file(dir / snapshot_name(k), tr.snapshots[k]);
}

struct StoredTrajectory {
    std::vector<SeriesRow> series;
    std::vector<std::size_t> snapshot_steps;
    std::vector<CellMeasure> snapshots;
};

inline StoredTrajectory read_trajectory(const std::filesystem::path& dir) {
    StoredTrajectory st;
    st.series = parse_series(detail::read_file(dir / "series.csv"), (dir / "series.csv").string());
    for (std::size_t k = 0; k < st.series.size(); ++k) {
        const auto p = dir / snapshot_name(k);
        if (!std::filesystem::exists(p)) continue;
        st.snapshot_steps.push_back(k);
        st.snapshots.push_back(read_measure_file(p));
    }
    return st;
}

}  // namespace circleflow
