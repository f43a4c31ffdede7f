#include <gtest/gtest.h>

#include <filesystem>

#include "circleflow/circot.hpp"
#include "circleflow/io.hpp"
#include "circleflow/jko.hpp"
#include "circleflow/random.hpp"

using namespace circleflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("circleflow_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::size_t error_line(const std::string& text) {
    try {
        parse_measure(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(MeasureText, UniformFormat) {
    const auto s = format_measure(uniform_measure(2));
    EXPECT_EQ(s.substr(0, s.find('\n')), "circleflow-measure v1 N=2");
    EXPECT_EQ(format_measure(parse_measure(s)), s);
}

TEST(Property, MeasureRoundTripIsExact) {
    Rng rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_cells(rng, 1 + 2 + trial % 40, 0.9).rotated(uniform_real(rng, -3, 3));
        const auto back = parse_measure(format_measure(m));
        EXPECT_TRUE(back == m);
        EXPECT_LE(dper2_quantile(back, m), 1e-20);
    }
}

TEST(MeasureText, GappedMeasuresSurvive) {
    const auto c = cantor_measure(4);
    EXPECT_TRUE(parse_measure(format_measure(c)) == c);
}

TEST(MeasureText, CorruptHeader) {
    EXPECT_EQ(error_line("circleflow-measure v2 N=2\n0 1\n1 1\n"), 1u);
    EXPECT_EQ(error_line("garbage\n"), 1u);
    EXPECT_EQ(error_line(""), 1u);
    EXPECT_EQ(error_line("circleflow-measure v1 N=abc\n"), 1u);
}

TEST(MeasureText, CountMismatch) {
    EXPECT_EQ(error_line("circleflow-measure v1 N=3\n0 1\n1 1\n"), 3u);
    EXPECT_EQ(error_line("circleflow-measure v1 N=1\n0 1\n1 1\n"), 3u);
}

TEST(MeasureText, NonFiniteAndMalformedEntries) {
    EXPECT_EQ(error_line("circleflow-measure v1 N=2\n0 nan\n1 1\n"), 2u);
    EXPECT_EQ(error_line("circleflow-measure v1 N=2\n0 1\ninf 1\n"), 3u);
    EXPECT_EQ(error_line("circleflow-measure v1 N=2\n0 1 2\n1 1\n"), 2u);
    EXPECT_EQ(error_line("circleflow-measure v1 N=2\n0 x\n1 1\n"), 2u);
    EXPECT_GT(error_line("circleflow-measure v1 N=2\n0 -1\n1 1\n"), 0u);
}

TEST(MeasureFile, MissingFileThrows) {
    EXPECT_THROW(read_measure_file("/nonexistent/dir/x.msr"), std::runtime_error);
}

TEST(GridText, RoundTrip) {
    Rng rng(62);
    std::vector<double> v(32);
    for (double& x : v) x = uniform_real(rng, 0.0, 1.0);
    EXPECT_EQ(parse_grid(format_grid(v)), v);
    EXPECT_THROW(parse_grid("circleflow-grid v1 M=4\n1\n2\n"), ParseError);
    EXPECT_THROW(parse_grid("circleflow-grid v1 M=2\n1\nnan\n"), ParseError);
}

TEST(Series, WriteAndReadTrajectory) {
    SolverConfig cfg;
    cfg.nu = 0.1;
    cfg.tau = 0.05;
    cfg.t_end = 0.2;
    cfg.N = 16;
    cfg.inner.method = InnerMethod::lbfgs;
    const auto tr = evolve(cosine_measure(0.1, 16), cfg);
    std::vector<double> dist;
    for (const auto& s : tr.snapshots) dist.push_back(dper(s, minimizer(cfg)));
    const auto dir = scratch("traj");
    write_trajectory(dir, tr, dist, 2);
    const auto st = read_trajectory(dir);
    ASSERT_EQ(st.series.size(), tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(st.series[k].t, tr.times[k]);
        EXPECT_EQ(st.series[k].total_energy, tr.energies[k].total);
        EXPECT_EQ(st.series[k].dist_to_minimizer, dist[k]);
        EXPECT_EQ(st.series[k].inner_iterations, tr.inner_iterations[k]);
    }
    const std::vector<std::size_t> expect{0, 2, 4};
    EXPECT_EQ(st.snapshot_steps, expect);
    EXPECT_TRUE(st.snapshots.back() == tr.snapshots.back());
    fs::remove_all(dir);
}

TEST(Series, RejectsBadHeader) {
    EXPECT_THROW(parse_series("t,energy\n0,1\n"), ParseError);
    EXPECT_THROW(parse_series(std::string(series_header) + "\n0,1,2\n"), ParseError);
}
