#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "circleflow/io.hpp"
#include "circleflow/measure.hpp"

namespace circleflow {

enum class InitialKind { uniform, cosine, dirac, cantor, file };

inline InitialKind parse_initial_kind(const std::string& s) {
    if (s == "uniform") return InitialKind::uniform;
    if (s == "cosine") return InitialKind::cosine;
    if (s == "dirac") return InitialKind::dirac;
    if (s == "cantor") return InitialKind::cantor;
    if (s == "file") return InitialKind::file;
    throw std::invalid_argument("unknown initial data kind '" + s + "'");
}

inline const char* initial_kind_name(InitialKind k) {
    switch (k) {
        case InitialKind::uniform: return "uniform";
        case InitialKind::cosine: return "cosine";
        case InitialKind::dirac: return "dirac";
        case InitialKind::cantor: return "cantor";
        case InitialKind::file: return "file";
    }
    return "?";
}

struct InitialData {
    InitialKind kind = InitialKind::uniform;
    double a1 = 0.0;
    double epsilon = 1e-3;
    int level = 3;
    std::filesystem::path file;
};

/// Cosine data inverts its CDF (x + pi)/(2 pi) + a1 sin x exactly.
inline CellMeasure initial_data(const InitialData& d, std::size_t n) {
    switch (d.kind) {
        case InitialKind::uniform: return uniform_measure(n);
        case InitialKind::cosine: return cosine_measure(d.a1, n);
        case InitialKind::dirac: return dirac_measure(d.epsilon, n);
        case InitialKind::cantor: return cantor_measure(d.level);
        case InitialKind::file: return read_measure_file(d.file);
    }
    throw std::logic_error("initial_data: bad kind");
}

/// Grid version for the spectral solver. Smooth kinds are sampled exactly;
/// the others go through the cell representation with n cells.
inline GridDensity initial_grid(const InitialData& d, std::size_t m, std::size_t n) {
    switch (d.kind) {
        case InitialKind::uniform: return GridDensity::sample([](double) { return 1.0; }, m);
        case InitialKind::cosine: {
            if (!(std::abs(d.a1) < 1.0 / two_pi)) throw std::invalid_argument("cosine data requires |a1| < 1/(2*pi)");
            const double a1 = d.a1;
            return GridDensity::sample([a1](double x) { return 1.0 / two_pi + a1 * std::cos(x); }, m);
        }
        default: return to_density(initial_data(d, n), m);
    }
}

}  // namespace circleflow
