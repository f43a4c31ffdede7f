#include <cstdio>
#include <filesystem>

#include "circleflow/validation.hpp"

int main(int argc, char** argv) {
    using namespace circleflow;
    const std::filesystem::path dir = argc > 1 ? argv[1] : CIRCLEFLOW_BUNDLE_DIR;
    const auto bundle = validation::load_bundle(dir);
    const auto results = run_acceptance(bundle, [](const CriterionResult& r) {
        std::printf("%s\n", format_criterion(r).c_str());
        std::fflush(stdout);
    });
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed == 0 ? 0 : 1;
}
