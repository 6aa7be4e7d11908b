#pragma once

#include <cstdint>

#include "femnn/problems.hpp"

namespace femnn::uq {

enum class Evaluator { Fem, Surrogate, SurrogateFallback };

Evaluator evaluator_from_string(const std::string& name);

struct McRun {
    Vector outputs;                // quantity of interest per sample
    std::vector<Vector> inputs;    // drawn inputs per sample
    long refinements = 0;          // fallback mode only
};

// Each sample draws from a counter-derived sub-stream of (seed, index), so
// parallel chunking reproduces the sequential ensemble exactly.
McRun run_monte_carlo(const problems::ProblemFamily& family, Evaluator evaluator,
                      const neural::MlpModel* model, std::size_t n, std::uint64_t seed,
                      double tol = 1e-3, int parallel = 1);

}  // namespace femnn::uq
