#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace femnn {

// Shape/dimension mismatches between matrices and vectors.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid physical or numerical parameter (k <= 0, z0 <= 0, ...).
struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// LU factorization hit a pivot below threshold.
struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& msg) : std::runtime_error(msg) {}
};

// Constraint bookkeeping problems (duplicate Dirichlet DOF, empty system).
struct ConstraintError : std::invalid_argument {
    explicit ConstraintError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Training produced NaN/inf loss.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& msg, long epoch_)
        : std::runtime_error(msg), epoch(epoch_) {}
    long epoch;
};

// Iterative refinement hit its iteration cap; carries the best iterate.
struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& msg, std::vector<double> best_)
        : std::runtime_error(msg), best(std::move(best_)) {}
    std::vector<double> best;
};

// Config / file-format problems at the command layer.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace femnn
