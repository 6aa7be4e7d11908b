#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "femnn/montecarlo.hpp"
#include "femnn/problems.hpp"

namespace femnn::commands {

// Each command takes a fully resolved JSON config, writes its artifacts under
// cfg["out"], echoes the resolved config, and throws on error. The CLI and the
// C library are thin wrappers over these.

nlohmann::json resolve_common(const nlohmann::json& cfg);

void train_forward(const nlohmann::json& cfg);
nlohmann::json predict(const nlohmann::json& cfg);
void compare_baseline(const nlohmann::json& cfg);
void uq_run(const nlohmann::json& cfg);
void identify(const nlohmann::json& cfg);
void generate_observations(const nlohmann::json& cfg);

// Mean absolute free-DOF error of the surrogate against the direct solver
// over n held-out samples.
double holdout_mae(const problems::ProblemFamily& family, const neural::MlpModel& model,
                   std::size_t n, std::uint64_t seed);

}  // namespace femnn::commands
