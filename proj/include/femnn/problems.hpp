#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "femnn/fem.hpp"
#include "femnn/hybrid_forward.hpp"
#include "femnn/hybrid_inverse.hpp"
#include "femnn/neural.hpp"
#include "femnn/uq.hpp"

namespace femnn::problems {

// One of the four studies: binds the input schema (canonical network-input
// order), the assembler, the QoI extractor and the recommended network shape.
struct ProblemFamily {
    struct Input {
        std::string name;
        uq::DistributionSpec spec;
    };

    std::string name;
    std::vector<Input> inputs;
    std::size_t dof_count = 0;       // free DOFs = network output size
    int n_components = 1;            // DOFs per node, for expanding reports
    std::vector<std::size_t> hidden_layers;
    double output_scale = 1.0;
    // Initialize models with a fixed nominal-stiffness-inverse output map
    // (forward families only); see make_model.
    bool precondition_output = false;
    std::function<fem::AssembledSystem(const Vector&)> assemble;
    std::function<double(const Vector&)> qoi;  // quantity of interest on free DOFs
    nlohmann::json config;           // resolved family configuration (echoed)

    // rotor_bearing only
    std::optional<fem::RotorModel> rotor;
    std::optional<inverse::BearingParametrization> bearing_param;

    std::size_t input_count() const { return inputs.size(); }
};

// names: convdiff | truss23 | building_beam | rotor_bearing
ProblemFamily make_family(const std::string& name, const nlohmann::json& overrides = {});

// Draw every input from its spec and assemble; never solves.
hybrid::Sample sample_inputs(const ProblemFamily& family, Rng& rng);

// Network with the family architecture, Xavier init and input standardization
// from the analytic moments of the input distributions.
neural::MlpModel make_model(const ProblemFamily& family, Rng init_rng);

// Full nodal vector with Dirichlet values re-inserted, for reporting.
Vector expand_solution(const ProblemFamily& family, const fem::AssembledSystem& system,
                       const Vector& u_free);

uq::DistributionSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const uq::DistributionSpec& spec);

// Analytic mean/std of a spec (used for input standardization).
std::pair<double, double> spec_moments(const uq::DistributionSpec& spec);

}  // namespace femnn::problems
