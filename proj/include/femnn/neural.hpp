#pragma once

#include <string>
#include <utility>
#include <vector>

#include "femnn/linalg.hpp"
#include "femnn/rng.hpp"

namespace femnn::neural {

enum class Activation { Tanh, Identity };

// From-scratch MLP. weights[l] maps layer-l activations to layer l+1
// (weights[l] is layer_sizes[l+1] x layer_sizes[l]); hidden layers use tanh,
// the output layer is linear. Inputs are standardized with the stored
// statistics; the output is multiplied by output_scale so the network works
// on O(1) numbers while predictions stay in physical units.
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Activation hidden = Activation::Tanh;
    Vector input_mean;   // empty = no standardization
    Vector input_std;
    double output_scale = 1.0;
    // Optional fixed (untrained) linear map applied after output_scale:
    // y = T (scale * o). Used to precondition residual-loss training with
    // the inverse of a nominal stiffness matrix. Empty = identity.
    Matrix output_transform;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t n_layers() const { return weights.size(); }
};

MlpModel make_mlp(const std::vector<std::size_t>& layer_sizes);

// Xavier/Glorot uniform init, fully seeded.
void init_weights(MlpModel& model, Rng rng);

// Cached pre-activations and activations from one forward pass.
struct ForwardTrace {
    std::vector<Vector> inputs;  // inputs[l]: activation entering layer l (inputs[0] standardized x)
    std::vector<Vector> pre;     // pre[l]: z^l = w^l o^{l-1} + b^l
};

std::pair<Vector, ForwardTrace> forward(const MlpModel& model, const Vector& x);

// Forward pass without the trace, for deployment.
Vector evaluate(const MlpModel& model, const Vector& x);

struct ParamGrads {
    std::vector<Matrix> dw;
    std::vector<Vector> db;

    void scale(double s);
    void accumulate(const ParamGrads& other);
};

ParamGrads zero_grads(const MlpModel& model);

// Backprop with an externally supplied upstream gradient dLoss/dy (physical
// units; the output_scale chain factor is applied internally).
ParamGrads backward(const MlpModel& model, const ForwardTrace& trace, const Vector& dloss_dy);

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    long t = 0;
    double eta = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(const MlpModel& model, double eta = 1e-3);

void adam_step(AdamState& state, MlpModel& model, const ParamGrads& grads);

// Baseline losses. Both return (loss, dLoss/dy).
std::pair<double, Vector> loss_mse(const Vector& y, const Vector& y_true);
// MAPE with guard |y_true_i| > eps_mape; subgradient uses sign(0) = 0.
std::pair<double, Vector> loss_mape(const Vector& y, const Vector& y_true,
                                    double eps_mape = 1e-12);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace femnn::neural
