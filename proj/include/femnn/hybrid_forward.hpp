#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "femnn/fem.hpp"
#include "femnn/neural.hpp"

namespace femnn::hybrid {

// r = K u - F
Vector residual(const Matrix& K, const Vector& u, const Vector& F);

// delta = ||r||_2
double residual_loss(const Vector& r);

// d delta / d u = r^T K / delta. Below delta_guard the sample counts as
// already solved and the gradient is zero (the 1/delta form is singular there).
inline constexpr double kDeltaGuard = 1e-14;
Vector residual_loss_grad(const Vector& r, const Matrix& K, double delta);

enum class LossVariant {
    Norm,            // mean of ||r||_2 over the batch
    MeanSquaredNorm  // mean of ||r||_2^2 over the batch (default, smooth at 0)
};

struct ForwardTrainConfig {
    long epochs = 2000;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double lr_decay = 1.0;  // multiplicative per epoch
    double stop_loss = 0.0; // stop early once mean batch loss drops below
    std::uint64_t seed = 0;
    LossVariant loss_variant = LossVariant::MeanSquaredNorm;
};

struct EpochStat {
    long epoch = 0;
    double mean_loss = 0.0;   // batch loss per the configured variant
    double mean_delta = 0.0;  // mean per-sample residual norm
    double wall_ms = 0.0;
};

// One training sample: input parameters and the assembled system. There is
// deliberately no solution field; hybrid training never sees target values.
struct Sample {
    Vector x;
    fem::AssembledSystem system;
};

using Sampler = std::function<Sample(Rng&)>;

// Algorithm: per step, forward every batch sample, take the residual-loss
// gradient as the upstream dLoss/dy, backprop, Adam update. Fresh parameter
// batches are drawn each epoch.
std::vector<EpochStat> train_forward(const Sampler& sampler, neural::MlpModel& model,
                                     const ForwardTrainConfig& cfg);

struct ResidualReport {
    Vector r;
    double delta = 0.0;     // = ||r||_2
    double relative = 0.0;  // delta / ||F|| (delta itself if ||F|| = 0)
    double tolerance = 0.0;
    bool accepted = false;
    bool refined = false;
};

std::pair<Vector, ResidualReport> predict_with_residual(const neural::MlpModel& model,
                                                        const Vector& x,
                                                        const fem::AssembledSystem& system,
                                                        double tol);

// Conjugate gradient from u0 for symmetric systems, direct solve otherwise.
// Target ||Ku - F|| <= 1e-8 ||F||.
Vector refine_prediction(const Vector& u0, const fem::AssembledSystem& system,
                         long* iterations = nullptr);

// Conventional supervised baseline: MSE against precomputed solutions.
struct LabeledSample {
    Vector x;
    Vector u_true;
};

std::vector<EpochStat> train_supervised_baseline(const std::vector<LabeledSample>& dataset,
                                                 neural::MlpModel& model,
                                                 const ForwardTrainConfig& cfg);

void write_history_csv(const std::vector<EpochStat>& history, const std::string& path,
                       bool with_timings);

}  // namespace femnn::hybrid
