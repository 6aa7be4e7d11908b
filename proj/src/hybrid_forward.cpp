#include "femnn/hybrid_forward.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace femnn::hybrid {

Vector residual(const Matrix& K, const Vector& u, const Vector& F) {
    if (K.rows != F.size())
        throw ShapeError("residual: K.rows != F.len");
    Vector r = linalg::matvec(K, u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= F[i];
    return r;
}

double residual_loss(const Vector& r) { return linalg::euclidean_norm(r); }

Vector residual_loss_grad(const Vector& r, const Matrix& K, double delta) {
    if (delta <= kDeltaGuard)
        return Vector(K.cols, 0.0);  // sample already solved
    Vector g = linalg::vecmat(r, K);
    for (double& v : g) v /= delta;
    return g;
}

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

void check_finite(double loss, long epoch) {
    if (!std::isfinite(loss))
        throw DivergenceError("training diverged (non-finite loss) at epoch " +
                              std::to_string(epoch), epoch);
}

}  // namespace

std::vector<EpochStat> train_forward(const Sampler& sampler, neural::MlpModel& model,
                                     const ForwardTrainConfig& cfg) {
    if (cfg.batch_size < 1)
        throw ParameterError("train_forward: batch_size must be >= 1");
    Rng base(cfg.seed);
    Rng sample_rng = base.derive(rng_stream::sampling);
    neural::AdamState adam = neural::make_adam(model, cfg.learning_rate);
    std::vector<EpochStat> history;
    history.reserve(cfg.epochs);
    const double inv_n = 1.0 / static_cast<double>(cfg.batch_size);

    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = clock_type::now();
        neural::ParamGrads grads = neural::zero_grads(model);
        double loss_sum = 0.0, delta_sum = 0.0;
        for (std::size_t s = 0; s < cfg.batch_size; ++s) {
            Sample smp = sampler(sample_rng);
            auto [u, trace] = neural::forward(model, smp.x);
            Vector r = residual(smp.system.K, u, smp.system.F);
            const double delta = residual_loss(r);
            delta_sum += delta;
            Vector upstream;
            if (cfg.loss_variant == LossVariant::MeanSquaredNorm) {
                loss_sum += delta * delta;
                // d/du of ||r||^2 / N  =  2 r^T K / N
                upstream = linalg::vecmat(r, smp.system.K);
                for (double& v : upstream) v *= 2.0 * inv_n;
            } else {
                loss_sum += delta;
                upstream = residual_loss_grad(r, smp.system.K, delta);
                for (double& v : upstream) v *= inv_n;
            }
            grads.accumulate(neural::backward(model, trace, upstream));
        }
        const double mean_loss = loss_sum * inv_n;
        check_finite(mean_loss, epoch);
        adam.eta = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        neural::adam_step(adam, model, grads);
        history.push_back({epoch, mean_loss, delta_sum * inv_n, ms_since(t0)});
        if (cfg.stop_loss > 0.0 && mean_loss < cfg.stop_loss) break;
    }
    return history;
}

std::pair<Vector, ResidualReport> predict_with_residual(const neural::MlpModel& model,
                                                        const Vector& x,
                                                        const fem::AssembledSystem& system,
                                                        double tol) {
    Vector u = neural::evaluate(model, x);
    ResidualReport rep;
    rep.r = residual(system.K, u, system.F);
    rep.delta = residual_loss(rep.r);
    const double fn = linalg::euclidean_norm(system.F);
    rep.relative = fn > 0.0 ? rep.delta / fn : rep.delta;
    rep.tolerance = tol;
    rep.accepted = rep.relative <= tol;
    rep.refined = false;
    return {std::move(u), std::move(rep)};
}

namespace {

bool is_symmetric(const Matrix& K) {
    double scale = 0.0;
    for (double v : K.a) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < K.rows; ++i)
        for (std::size_t j = i + 1; j < K.cols; ++j)
            if (std::abs(K(i, j) - K(j, i)) > 1e-9 * std::max(scale, 1.0)) return false;
    return true;
}

}  // namespace

Vector refine_prediction(const Vector& u0, const fem::AssembledSystem& system,
                         long* iterations) {
    const Matrix& K = system.K;
    const Vector& F = system.F;
    if (K.rows != K.cols || u0.size() != K.cols || F.size() != K.rows)
        throw ShapeError("refine_prediction: shapes do not conform");
    const double fn = linalg::euclidean_norm(F);
    const double target = 1e-8 * (fn > 0.0 ? fn : 1.0);

    if (!is_symmetric(K)) {
        if (iterations) *iterations = 0;
        return linalg::lu_solve(K, F);
    }

    Vector x = u0;
    Vector r = residual(K, x, F);
    for (double& v : r) v = -v;  // r = F - Kx
    if (linalg::euclidean_norm(r) <= target) {
        if (iterations) *iterations = 0;
        return x;
    }
    Vector p = r;
    double rr = 0.0;
    for (double v : r) rr += v * v;
    const long cap = static_cast<long>(10 * K.rows + 20);
    Vector best = x;
    double best_norm = linalg::euclidean_norm(r);
    for (long it = 1; it <= cap; ++it) {
        Vector Kp = linalg::matvec(K, p);
        double pKp = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) pKp += p[i] * Kp[i];
        if (pKp <= 0.0) break;  // not SPD after all; bail to the cap handling
        const double alpha = rr / pKp;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Kp[i];
        }
        double rr_new = 0.0;
        for (double v : r) rr_new += v * v;
        const double rnorm = std::sqrt(rr_new);
        if (rnorm < best_norm) {
            best_norm = rnorm;
            best = x;
        }
        if (rnorm <= target) {
            if (iterations) *iterations = it;
            return x;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    throw NonConvergenceError("refine_prediction: CG hit the iteration cap", best);
}

std::vector<EpochStat> train_supervised_baseline(const std::vector<LabeledSample>& dataset,
                                                 neural::MlpModel& model,
                                                 const ForwardTrainConfig& cfg) {
    if (dataset.empty())
        throw ParameterError("train_supervised_baseline: empty dataset");
    Rng base(cfg.seed);
    Rng pick = base.derive(rng_stream::sampling);
    neural::AdamState adam = neural::make_adam(model, cfg.learning_rate);
    std::vector<EpochStat> history;
    history.reserve(cfg.epochs);
    const double inv_n = 1.0 / static_cast<double>(cfg.batch_size);

    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = clock_type::now();
        neural::ParamGrads grads = neural::zero_grads(model);
        double loss_sum = 0.0;
        for (std::size_t s = 0; s < cfg.batch_size; ++s) {
            const LabeledSample& smp =
                dataset[pick.next_u64() % dataset.size()];
            auto [y, trace] = neural::forward(model, smp.x);
            auto [loss, grad] = neural::loss_mse(y, smp.u_true);
            loss_sum += loss;
            for (double& v : grad) v *= inv_n;
            grads.accumulate(neural::backward(model, trace, grad));
        }
        const double mean_loss = loss_sum * inv_n;
        check_finite(mean_loss, epoch);
        adam.eta = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        neural::adam_step(adam, model, grads);
        history.push_back({epoch, mean_loss, mean_loss, ms_since(t0)});
        if (cfg.stop_loss > 0.0 && mean_loss < cfg.stop_loss) break;
    }
    return history;
}

void write_history_csv(const std::vector<EpochStat>& history, const std::string& path,
                       bool with_timings) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("write_history_csv: cannot open " + path);
    out << "epoch,mean_loss,wall_ms\n";
    char buf[64];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.mean_loss);
        out << e.epoch << "," << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.3f", with_timings ? e.wall_ms : 0.0);
        out << buf << "\n";
    }
}

}  // namespace femnn::hybrid
