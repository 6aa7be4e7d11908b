#include "femnn/montecarlo.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace femnn::uq {

Evaluator evaluator_from_string(const std::string& name) {
    if (name == "fem") return Evaluator::Fem;
    if (name == "surrogate") return Evaluator::Surrogate;
    if (name == "surrogate-fallback") return Evaluator::SurrogateFallback;
    throw ConfigError("unknown evaluator: " + name +
                      " (known: fem, surrogate, surrogate-fallback)");
}

McRun run_monte_carlo(const problems::ProblemFamily& family, Evaluator evaluator,
                      const neural::MlpModel* model, std::size_t n, std::uint64_t seed,
                      double tol, int parallel) {
    if (n < 1)
        throw ParameterError("run_monte_carlo: n must be >= 1");
    if (evaluator != Evaluator::Fem && model == nullptr)
        throw ConfigError("run_monte_carlo: surrogate mode requires a model");
    if (model && model->output_size() != family.dof_count)
        throw ShapeError("run_monte_carlo: model output size != family DOF count");

    McRun run;
    run.outputs.resize(n);
    run.inputs.resize(n);
    std::atomic<long> refinements{0};
    const Rng base(seed);

    auto eval_one = [&](std::size_t i) {
        Rng rng = base.derive(rng_stream::mc, i);
        hybrid::Sample smp = problems::sample_inputs(family, rng);
        Vector u;
        switch (evaluator) {
            case Evaluator::Fem:
                u = linalg::lu_solve(smp.system.K, smp.system.F);
                break;
            case Evaluator::Surrogate:
                u = neural::evaluate(*model, smp.x);
                break;
            case Evaluator::SurrogateFallback: {
                auto [pred, rep] = hybrid::predict_with_residual(*model, smp.x, smp.system, tol);
                if (rep.accepted) {
                    u = std::move(pred);
                } else {
                    u = hybrid::refine_prediction(pred, smp.system);
                    refinements.fetch_add(1, std::memory_order_relaxed);
                }
                break;
            }
        }
        run.outputs[i] = family.qoi(u);
        run.inputs[i] = std::move(smp.x);
    };

    if (parallel <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                eval_one(i);
            } catch (const std::exception& e) {
                throw ParameterError("run_monte_carlo: sample " + std::to_string(i) +
                                     " failed: " + e.what());
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::string error_msg;
        std::mutex err_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    eval_one(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lk(err_mutex);
                    failed.store(true);
                    if (error_msg.empty())
                        error_msg = "run_monte_carlo: sample " + std::to_string(i) +
                                    " failed: " + e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < parallel; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failed.load())
            throw ParameterError(error_msg);
    }
    run.refinements = refinements.load();
    return run;
}

}  // namespace femnn::uq
