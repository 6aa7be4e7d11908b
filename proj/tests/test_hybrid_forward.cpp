#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "femnn/hybrid_forward.hpp"
#include "femnn/problems.hpp"

using namespace femnn;

namespace {

fem::AssembledSystem random_system(std::size_t n, Rng& rng) {
    fem::AssembledSystem sys;
    sys.K = Matrix(n, n);
    for (double& v : sys.K.a) v = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) sys.K(i, i) += 2.0 * static_cast<double>(n);
    sys.F = Vector(n);
    for (double& v : sys.F) v = rng.uniform(-2.0, 2.0);
    for (std::size_t i = 0; i < n; ++i) sys.dof_map.push_back({static_cast<int>(i), 0});
    return sys;
}

}  // namespace

TEST_CASE("residual and residual_loss basics") {
    Matrix K = Matrix::identity(3);
    Vector u = {1, 2, 3};
    Vector F = {1, 1, 1};
    Vector r = hybrid::residual(K, u, F);
    CHECK(r == Vector{0, 1, 2});
    CHECK(hybrid::residual_loss(r) == doctest::Approx(std::sqrt(5.0)));
    CHECK_THROWS_AS(hybrid::residual(K, u, Vector{1.0}), ShapeError);

    // exact solution: zero residual, guarded zero gradient
    Vector r0 = hybrid::residual(K, F, F);
    CHECK(hybrid::residual_loss(r0) == 0.0);
    Vector g0 = hybrid::residual_loss_grad(r0, K, 0.0);
    for (double v : g0) CHECK(v == 0.0);
}

TEST_CASE("residual_loss_grad matches finite differences in u") {
    Rng rng(17);
    auto sys = random_system(5, rng);
    Vector u(5);
    for (double& v : u) v = rng.uniform(-1.0, 1.0);
    Vector r = hybrid::residual(sys.K, u, sys.F);
    const double delta = hybrid::residual_loss(r);
    Vector g = hybrid::residual_loss_grad(r, sys.K, delta);
    const double eps = 1e-7;
    for (std::size_t i = 0; i < u.size(); ++i) {
        Vector up = u, dn = u;
        up[i] += eps;
        dn[i] -= eps;
        const double fd = (hybrid::residual_loss(hybrid::residual(sys.K, up, sys.F)) -
                           hybrid::residual_loss(hybrid::residual(sys.K, dn, sys.F))) /
                          (2.0 * eps);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("composite network-residual gradient matches finite differences") {
    // d ||K mlp(theta, x) - F|| / d theta through backward() vs central FD.
    Rng rng(29);
    auto sys = random_system(4, rng);
    neural::MlpModel m = neural::make_mlp({2, 8, 4});
    neural::init_weights(m, Rng(31));
    m.output_scale = 2.0;
    const Vector x = {0.3, -0.8};

    auto loss_of = [&](const neural::MlpModel& model) {
        Vector u = neural::evaluate(model, x);
        return hybrid::residual_loss(hybrid::residual(sys.K, u, sys.F));
    };

    auto [u, trace] = neural::forward(m, x);
    Vector r = hybrid::residual(sys.K, u, sys.F);
    const double delta = hybrid::residual_loss(r);
    Vector upstream = hybrid::residual_loss_grad(r, sys.K, delta);
    neural::ParamGrads g = neural::backward(m, trace, upstream);

    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < m.n_layers(); ++l)
        for (std::size_t i = 0; i < m.weights[l].a.size(); ++i) {
            neural::MlpModel pert = m;
            pert.weights[l].a[i] += eps;
            const double up = loss_of(pert);
            pert.weights[l].a[i] -= 2.0 * eps;
            const double dn = loss_of(pert);
            const double fd = (up - dn) / (2.0 * eps);
            const double rel = std::abs(g.dw[l].a[i] - fd) / std::max(std::abs(fd), 1e-8);
            worst = std::max(worst, rel);
        }
    CHECK(worst < 1e-5);
}

TEST_CASE("train_forward reduces the residual loss on a fixed tiny family") {
    // One fixed system: the network only has to memorize its solution.
    Rng sys_rng(3);
    auto sys = random_system(3, sys_rng);
    auto sampler = [&sys](Rng& rng) {
        hybrid::Sample s;
        s.x = {rng.uniform(-0.1, 0.1)};
        s.system = sys;
        return s;
    };
    neural::MlpModel m = neural::make_mlp({1, 16, 3});
    neural::init_weights(m, Rng(1));
    hybrid::ForwardTrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.02;
    cfg.seed = 5;
    auto history = hybrid::train_forward(sampler, m, cfg);
    REQUIRE(history.size() == 400);
    CHECK(history.back().mean_loss < 0.01 * history.front().mean_loss);
    CHECK(history.front().epoch == 0);
    CHECK(history.back().epoch == 399);
}

TEST_CASE("train_forward norm variant and early stop") {
    Rng sys_rng(3);
    auto sys = random_system(3, sys_rng);
    auto sampler = [&sys](Rng& rng) {
        hybrid::Sample s;
        s.x = {rng.uniform(-0.1, 0.1)};
        s.system = sys;
        return s;
    };
    neural::MlpModel m = neural::make_mlp({1, 16, 3});
    neural::init_weights(m, Rng(1));
    hybrid::ForwardTrainConfig cfg;
    cfg.epochs = 5000;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.02;
    cfg.seed = 5;
    cfg.loss_variant = hybrid::LossVariant::Norm;
    cfg.stop_loss = 0.5;
    auto history = hybrid::train_forward(sampler, m, cfg);
    CHECK(history.size() < 5000);  // early stop triggered
    CHECK(history.back().mean_loss < 0.5);

    cfg.batch_size = 0;
    CHECK_THROWS_AS(hybrid::train_forward(sampler, m, cfg), ParameterError);
}

TEST_CASE("train_forward is deterministic") {
    auto run = [] {
        auto fam = problems::make_family("convdiff");
        auto sampler = [&fam](Rng& rng) { return problems::sample_inputs(fam, rng); };
        neural::MlpModel m = problems::make_model(fam, Rng(9));
        hybrid::ForwardTrainConfig cfg;
        cfg.epochs = 5;
        cfg.batch_size = 4;
        cfg.seed = 9;
        auto h = hybrid::train_forward(sampler, m, cfg);
        return std::make_pair(h.back().mean_loss, neural::model_to_json(m));
    };
    auto [l1, j1] = run();
    auto [l2, j2] = run();
    CHECK(l1 == l2);
    CHECK(j1 == j2);
}

TEST_CASE("predict_with_residual reports honestly") {
    Rng rng(41);
    auto sys = random_system(4, rng);
    neural::MlpModel m = neural::make_mlp({2, 8, 4});
    neural::init_weights(m, Rng(12));
    const Vector x = {0.1, 0.2};
    auto [u, rep] = hybrid::predict_with_residual(m, x, sys, 1e-3);
    // recompute independently; must agree bit-for-bit
    Vector r = hybrid::residual(sys.K, u, sys.F);
    CHECK(rep.delta == hybrid::residual_loss(r));
    CHECK(rep.relative == rep.delta / linalg::euclidean_norm(sys.F));
    CHECK(rep.accepted == (rep.relative <= 1e-3));
    CHECK_FALSE(rep.refined);
    // untrained random net virtually never solves the system
    CHECK_FALSE(rep.accepted);
}

TEST_CASE("refine_prediction reaches the CG target on SPD systems") {
    Rng rng(55);
    // make SPD: A^T A + I
    Matrix B(6, 6);
    for (double& v : B.a) v = rng.uniform(-1.0, 1.0);
    fem::AssembledSystem sys;
    sys.K = Matrix(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            double s = i == j ? 1.0 : 0.0;
            for (std::size_t k = 0; k < 6; ++k) s += B(k, i) * B(k, j);
            sys.K(i, j) = s;
        }
    sys.F = Vector(6, 1.0);
    Vector u0(6, 0.0);
    long iters = -1;
    Vector u = hybrid::refine_prediction(u0, sys, &iters);
    CHECK(iters >= 1);
    const double rel = hybrid::residual_loss(hybrid::residual(sys.K, u, sys.F)) /
                       linalg::euclidean_norm(sys.F);
    CHECK(rel <= 1e-8);
}

TEST_CASE("refine_prediction falls back to LU for nonsymmetric systems") {
    Rng rng(56);
    auto sys = random_system(5, rng);  // not symmetric
    long iters = -1;
    Vector u = hybrid::refine_prediction(Vector(5, 0.0), sys, &iters);
    CHECK(iters == 0);
    const double rel = hybrid::residual_loss(hybrid::residual(sys.K, u, sys.F)) /
                       linalg::euclidean_norm(sys.F);
    CHECK(rel <= 1e-8);
    CHECK_THROWS_AS(hybrid::refine_prediction(Vector(3, 0.0), sys), ShapeError);
}

TEST_CASE("supervised baseline learns a constant map") {
    std::vector<hybrid::LabeledSample> data;
    Rng rng(6);
    for (int i = 0; i < 64; ++i)
        data.push_back({{rng.uniform(-1.0, 1.0)}, {2.0, -1.0}});
    neural::MlpModel m = neural::make_mlp({1, 8, 2});
    neural::init_weights(m, Rng(2));
    hybrid::ForwardTrainConfig cfg;
    cfg.epochs = 500;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.01;
    cfg.seed = 3;
    auto history = hybrid::train_supervised_baseline(data, m, cfg);
    CHECK(history.back().mean_loss < 1e-3);
    Vector y = neural::evaluate(m, {0.0});
    CHECK(y[0] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(y[1] == doctest::Approx(-1.0).epsilon(0.05));
    CHECK_THROWS_AS(hybrid::train_supervised_baseline({}, m, cfg), ParameterError);
}
