#include "femnn/hybrid_inverse.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

namespace femnn::inverse {

using nlohmann::json;

PartitionedSystem partition(const CMatrix& K, const CVector& F, const CVector& U,
                            const std::vector<int>& unknown_dofs, double omega) {
    const std::size_t n = K.rows;
    if (K.cols != n || F.size() != n || U.size() != n)
        throw ShapeError("partition: system not conforming");
    std::vector<bool> is_u(n, false);
    for (int d : unknown_dofs) {
        if (d < 0 || static_cast<std::size_t>(d) >= n || is_u[d])
            throw ShapeError("partition: invalid unknown DOF list");
        is_u[d] = true;
    }
    std::vector<std::size_t> kset, uset;
    for (std::size_t i = 0; i < n; ++i) (is_u[i] ? uset : kset).push_back(i);

    PartitionedSystem s;
    s.omega = omega;
    s.K_k = CMatrix(kset.size(), kset.size());
    s.K_ku = CMatrix(kset.size(), uset.size());
    s.K_uk = CMatrix(uset.size(), kset.size());
    s.Ku_base = CMatrix(uset.size(), uset.size());
    for (std::size_t a = 0; a < kset.size(); ++a) {
        s.F_k.push_back(F[kset[a]]);
        s.U_k.push_back(U[kset[a]]);
        for (std::size_t b = 0; b < kset.size(); ++b) s.K_k(a, b) = K(kset[a], kset[b]);
        for (std::size_t b = 0; b < uset.size(); ++b) s.K_ku(a, b) = K(kset[a], uset[b]);
    }
    for (std::size_t a = 0; a < uset.size(); ++a) {
        s.F_u.push_back(F[uset[a]]);
        s.U_u.push_back(U[uset[a]]);
        for (std::size_t b = 0; b < kset.size(); ++b) s.K_uk(a, b) = K(uset[a], kset[b]);
        for (std::size_t b = 0; b < uset.size(); ++b) s.Ku_base(a, b) = K(uset[a], uset[b]);
    }
    return s;
}

CVector partitioned_residual(const PartitionedSystem& s, const CMatrix& K_u) {
    const std::size_t nk = s.n_k(), nu = s.n_u();
    if (s.K_k.rows != nk || s.K_ku.cols != nu || s.K_uk.rows != nu ||
        K_u.rows != nu || K_u.cols != nu)
        throw ShapeError("partitioned_residual: block shapes do not conform");
    CVector upper = linalg::matvec(s.K_k, s.U_k);
    CVector coup = linalg::matvec(s.K_ku, s.U_u);
    CVector lower = linalg::matvec(s.K_uk, s.U_k);
    CVector own = linalg::matvec(K_u, s.U_u);
    CVector r(nk + nu);
    for (std::size_t i = 0; i < nk; ++i) r[i] = upper[i] + coup[i] - s.F_k[i];
    for (std::size_t i = 0; i < nu; ++i) r[nk + i] = lower[i] + own[i] - s.F_u[i];
    return r;
}

Matrix inverse_loss_grad(const PartitionedSystem& s, const CMatrix& K_u, double delta) {
    const std::size_t nu = s.n_u();
    Matrix G(nu, nu);
    if (delta <= hybrid::kDeltaGuard) return G;  // converged sample
    CVector lower = linalg::matvec(s.K_uk, s.U_k);
    CVector own = linalg::matvec(K_u, s.U_u);
    for (std::size_t a = 0; a < nu; ++a) {
        const std::complex<double> ru = lower[a] + own[a] - s.F_u[a];
        for (std::size_t b = 0; b < nu; ++b)
            G(a, b) = (std::conj(ru) * s.U_u[b]).real() / delta;
    }
    return G;
}

Matrix BearingParametrization::build(const Vector& coeffs) const {
    if (coeffs.size() != n_coeffs())
        throw ShapeError("BearingParametrization: coefficient count mismatch");
    const std::size_t n = block_size();
    Matrix K(n, n);
    for (int b = 0; b < n_bearings; ++b) {
        const std::size_t x = 2 * b, y = 2 * b + 1;
        if (kind == Kind::Diagonal) {
            K(x, x) = coeffs[0];
            K(y, y) = coeffs[1];
        } else {
            K(x, x) = coeffs[0];
            K(x, y) = coeffs[1];
            K(y, x) = coeffs[2];
            K(y, y) = coeffs[3];
        }
    }
    return K;
}

Vector BearingParametrization::pullback(const Matrix& G) const {
    if (G.rows != block_size() || G.cols != block_size())
        throw ShapeError("BearingParametrization: gradient block mismatch");
    Vector g(n_coeffs(), 0.0);
    for (int b = 0; b < n_bearings; ++b) {
        const std::size_t x = 2 * b, y = 2 * b + 1;
        if (kind == Kind::Diagonal) {
            g[0] += G(x, x);
            g[1] += G(y, y);
        } else {
            g[0] += G(x, x);
            g[1] += G(x, y);
            g[2] += G(y, x);
            g[3] += G(y, y);
        }
    }
    return g;
}

std::vector<std::string> BearingParametrization::coeff_names() const {
    if (kind == Kind::Diagonal) return {"k_xx", "k_yy"};
    return {"k_xx", "k_xy", "k_yx", "k_yy"};
}

std::vector<hybrid::EpochStat> train_inverse(const std::vector<PartitionedSystem>& obs,
                                             neural::MlpModel& model,
                                             const BearingParametrization& param,
                                             const InverseTrainConfig& cfg) {
    if (obs.empty())
        throw ParameterError("train_inverse: no observations");
    if (model.output_size() != param.n_coeffs())
        throw ShapeError("train_inverse: network output count != free coefficients");
    neural::AdamState adam = neural::make_adam(model, cfg.learning_rate);
    std::vector<hybrid::EpochStat> history;
    history.reserve(cfg.epochs);
    const double inv_n = 1.0 / static_cast<double>(obs.size());
    using clock_type = std::chrono::steady_clock;

    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = clock_type::now();
        neural::ParamGrads grads = neural::zero_grads(model);
        double delta_sum = 0.0;
        for (const PartitionedSystem& s : obs) {
            auto [coeffs, trace] = neural::forward(model, {s.omega});
            CMatrix Ku(s.n_u(), s.n_u());
            const Matrix Kb = param.build(coeffs);
            for (std::size_t i = 0; i < Ku.a.size(); ++i)
                Ku.a[i] = s.Ku_base.a[i] + Kb.a[i];
            CVector r = partitioned_residual(s, Ku);
            const double delta = linalg::euclidean_norm(r);
            delta_sum += delta;
            if (delta <= hybrid::kDeltaGuard) continue;
            Matrix G = inverse_loss_grad(s, Ku, delta);
            Vector upstream = param.pullback(G);
            for (double& v : upstream) v *= inv_n;
            grads.accumulate(neural::backward(model, trace, upstream));
        }
        const double mean_loss = delta_sum * inv_n;
        if (!std::isfinite(mean_loss))
            throw DivergenceError("inverse training diverged at epoch " + std::to_string(epoch),
                                  epoch);
        adam.eta = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch));
        neural::adam_step(adam, model, grads);
        const double wall =
            std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
        history.push_back({epoch, mean_loss, mean_loss, wall});
        if (cfg.stop_loss > 0.0 && mean_loss < cfg.stop_loss) break;
    }
    return history;
}

Vector predict_coefficients(const neural::MlpModel& model, double omega,
                            const BearingParametrization& param) {
    Vector coeffs = neural::evaluate(model, {omega});
    if (coeffs.size() != param.n_coeffs())
        throw ShapeError("predict_coefficients: model output count mismatch");
    return coeffs;
}

Matrix predict_stiffness(const neural::MlpModel& model, double omega,
                         const BearingParametrization& param) {
    return param.build(predict_coefficients(model, omega, param));
}

namespace {
json cvec_to_json(const CVector& v) {
    json j = json::array();
    for (const auto& z : v) j.push_back({z.real(), z.imag()});
    return j;
}
CVector cvec_from_json(const json& j) {
    CVector v;
    for (const auto& p : j) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return v;
}
json cmat_to_json(const CMatrix& m) {
    json j = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.cols; ++k)
            row.push_back({m(i, k).real(), m(i, k).imag()});
        j.push_back(row);
    }
    return j;
}
CMatrix cmat_from_json(const json& j) {
    CMatrix m(j.size(), j.empty() ? 0 : j.at(0).size());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = 0; k < m.cols; ++k) {
            const auto& p = j.at(i).at(k);
            m(i, k) = std::complex<double>(p.at(0).get<double>(), p.at(1).get<double>());
        }
    return m;
}
}  // namespace

std::string observations_to_json(const std::vector<PartitionedSystem>& obs) {
    json arr = json::array();
    for (const auto& s : obs) {
        json j;
        j["omega"] = s.omega;
        j["K_k"] = cmat_to_json(s.K_k);
        j["K_ku"] = cmat_to_json(s.K_ku);
        j["K_uk"] = cmat_to_json(s.K_uk);
        j["Ku_base"] = cmat_to_json(s.Ku_base);
        j["F_k"] = cvec_to_json(s.F_k);
        j["F_u"] = cvec_to_json(s.F_u);
        j["U_k"] = cvec_to_json(s.U_k);
        j["U_u"] = cvec_to_json(s.U_u);
        arr.push_back(j);
    }
    return arr.dump(2);
}

std::vector<PartitionedSystem> observations_from_json(const std::string& text) {
    json arr = json::parse(text);
    std::vector<PartitionedSystem> obs;
    for (const auto& j : arr) {
        PartitionedSystem s;
        s.omega = j.at("omega").get<double>();
        s.K_k = cmat_from_json(j.at("K_k"));
        s.K_ku = cmat_from_json(j.at("K_ku"));
        s.K_uk = cmat_from_json(j.at("K_uk"));
        s.Ku_base = cmat_from_json(j.at("Ku_base"));
        s.F_k = cvec_from_json(j.at("F_k"));
        s.F_u = cvec_from_json(j.at("F_u"));
        s.U_k = cvec_from_json(j.at("U_k"));
        s.U_u = cvec_from_json(j.at("U_u"));
        obs.push_back(std::move(s));
    }
    return obs;
}

Matrix SyntheticTruth::block_at(double omega, int n_bearings) const {
    BearingParametrization p;
    p.n_bearings = n_bearings;
    return p.build({kxx0 + kxx1 * omega, kyy0 + kyy1 * omega});
}

std::vector<PartitionedSystem> synthesize_observations(const fem::RotorModel& rotor,
                                                       const SyntheticTruth& truth,
                                                       const std::vector<double>& omegas,
                                                       double noise_rel,
                                                       std::uint64_t noise_seed) {
    const int nb = static_cast<int>(rotor.bearing_dofs.size()) / 2;
    Rng noise = Rng(noise_seed).derive(rng_stream::noise);
    std::vector<PartitionedSystem> obs;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        const double w = omegas[i];
        const Matrix Kb = truth.block_at(w, nb);
        fem::AssembledSystemC sys = fem::assemble_rotor(rotor, w, Kb);
        CVector q = linalg::lu_solve(sys.K, sys.F);
        if (noise_rel > 0.0) {
            Rng r = noise.derive(rng_stream::noise, i);
            for (auto& z : q)
                z *= std::complex<double>(1.0 + noise_rel * r.normal(0.0, 1.0),
                                          noise_rel * r.normal(0.0, 1.0));
        }
        // Partition the known dynamic part; the bearing contribution stays the
        // unknown to recover.
        fem::AssembledSystemC known =
            fem::assemble_rotor(rotor, w, Matrix(rotor.bearing_dofs.size(),
                                                 rotor.bearing_dofs.size()));
        obs.push_back(partition(known.K, known.F, q, rotor.bearing_dofs, w));
    }
    return obs;
}

}  // namespace femnn::inverse
