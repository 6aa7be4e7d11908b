#pragma once

#include <string>
#include <vector>

#include "femnn/fem.hpp"
#include "femnn/hybrid_forward.hpp"
#include "femnn/neural.hpp"

namespace femnn::inverse {

// Block system separating the known stiffness from the unknown block sitting
// on the bearing DOFs. Ku_base carries the known (frequency-dependent)
// contribution to the unknown block, so the full uu block is
// Ku_base + parametrized bearing stiffness.
struct PartitionedSystem {
    CMatrix K_k, K_ku, K_uk;
    CVector F_k, F_u;
    CVector U_k, U_u;  // known responses
    CMatrix Ku_base;   // zero for the paper-literal formulation
    double omega = 0.0;

    std::size_t n_k() const { return U_k.size(); }
    std::size_t n_u() const { return U_u.size(); }
};

// Partition a full system (K, F) with known response U: `unknown_dofs` go to
// the "u" block, everything else to "k". Ku_base picks up K[u,u].
PartitionedSystem partition(const CMatrix& K, const CVector& F, const CVector& U,
                            const std::vector<int>& unknown_dofs, double omega = 0.0);

// Stacked residual (K_k U_k + K_ku U_u - F_k ; K_uk U_k + K_u U_u - F_u).
// K_u here is the full unknown block (Ku_base already folded in by callers
// that use it).
CVector partitioned_residual(const PartitionedSystem& sys, const CMatrix& K_u);

// d delta / d K_u for the real-valued loss delta = ||r||_2 over the complex
// residual: G[a][b] = Re(conj(r_u[a]) U_u[b]) / delta. For real data this is
// exactly (1/delta)(K_uk U_k + K_u U_u - F_u) U_u. Zero below the guard.
Matrix inverse_loss_grad(const PartitionedSystem& sys, const CMatrix& K_u, double delta);

// How network outputs map to the bearing-stiffness block. Coefficients are
// shared across bearings; the network works in units of k_ref.
struct BearingParametrization {
    enum class Kind { Diagonal, Full };  // (k_xx,k_yy) or (k_xx,k_xy,k_yx,k_yy)
    Kind kind = Kind::Diagonal;
    int n_bearings = 2;  // bearings of 2 DOFs (x,y) each
    double k_ref = 1e7;

    std::size_t n_coeffs() const { return kind == Kind::Diagonal ? 2 : 4; }
    std::size_t block_size() const { return 2 * static_cast<std::size_t>(n_bearings); }

    // Physical block from physical coefficients.
    Matrix build(const Vector& coeffs) const;
    // Pull an entrywise block gradient back onto the coefficients.
    Vector pullback(const Matrix& block_grad) const;
    std::vector<std::string> coeff_names() const;
};

struct InverseTrainConfig {
    long epochs = 3000;
    double learning_rate = 1e-3;
    double lr_decay = 1.0;
    double stop_loss = 0.0;
    std::uint64_t seed = 0;
};

// Algorithm: network maps omega -> coefficients/k_ref -> K_u; the block
// gradient of ||r||_2 is chained through the parametrization into backprop.
std::vector<hybrid::EpochStat> train_inverse(const std::vector<PartitionedSystem>& observations,
                                             neural::MlpModel& model,
                                             const BearingParametrization& param,
                                             const InverseTrainConfig& cfg);

// Bearing block predicted at omega (physical units, without Ku_base).
Matrix predict_stiffness(const neural::MlpModel& model, double omega,
                         const BearingParametrization& param);

Vector predict_coefficients(const neural::MlpModel& model, double omega,
                            const BearingParametrization& param);

// Observation files: JSON array of {omega, U, F} with complex entries as
// [re, im] pairs.
std::string observations_to_json(const std::vector<PartitionedSystem>& obs);
std::vector<PartitionedSystem> observations_from_json(const std::string& text);

// Synthesizes an omega sweep from the rotor model with a hidden ground-truth
// stiffness law, optionally perturbing responses with relative noise.
struct SyntheticTruth {
    double kxx0 = 1e7, kxx1 = 2e3;    // k_xx(w) = kxx0 + kxx1 * w
    double kyy0 = 8e6, kyy1 = 1.5e3;  // k_yy(w) = kyy0 + kyy1 * w

    Matrix block_at(double omega, int n_bearings) const;
};

std::vector<PartitionedSystem> synthesize_observations(const fem::RotorModel& rotor,
                                                       const SyntheticTruth& truth,
                                                       const std::vector<double>& omegas,
                                                       double noise_rel = 0.0,
                                                       std::uint64_t noise_seed = 0);

}  // namespace femnn::inverse
