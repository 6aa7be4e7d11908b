#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "femnn/linalg.hpp"

namespace femnn::fem {

// Reduced linear system K u = F on the free DOFs, Dirichlet constraints
// already eliminated.
struct AssembledSystem {
    Matrix K;
    Vector F;
    // free-DOF index -> (node, component)
    std::vector<std::pair<int, int>> dof_map;
    // (constrained global DOF, prescribed value)
    std::vector<std::pair<int, double>> dirichlet;
};

struct AssembledSystemC {
    CMatrix K;
    CVector F;
    std::vector<std::pair<int, int>> dof_map;
};

// Row/column elimination of Dirichlet constraints on a full system.
// F_free picks up -K[free,constrained] * u_prescribed. `labels` optionally
// names each global DOF as (node, component) for the dof_map.
AssembledSystem apply_dirichlet(const Matrix& K_full, const Vector& F_full,
                                const std::vector<std::pair<int, double>>& constraints,
                                const std::vector<std::pair<int, int>>* labels = nullptr);

// ---------------------------------------------------------------------------
// 1D steady convection-diffusion:  u T' = k T'' + S  on [0,1], T(0)=T1, T(1)=T2.

struct ConvDiffParams {
    double T1 = 0.0;
    double T2 = 0.0;
    double k = 1.0;   // thermal diffusion coefficient, must be > 0
    double u = 0.0;   // convection velocity
    Vector S;         // nodal heat source, length = n_nodes
};

// Galerkin linear elements on a uniform mesh; returns the (n_nodes-2)^2
// interior system. No SUPG stabilization: valid for element Peclet
// |u| h / (2k) < 1, oscillatory (but still the Galerkin answer) beyond.
AssembledSystem assemble_convdiff(const ConvDiffParams& params, std::size_t n_nodes);

double element_peclet(const ConvDiffParams& params, std::size_t n_nodes);

// ---------------------------------------------------------------------------
// 2D pin-jointed truss, direct stiffness method.

struct TrussModel {
    struct Member {
        int i = 0;
        int j = 0;
        int group = 0;  // 0 = horizontal chord, 1 = diagonal/vertical
    };
    std::vector<std::array<double, 2>> nodes;     // coordinates in m
    std::vector<Member> members;
    std::vector<std::pair<int, int>> supports;    // (node, component) fixed at 0
    std::vector<int> load_nodes;                  // nodes carrying P1..P6
    double E_h = 2.1e11, E_v = 2.1e11;            // Young's moduli per group
    double A_h = 1.0e-3, A_v = 2.0e-3;            // areas per group
    Vector loads;                                 // vertical force per load node (N)
};

// 23-member simply supported benchmark truss: 24 m span, 2 m height,
// supports at the top-chord ends, six loaded lower-chord nodes.
TrussModel default_truss23();

TrussModel truss_from_json(const std::string& json_text);
std::string truss_to_json(const TrussModel& model);

AssembledSystem assemble_truss(const TrussModel& model);

// ---------------------------------------------------------------------------
// Cantilever Euler-Bernoulli beam (high-rise building), Hermite cubic elements,
// 2 DOFs per node (deflection, rotation), clamped at z = 0.

struct BeamModel {
    double H = 180.0;       // height, m
    double W = 45.0;        // width facing the wind, m
    double D = 30.0;        // depth, m
    double f = 0.2;         // first natural frequency, Hz
    double rho = 160.0;     // building density, kg/m^3
    double zeta = 0.01;     // damping ratio (unused in the static model)
    double EI = 0.0;        // bending stiffness; <= 0 means derive from f
    int n_e = 16;           // element count, >= 4
    double rho_air = 1.225; // kg/m^3
    double C_d = 1.2;       // drag coefficient

    // EI override if given, otherwise calibrated so the first cantilever
    // frequency (beta^2 / 2 pi) sqrt(EI / (m L^4)) matches f.
    double bending_stiffness() const;
    double mass_per_length() const { return rho * W * D; }
};

// Static lateral wind force per node (length n_e + 1) from a logarithmic
// velocity profile V(z) = u_ref ln(z/z0) / ln(H/z0), tributary area W * h.
Vector wind_load_profile(double u_ref, double z0, const BeamModel& model);

// nodal_load carries one lateral force per node; rotation DOFs are unloaded.
AssembledSystem assemble_beam(const BeamModel& model, const Vector& nodal_load);

// ---------------------------------------------------------------------------
// Rotor-dynamic system in the frequency domain.

struct RotorModel {
    Matrix M, G, C, K_r;            // K_r excludes bearings
    std::vector<int> bearing_dofs;  // DOFs the bearing stiffness attaches to
    CVector excitation;             // base excitation vector
    bool unbalance_scaling = true;  // F(omega) = omega^2 * excitation

    CVector force_at(double omega) const;
};

// Small synthetic lumped shaft: 4 stations x (x,y), bearings at both ends.
RotorModel default_rotor();

RotorModel rotor_from_json(const std::string& json_text);
std::string rotor_to_json(const RotorModel& model);

// Dynamic stiffness Z(omega) = -omega^2 M + j omega (G omega + C) + K_r + K_b
// with the bearing block K_b (size n_b^2, n_b = bearing_dofs.size()) expanded
// onto the bearing DOFs. F is the excitation at omega.
AssembledSystemC assemble_rotor(const RotorModel& model, double omega, const Matrix& K_b);

}  // namespace femnn::fem
