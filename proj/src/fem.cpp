#include "femnn/fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace femnn::fem {

using nlohmann::json;

AssembledSystem apply_dirichlet(const Matrix& K_full, const Vector& F_full,
                                const std::vector<std::pair<int, double>>& constraints,
                                const std::vector<std::pair<int, int>>* labels) {
    const std::size_t n = K_full.rows;
    if (K_full.cols != n || F_full.size() != n)
        throw ShapeError("apply_dirichlet: system not square/conforming");
    std::vector<double> prescribed(n, 0.0);
    std::vector<bool> fixed(n, false);
    for (const auto& [dof, value] : constraints) {
        if (dof < 0 || static_cast<std::size_t>(dof) >= n)
            throw ConstraintError("apply_dirichlet: constrained DOF out of range");
        if (fixed[dof])
            throw ConstraintError("apply_dirichlet: duplicate constraint on DOF " +
                                  std::to_string(dof));
        fixed[dof] = true;
        prescribed[dof] = value;
    }
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i)
        if (!fixed[i]) free.push_back(i);
    if (free.empty())
        throw ConstraintError("apply_dirichlet: every DOF constrained, empty system");

    AssembledSystem sys;
    sys.K = Matrix(free.size(), free.size());
    sys.F = Vector(free.size(), 0.0);
    for (std::size_t a = 0; a < free.size(); ++a) {
        double f = F_full[free[a]];
        for (std::size_t i = 0; i < n; ++i)
            if (fixed[i]) f -= K_full(free[a], i) * prescribed[i];
        sys.F[a] = f;
        for (std::size_t b = 0; b < free.size(); ++b) sys.K(a, b) = K_full(free[a], free[b]);
    }
    for (std::size_t a = 0; a < free.size(); ++a) {
        int g = static_cast<int>(free[a]);
        sys.dof_map.push_back(labels ? (*labels)[free[a]] : std::make_pair(g, 0));
    }
    sys.dirichlet = constraints;
    return sys;
}

// ---------------------------------------------------------------------------

AssembledSystem assemble_convdiff(const ConvDiffParams& p, std::size_t n_nodes) {
    if (n_nodes < 3)
        throw ConstraintError("assemble_convdiff: n_nodes < 3 leaves no free DOFs");
    if (p.k <= 0.0)
        throw ParameterError("assemble_convdiff: diffusion coefficient k must be > 0");
    if (p.S.size() != n_nodes)
        throw ShapeError("assemble_convdiff: S.len != n_nodes");
    const double h = 1.0 / static_cast<double>(n_nodes - 1);

    Matrix K(n_nodes, n_nodes);
    Vector F(n_nodes, 0.0);
    for (std::size_t e = 0; e + 1 < n_nodes; ++e) {
        const double kd = p.k / h;
        // diffusion (k/h)[[1,-1],[-1,1]] + convection (u/2)[[-1,1],[-1,1]]
        K(e, e) += kd - p.u / 2.0;
        K(e, e + 1) += -kd + p.u / 2.0;
        K(e + 1, e) += -kd - p.u / 2.0;
        K(e + 1, e + 1) += kd + p.u / 2.0;
        // linearly interpolated source, consistent load vector
        F[e] += h / 6.0 * (2.0 * p.S[e] + p.S[e + 1]);
        F[e + 1] += h / 6.0 * (p.S[e] + 2.0 * p.S[e + 1]);
    }
    std::vector<std::pair<int, double>> bc = {{0, p.T1}, {static_cast<int>(n_nodes - 1), p.T2}};
    return apply_dirichlet(K, F, bc);
}

double element_peclet(const ConvDiffParams& p, std::size_t n_nodes) {
    const double h = 1.0 / static_cast<double>(n_nodes - 1);
    return std::abs(p.u) * h / (2.0 * p.k);
}

// ---------------------------------------------------------------------------

TrussModel default_truss23() {
    TrussModel m;
    // Top chord: 7 nodes across 24 m at y = 2 (supports at both ends).
    for (int i = 0; i <= 6; ++i) m.nodes.push_back({4.0 * i, 2.0});
    // Lower chord: 6 loaded nodes at y = 0.
    for (int i = 0; i < 6; ++i) m.nodes.push_back({2.0 + 4.0 * i, 0.0});
    for (int i = 0; i < 6; ++i) m.members.push_back({i, i + 1, 0});        // top chord
    for (int i = 7; i < 12; ++i) m.members.push_back({i, i + 1, 0});       // lower chord
    for (int i = 0; i < 6; ++i) {                                          // diagonals
        m.members.push_back({i, 7 + i, 1});
        m.members.push_back({7 + i, i + 1, 1});
    }
    m.supports = {{0, 0}, {0, 1}, {6, 1}};  // pin + roller
    m.load_nodes = {7, 8, 9, 10, 11, 12};
    m.loads = Vector(6, 0.0);
    return m;
}

TrussModel truss_from_json(const std::string& text) {
    json j = json::parse(text);
    TrussModel m;
    for (const auto& n : j.at("nodes")) m.nodes.push_back({n.at(0), n.at(1)});
    for (const auto& e : j.at("members"))
        m.members.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
    for (const auto& s : j.at("supports"))
        m.supports.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    for (const auto& n : j.at("load_nodes")) m.load_nodes.push_back(n.get<int>());
    m.E_h = j.value("E_h", m.E_h);
    m.E_v = j.value("E_v", m.E_v);
    m.A_h = j.value("A_h", m.A_h);
    m.A_v = j.value("A_v", m.A_v);
    if (j.contains("loads"))
        m.loads = j.at("loads").get<Vector>();
    else
        m.loads = Vector(m.load_nodes.size(), 0.0);
    return m;
}

std::string truss_to_json(const TrussModel& m) {
    json j;
    for (const auto& n : m.nodes) j["nodes"].push_back({n[0], n[1]});
    for (const auto& e : m.members) j["members"].push_back({e.i, e.j, e.group});
    for (const auto& s : m.supports) j["supports"].push_back({s.first, s.second});
    j["load_nodes"] = m.load_nodes;
    j["E_h"] = m.E_h;
    j["E_v"] = m.E_v;
    j["A_h"] = m.A_h;
    j["A_v"] = m.A_v;
    j["loads"] = m.loads;
    return j.dump(2);
}

AssembledSystem assemble_truss(const TrussModel& m) {
    const std::size_t nn = m.nodes.size();
    const std::size_t ndof = 2 * nn;
    if (m.loads.size() != m.load_nodes.size())
        throw ShapeError("assemble_truss: loads.len != load_nodes.len");
    if (m.E_h <= 0 || m.E_v <= 0 || m.A_h <= 0 || m.A_v <= 0)
        throw ParameterError("assemble_truss: moduli and areas must be > 0");

    Matrix K(ndof, ndof);
    for (const auto& mem : m.members) {
        const auto& a = m.nodes[mem.i];
        const auto& b = m.nodes[mem.j];
        const double dx = b[0] - a[0], dy = b[1] - a[1];
        const double L = std::hypot(dx, dy);
        const double c = dx / L, s = dy / L;
        const double E = mem.group == 0 ? m.E_h : m.E_v;
        const double A = mem.group == 0 ? m.A_h : m.A_v;
        const double kea = E * A / L;
        const double kl[2][2] = {{c * c, c * s}, {c * s, s * s}};
        const int dof[4] = {2 * mem.i, 2 * mem.i + 1, 2 * mem.j, 2 * mem.j + 1};
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q) {
                const double v = kea * kl[p][q];
                K(dof[p], dof[q]) += v;
                K(dof[p + 2], dof[q + 2]) += v;
                K(dof[p], dof[q + 2]) -= v;
                K(dof[p + 2], dof[q]) -= v;
            }
    }
    Vector F(ndof, 0.0);
    for (std::size_t i = 0; i < m.load_nodes.size(); ++i)
        F[2 * m.load_nodes[i] + 1] += m.loads[i];

    std::vector<std::pair<int, double>> bc;
    for (const auto& [node, comp] : m.supports) bc.emplace_back(2 * node + comp, 0.0);
    std::vector<std::pair<int, int>> labels(ndof);
    for (std::size_t d = 0; d < ndof; ++d)
        labels[d] = {static_cast<int>(d / 2), static_cast<int>(d % 2)};
    AssembledSystem sys = apply_dirichlet(K, F, bc, &labels);

    // Mechanism check: the reduced matrix must factor.
    if (!linalg::is_factorizable(sys.K))
        throw SingularMatrixError("assemble_truss: structure is a mechanism (singular K)");
    return sys;
}

// ---------------------------------------------------------------------------

double BeamModel::bending_stiffness() const {
    if (EI > 0.0) return EI;
    // First cantilever mode: f = (beta^2 / 2 pi) sqrt(EI / (m L^4)), beta L = 1.8751.
    const double beta2 = 1.8751040687119611 * 1.8751040687119611;
    const double w = 2.0 * M_PI * f / beta2;
    return w * w * mass_per_length() * H * H * H * H;
}

Vector wind_load_profile(double u_ref, double z0, const BeamModel& m) {
    if (z0 <= 0.0)
        throw ParameterError("wind_load_profile: roughness length z0 must be > 0");
    if (z0 >= m.H)
        throw ParameterError("wind_load_profile: z0 must be below z_ref = H");
    if (u_ref < 0.0)
        throw ParameterError("wind_load_profile: u_ref must be >= 0");
    const int nn = m.n_e + 1;
    const double h = m.H / m.n_e;
    const double logref = std::log(m.H / z0);
    Vector f(nn, 0.0);
    for (int i = 0; i < nn; ++i) {
        const double z = i * h;
        const double V = z <= z0 ? 0.0 : u_ref * std::log(z / z0) / logref;
        const double trib = (i == 0 || i == m.n_e) ? h / 2.0 : h;
        f[i] = 0.5 * m.rho_air * V * V * (m.W * trib) * m.C_d;
    }
    return f;
}

AssembledSystem assemble_beam(const BeamModel& m, const Vector& nodal_load) {
    if (m.n_e < 4)
        throw ParameterError("assemble_beam: mesh too coarse, need n_e >= 4");
    const int nn = m.n_e + 1;
    if (nodal_load.size() != static_cast<std::size_t>(nn))
        throw ShapeError("assemble_beam: load.len != node count");
    const double h = m.H / m.n_e;
    const double EI = m.bending_stiffness();
    const std::size_t ndof = 2 * nn;  // (deflection, rotation) per node

    Matrix K(ndof, ndof);
    const double k0 = EI / (h * h * h);
    const double ke[4][4] = {
        {12 * k0, 6 * h * k0, -12 * k0, 6 * h * k0},
        {6 * h * k0, 4 * h * h * k0, -6 * h * k0, 2 * h * h * k0},
        {-12 * k0, -6 * h * k0, 12 * k0, -6 * h * k0},
        {6 * h * k0, 2 * h * h * k0, -6 * h * k0, 4 * h * h * k0}};
    for (int e = 0; e < m.n_e; ++e) {
        const int dof[4] = {2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3};
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) K(dof[p], dof[q]) += ke[p][q];
    }
    Vector F(ndof, 0.0);
    for (int i = 0; i < nn; ++i) F[2 * i] = nodal_load[i];

    std::vector<std::pair<int, double>> bc = {{0, 0.0}, {1, 0.0}};  // clamped base
    std::vector<std::pair<int, int>> labels(ndof);
    for (std::size_t d = 0; d < ndof; ++d)
        labels[d] = {static_cast<int>(d / 2), static_cast<int>(d % 2)};
    return apply_dirichlet(K, F, bc, &labels);
}

// ---------------------------------------------------------------------------

CVector RotorModel::force_at(double omega) const {
    CVector f = excitation;
    if (unbalance_scaling)
        for (auto& v : f) v *= omega * omega;
    return f;
}

RotorModel default_rotor() {
    // 4 lumped stations along the shaft, (x, y) per station, node-major DOFs.
    // Bearings at stations 0 and 3, unbalance at station 1.
    const int ns = 4;
    const int n = 2 * ns;
    RotorModel m;
    m.M = Matrix(n, n);
    m.G = Matrix(n, n);
    m.C = Matrix(n, n);
    m.K_r = Matrix(n, n);
    const double mass[ns] = {40.0, 80.0, 80.0, 40.0};
    for (int s = 0; s < ns; ++s) {
        m.M(2 * s, 2 * s) = mass[s];
        m.M(2 * s + 1, 2 * s + 1) = mass[s];
        m.C(2 * s, 2 * s) = 200.0;
        m.C(2 * s + 1, 2 * s + 1) = 200.0;
    }
    // Shaft bending modeled as lateral springs between neighbours.
    const double ks = 5.0e7;
    for (int s = 0; s + 1 < ns; ++s)
        for (int d = 0; d < 2; ++d) {
            const int a = 2 * s + d, b = 2 * (s + 1) + d;
            m.K_r(a, a) += ks;
            m.K_r(b, b) += ks;
            m.K_r(a, b) -= ks;
            m.K_r(b, a) -= ks;
        }
    // Gyroscopic x/y coupling at the disc stations.
    const double g = 0.5;
    for (int s = 1; s <= 2; ++s) {
        m.G(2 * s, 2 * s + 1) = g;
        m.G(2 * s + 1, 2 * s) = -g;
    }
    m.bearing_dofs = {0, 1, 6, 7};
    m.excitation = CVector(n, 0.0);
    const double me = 1.0e-3;  // unbalance m*e, kg m
    m.excitation[2] = std::complex<double>(me, 0.0);
    m.excitation[3] = std::complex<double>(0.0, -me);
    m.unbalance_scaling = true;
    return m;
}

namespace {
Matrix matrix_from_json(const json& j) {
    Matrix m(j.size(), j.empty() ? 0 : j.at(0).size());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = 0; k < m.cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
    return m;
}
json matrix_to_json(const Matrix& m) {
    json j = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.cols; ++k) row.push_back(m(i, k));
        j.push_back(row);
    }
    return j;
}
}  // namespace

RotorModel rotor_from_json(const std::string& text) {
    json j = json::parse(text);
    RotorModel m;
    m.M = matrix_from_json(j.at("M"));
    m.G = matrix_from_json(j.at("G"));
    m.C = matrix_from_json(j.at("C"));
    m.K_r = matrix_from_json(j.at("K_r"));
    m.bearing_dofs = j.at("bearing_dofs").get<std::vector<int>>();
    for (const auto& p : j.at("excitation"))
        m.excitation.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    m.unbalance_scaling = j.value("unbalance_scaling", true);
    return m;
}

std::string rotor_to_json(const RotorModel& m) {
    json j;
    j["M"] = matrix_to_json(m.M);
    j["G"] = matrix_to_json(m.G);
    j["C"] = matrix_to_json(m.C);
    j["K_r"] = matrix_to_json(m.K_r);
    j["bearing_dofs"] = m.bearing_dofs;
    json exc = json::array();
    for (const auto& v : m.excitation) exc.push_back({v.real(), v.imag()});
    j["excitation"] = exc;
    j["unbalance_scaling"] = m.unbalance_scaling;
    return j.dump(2);
}

AssembledSystemC assemble_rotor(const RotorModel& m, double omega, const Matrix& K_b) {
    const std::size_t n = m.M.rows;
    if (m.G.rows != n || m.C.rows != n || m.K_r.rows != n || m.excitation.size() != n)
        throw ShapeError("assemble_rotor: matrix dimensions disagree");
    const std::size_t nb = m.bearing_dofs.size();
    if (K_b.rows != nb || K_b.cols != nb)
        throw ShapeError("assemble_rotor: K_b does not match bearing DOF block");
    if (omega < 0.0)
        throw ParameterError("assemble_rotor: omega must be >= 0");
    std::set<int> seen;
    for (int d : m.bearing_dofs) {
        if (d < 0 || static_cast<std::size_t>(d) >= n || !seen.insert(d).second)
            throw ShapeError("assemble_rotor: bearing DOF indices invalid");
    }

    AssembledSystemC sys;
    sys.K = CMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sys.K(i, j) = std::complex<double>(
                -omega * omega * m.M(i, j) + m.K_r(i, j),
                omega * (m.G(i, j) * omega + m.C(i, j)));
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            sys.K(m.bearing_dofs[a], m.bearing_dofs[b]) += K_b(a, b);
    sys.F = m.force_at(omega);
    for (std::size_t d = 0; d < n; ++d)
        sys.dof_map.push_back({static_cast<int>(d / 2), static_cast<int>(d % 2)});
    return sys;
}

}  // namespace femnn::fem
