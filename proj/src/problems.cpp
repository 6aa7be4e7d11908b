#include "femnn/problems.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace femnn::problems {

using nlohmann::json;

uq::DistributionSpec spec_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "normal") return uq::Normal{j.at("mean"), j.at("std")};
    if (kind == "weibull") return uq::Weibull{j.at("mean"), j.at("shape")};
    if (kind == "uniform") return uq::Uniform{j.at("lo"), j.at("hi")};
    throw ConfigError("unknown distribution kind: " + kind);
}

json spec_to_json(const uq::DistributionSpec& spec) {
    json j;
    std::visit(
        [&j](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, uq::Normal>) {
                j = {{"kind", "normal"}, {"mean", d.mean}, {"std", d.std}};
            } else if constexpr (std::is_same_v<T, uq::Weibull>) {
                j = {{"kind", "weibull"}, {"mean", d.mean}, {"shape", d.shape}};
            } else {
                j = {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
            }
        },
        spec);
    return j;
}

std::pair<double, double> spec_moments(const uq::DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> std::pair<double, double> {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, uq::Normal>) {
                return {d.mean, d.std};
            } else if constexpr (std::is_same_v<T, uq::Weibull>) {
                const double lam = uq::weibull_scale(d);
                const double g1 = std::tgamma(1.0 + 1.0 / d.shape);
                const double g2 = std::tgamma(1.0 + 2.0 / d.shape);
                return {d.mean, lam * std::sqrt(std::max(g2 - g1 * g1, 0.0))};
            } else {
                return {(d.lo + d.hi) / 2.0, (d.hi - d.lo) / std::sqrt(12.0)};
            }
        },
        spec);
}

namespace {

void apply_input_overrides(ProblemFamily& fam, const json& overrides) {
    if (!overrides.contains("inputs")) return;
    for (const auto& [key, val] : overrides.at("inputs").items()) {
        bool found = false;
        for (auto& in : fam.inputs)
            if (in.name == key) {
                in.spec = spec_from_json(val);
                found = true;
            }
        if (!found)
            throw ConfigError("input override for unknown parameter: " + key);
    }
}

void finish_common(ProblemFamily& fam, const json& overrides,
                   std::vector<std::size_t> default_hidden, double default_scale) {
    fam.hidden_layers =
        overrides.value("hidden_layers", std::vector<std::size_t>(std::move(default_hidden)));
    fam.output_scale = overrides.value("output_scale", default_scale);
    fam.precondition_output =
        static_cast<bool>(fam.assemble) && overrides.value("precondition_output", true);
    apply_input_overrides(fam, overrides);
    json cfg;
    cfg["family"] = fam.name;
    cfg["hidden_layers"] = fam.hidden_layers;
    cfg["output_scale"] = fam.output_scale;
    cfg["precondition_output"] = fam.precondition_output;
    for (const auto& in : fam.inputs) cfg["inputs"][in.name] = spec_to_json(in.spec);
    for (const auto& [k, v] : fam.config.items()) cfg[k] = v;
    fam.config = cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int free_dof_index(const fem::AssembledSystem& sys, int node, int comp) {
    for (std::size_t i = 0; i < sys.dof_map.size(); ++i)
        if (sys.dof_map[i].first == node && sys.dof_map[i].second == comp)
            return static_cast<int>(i);
    throw ShapeError("QoI DOF not found in dof_map");
}

ProblemFamily make_convdiff(const json& overrides) {
    const std::size_t n_nodes = overrides.value("n_nodes", 6);
    if (n_nodes < 3)
        throw ConfigError("convdiff: n_nodes must be >= 3");
    ProblemFamily fam;
    fam.name = "convdiff";
    fam.n_components = 1;
    fam.dof_count = n_nodes - 2;
    fam.inputs = {{"T1", uq::Uniform{0.0, 200.0}},
                  {"T2", uq::Uniform{0.0, 200.0}},
                  {"k", uq::Uniform{1.0, 12.0}},
                  {"u", uq::Uniform{0.0, 30.0}}};
    for (std::size_t i = 0; i < n_nodes; ++i)
        fam.inputs.push_back({"S" + std::to_string(i + 1), uq::Uniform{0.0, 100.0}});
    fam.assemble = [n_nodes](const Vector& x) {
        fem::ConvDiffParams p;
        p.T1 = x[0];
        p.T2 = x[1];
        p.k = x[2];
        p.u = x[3];
        p.S.assign(x.begin() + 4, x.end());
        return fem::assemble_convdiff(p, n_nodes);
    };
    const std::size_t mid = (n_nodes - 2) / 2;
    fam.qoi = [mid](const Vector& u) { return u[mid]; };
    fam.config["n_nodes"] = n_nodes;
    finish_common(fam, overrides, {64, 64, 64}, 100.0);
    return fam;
}

ProblemFamily make_truss23(const json& overrides) {
    fem::TrussModel base = overrides.contains("geometry_file")
                               ? fem::truss_from_json(
                                     read_file(overrides.at("geometry_file").get<std::string>()))
                               : fem::default_truss23();
    ProblemFamily fam;
    fam.name = "truss23";
    fam.n_components = 2;
    fam.inputs = {{"A_h", uq::Normal{1.0e-3, 1.0e-4}},
                  {"A_v", uq::Normal{2.0e-3, 2.0e-4}},
                  {"E_h", uq::Normal{2.1e11, 2.1e10}},
                  {"E_v", uq::Normal{2.1e11, 2.1e10}}};
    for (int i = 1; i <= 6; ++i)
        fam.inputs.push_back({"P" + std::to_string(i), uq::Normal{-5.0e5, 5.0e4}});
    fam.assemble = [base](const Vector& x) {
        fem::TrussModel m = base;
        m.A_h = x[0];
        m.A_v = x[1];
        m.E_h = x[2];
        m.E_v = x[3];
        m.loads.assign(x.begin() + 4, x.end());
        return fem::assemble_truss(m);
    };
    fam.dof_count = 2 * base.nodes.size() - base.supports.size();
    {
        // Mid-span vertical displacement of the lower chord.
        fem::TrussModel probe = base;
        probe.loads = Vector(probe.load_nodes.size(), 0.0);
        fem::AssembledSystem sys = fem::assemble_truss(probe);
        const int mid_node = base.load_nodes[base.load_nodes.size() / 2];
        const int idx = free_dof_index(sys, mid_node, 1);
        fam.qoi = [idx](const Vector& u) { return u[idx]; };
    }
    finish_common(fam, overrides, {64, 64, 64}, 0.05);
    return fam;
}

ProblemFamily make_building_beam(const json& overrides) {
    fem::BeamModel beam;
    beam.H = overrides.value("H", beam.H);
    beam.W = overrides.value("W", beam.W);
    beam.D = overrides.value("D", beam.D);
    beam.f = overrides.value("f", beam.f);
    beam.rho = overrides.value("rho", beam.rho);
    beam.zeta = overrides.value("zeta", beam.zeta);
    beam.EI = overrides.value("EI", beam.EI);
    beam.n_e = overrides.value("n_e", beam.n_e);
    beam.rho_air = overrides.value("rho_air", beam.rho_air);
    beam.C_d = overrides.value("C_d", beam.C_d);

    ProblemFamily fam;
    fam.name = "building_beam";
    fam.n_components = 2;
    fam.dof_count = 2 * beam.n_e;  // clamped base removes 2 DOFs
    fam.inputs = {{"u_ref", uq::Weibull{40.0, 2.0}}, {"z0", uq::Uniform{0.1, 0.7}}};
    fam.assemble = [beam](const Vector& x) {
        Vector load = fem::wind_load_profile(x[0], x[1], beam);
        return fem::assemble_beam(beam, load);
    };
    const int top_idx = 2 * beam.n_e - 2;  // deflection DOF of the top node
    fam.qoi = [top_idx](const Vector& u) { return u[top_idx]; };
    fam.config["n_e"] = beam.n_e;
    fam.config["H"] = beam.H;
    fam.config["EI"] = beam.bending_stiffness();
    finish_common(fam, overrides, {64, 64, 64}, 0.1);
    return fam;
}

ProblemFamily make_rotor_bearing(const json& overrides) {
    ProblemFamily fam;
    fam.name = "rotor_bearing";
    fam.n_components = 2;
    fam.rotor = overrides.contains("model_file")
                    ? fem::rotor_from_json(read_file(overrides.at("model_file").get<std::string>()))
                    : fem::default_rotor();
    inverse::BearingParametrization param;
    param.n_bearings = static_cast<int>(fam.rotor->bearing_dofs.size()) / 2;
    param.k_ref = overrides.value("k_ref", 1e7);
    const std::string kind = overrides.value("parametrization", std::string("diagonal"));
    if (kind == "diagonal")
        param.kind = inverse::BearingParametrization::Kind::Diagonal;
    else if (kind == "full")
        param.kind = inverse::BearingParametrization::Kind::Full;
    else
        throw ConfigError("rotor_bearing: unknown parametrization " + kind);
    fam.bearing_param = param;
    fam.dof_count = param.n_coeffs();
    const double w_lo = overrides.value("omega_min", 50.0);
    const double w_hi = overrides.value("omega_max", 500.0);
    fam.inputs = {{"omega", uq::Uniform{w_lo, w_hi}}};
    fam.qoi = [](const Vector& c) { return c[0]; };
    fam.config["k_ref"] = param.k_ref;
    fam.config["parametrization"] = kind;
    fam.config["omega_min"] = w_lo;
    fam.config["omega_max"] = w_hi;
    finish_common(fam, overrides, {32, 32}, param.k_ref);
    return fam;
}

}  // namespace

ProblemFamily make_family(const std::string& name, const json& overrides_in) {
    const json overrides = overrides_in.is_null() ? json::object() : overrides_in;
    if (name == "convdiff") return make_convdiff(overrides);
    if (name == "truss23") return make_truss23(overrides);
    if (name == "building_beam") return make_building_beam(overrides);
    if (name == "rotor_bearing") return make_rotor_bearing(overrides);
    throw ConfigError("unknown problem family: " + name +
                      " (known: convdiff, truss23, building_beam, rotor_bearing)");
}

hybrid::Sample sample_inputs(const ProblemFamily& fam, Rng& rng) {
    hybrid::Sample s;
    s.x.reserve(fam.input_count());
    for (const auto& in : fam.inputs) s.x.push_back(uq::draw(in.spec, rng));
    try {
        s.system = fam.assemble(s.x);
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << fam.name << ": assembly failed for drawn inputs (";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << (i ? ", " : "") << fam.inputs[i].name << "=" << s.x[i];
        os << "): " << e.what();
        throw ParameterError(os.str());
    }
    return s;
}

neural::MlpModel make_model(const ProblemFamily& fam, Rng init_rng) {
    std::vector<std::size_t> sizes;
    sizes.push_back(fam.input_count());
    for (std::size_t h : fam.hidden_layers) sizes.push_back(h);
    sizes.push_back(fam.dof_count);
    neural::MlpModel model = neural::make_mlp(sizes);
    neural::init_weights(model, init_rng.derive(rng_stream::init));
    model.output_scale = fam.output_scale;
    for (const auto& in : fam.inputs) {
        auto [mean, std] = spec_moments(in.spec);
        model.input_mean.push_back(mean);
        model.input_std.push_back(std > 0.0 ? std : 1.0);
    }
    if (fam.precondition_output && fam.assemble) {
        // Fixed output map T = K0^{-1} * s built from the nominal system: the
        // network works in force-like units and the residual-loss Hessian
        // K^T T^T T K stays near the identity across the input distribution.
        Vector x0;
        for (const auto& in : fam.inputs) x0.push_back(spec_moments(in.spec).first);
        const fem::AssembledSystem sys0 = fam.assemble(x0);
        const std::size_t n = sys0.K.rows;
        double f_rms = linalg::euclidean_norm(sys0.F) / std::sqrt(static_cast<double>(n));
        if (f_rms <= 0.0) f_rms = 1.0;
        const double s = f_rms / fam.output_scale;
        model.output_transform = Matrix(n, n);
        Vector e(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            e[j] = s;
            Vector col = linalg::lu_solve(sys0.K, e);
            e[j] = 0.0;
            for (std::size_t i = 0; i < n; ++i) model.output_transform(i, j) = col[i];
        }
    }
    return model;
}

Vector expand_solution(const ProblemFamily& fam, const fem::AssembledSystem& sys,
                       const Vector& u_free) {
    const std::size_t total = u_free.size() + sys.dirichlet.size();
    Vector full(total, 0.0);
    for (const auto& [dof, value] : sys.dirichlet) full[dof] = value;
    for (std::size_t i = 0; i < u_free.size(); ++i) {
        const auto& [node, comp] = sys.dof_map[i];
        full[static_cast<std::size_t>(node) * fam.n_components + comp] = u_free[i];
    }
    return full;
}

}  // namespace femnn::problems
