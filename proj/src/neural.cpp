#include "femnn/neural.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace femnn::neural {

using nlohmann::json;

MlpModel make_mlp(const std::vector<std::size_t>& layer_sizes) {
    if (layer_sizes.size() < 2)
        throw ShapeError("make_mlp: need at least input and output layer");
    MlpModel m;
    m.layer_sizes = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        m.weights.emplace_back(layer_sizes[l + 1], layer_sizes[l]);
        m.biases.emplace_back(layer_sizes[l + 1], 0.0);
    }
    return m;
}

void init_weights(MlpModel& model, Rng rng) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Matrix& w = model.weights[l];
        const double limit = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
        for (double& v : w.a) v = rng.uniform(-limit, limit);
        for (double& v : model.biases[l]) v = 0.0;
    }
}

namespace {

Vector standardize(const MlpModel& m, const Vector& x) {
    if (m.input_mean.empty()) return x;
    if (m.input_mean.size() != x.size() || m.input_std.size() != x.size())
        throw ShapeError("forward: normalization stats do not match input size");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = m.input_std[i] > 0.0 ? m.input_std[i] : 1.0;
        z[i] = (x[i] - m.input_mean[i]) / s;
    }
    return z;
}

}  // namespace

std::pair<Vector, ForwardTrace> forward(const MlpModel& m, const Vector& x) {
    if (x.size() != m.input_size())
        throw ShapeError("forward: input length != layer_sizes[0]");
    ForwardTrace tr;
    Vector o = standardize(m, x);
    tr.inputs.push_back(o);
    const std::size_t L = m.n_layers();
    for (std::size_t l = 0; l < L; ++l) {
        Vector z = linalg::matvec(m.weights[l], o);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += m.biases[l][i];
        tr.pre.push_back(z);
        const bool last = (l + 1 == L);
        if (!last && m.hidden == Activation::Tanh)
            for (double& v : z) v = std::tanh(v);
        o = std::move(z);
        if (!last) tr.inputs.push_back(o);
    }
    for (double& v : o) v *= m.output_scale;
    if (m.output_transform.rows > 0) {
        if (m.output_transform.cols != o.size())
            throw ShapeError("forward: output_transform does not match output size");
        o = linalg::matvec(m.output_transform, o);
    }
    return {std::move(o), std::move(tr)};
}

Vector evaluate(const MlpModel& m, const Vector& x) { return forward(m, x).first; }

void ParamGrads::scale(double s) {
    for (auto& g : dw)
        for (double& v : g.a) v *= s;
    for (auto& g : db)
        for (double& v : g) v *= s;
}

void ParamGrads::accumulate(const ParamGrads& other) {
    for (std::size_t l = 0; l < dw.size(); ++l) {
        for (std::size_t i = 0; i < dw[l].a.size(); ++i) dw[l].a[i] += other.dw[l].a[i];
        for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += other.db[l][i];
    }
}

ParamGrads zero_grads(const MlpModel& m) {
    ParamGrads g;
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        g.dw.emplace_back(m.weights[l].rows, m.weights[l].cols);
        g.db.emplace_back(m.biases[l].size(), 0.0);
    }
    return g;
}

ParamGrads backward(const MlpModel& m, const ForwardTrace& tr, const Vector& dloss_dy) {
    const std::size_t L = m.n_layers();
    if (tr.pre.size() != L || tr.inputs.size() != L)
        throw ShapeError("backward: trace does not match model depth");
    if (dloss_dy.size() != m.output_size())
        throw ShapeError("backward: upstream gradient length != output size");

    ParamGrads g = zero_grads(m);
    Vector delta = dloss_dy;  // dLoss/dz for the current layer
    if (m.output_transform.rows > 0) {
        if (delta.size() != m.output_transform.rows)
            throw ShapeError("backward: upstream gradient does not match output_transform");
        delta = linalg::vecmat(delta, m.output_transform);  // chain through T
    }
    for (double& v : delta) v *= m.output_scale;
    for (std::size_t l = L; l-- > 0;) {
        if (l + 1 != L && m.hidden == Activation::Tanh) {
            // delta currently holds dLoss/do^l; fold in tanh'(z) = 1 - tanh(z)^2.
            for (std::size_t i = 0; i < delta.size(); ++i) {
                const double t = std::tanh(tr.pre[l][i]);
                delta[i] *= 1.0 - t * t;
            }
        }
        const Vector& in = tr.inputs[l];
        if (m.weights[l].cols != in.size() || m.weights[l].rows != delta.size())
            throw ShapeError("backward: stale trace");
        for (std::size_t i = 0; i < delta.size(); ++i) {
            g.db[l][i] = delta[i];
            for (std::size_t j = 0; j < in.size(); ++j) g.dw[l](i, j) = delta[i] * in[j];
        }
        if (l > 0) delta = linalg::vecmat(delta, m.weights[l]);
    }
    return g;
}

AdamState make_adam(const MlpModel& m, double eta) {
    AdamState s;
    s.eta = eta;
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        s.m_w.emplace_back(m.weights[l].rows, m.weights[l].cols);
        s.v_w.emplace_back(m.weights[l].rows, m.weights[l].cols);
        s.m_b.emplace_back(m.biases[l].size(), 0.0);
        s.v_b.emplace_back(m.biases[l].size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& s, MlpModel& m, const ParamGrads& g) {
    s.t += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    auto update = [&](double& p, double& mom, double& vel, double grad) {
        mom = s.beta1 * mom + (1.0 - s.beta1) * grad;
        vel = s.beta2 * vel + (1.0 - s.beta2) * grad * grad;
        p -= s.eta * (mom / bc1) / (std::sqrt(vel / bc2) + s.eps);
    };
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        for (std::size_t i = 0; i < m.weights[l].a.size(); ++i)
            update(m.weights[l].a[i], s.m_w[l].a[i], s.v_w[l].a[i], g.dw[l].a[i]);
        for (std::size_t i = 0; i < m.biases[l].size(); ++i)
            update(m.biases[l][i], s.m_b[l][i], s.v_b[l][i], g.db[l][i]);
    }
}

std::pair<double, Vector> loss_mse(const Vector& y, const Vector& y_true) {
    if (y.size() != y_true.size())
        throw ShapeError("loss_mse: length mismatch");
    const double n = static_cast<double>(y.size());
    double loss = 0.0;
    Vector grad(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y_true[i];
        loss += d * d / n;
        grad[i] = 2.0 * d / n;
    }
    return {loss, grad};
}

std::pair<double, Vector> loss_mape(const Vector& y, const Vector& y_true, double eps_mape) {
    if (y.size() != y_true.size())
        throw ShapeError("loss_mape: length mismatch");
    const double n = static_cast<double>(y.size());
    double loss = 0.0;
    Vector grad(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::abs(y_true[i]) <= eps_mape)
            throw ParameterError("loss_mape: |y_true| below division guard at index " +
                                 std::to_string(i));
        const double d = y[i] - y_true[i];
        loss += std::abs(d / y_true[i]) / n;
        const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        grad[i] = sign / (n * std::abs(y_true[i]));
    }
    return {loss, grad};
}

std::string model_to_json(const MlpModel& m) {
    json j;
    j["format_version"] = 1;
    j["layer_sizes"] = m.layer_sizes;
    j["hidden_activation"] = m.hidden == Activation::Tanh ? "tanh" : "identity";
    j["output_activation"] = "identity";
    j["input_mean"] = m.input_mean;
    j["input_std"] = m.input_std;
    j["output_scale"] = m.output_scale;
    if (m.output_transform.rows > 0) j["output_transform"] = m.output_transform.a;
    json ws = json::array(), bs = json::array();
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        ws.push_back(m.weights[l].a);  // row-major
        bs.push_back(m.biases[l]);
    }
    j["weights"] = ws;
    j["biases"] = bs;
    return j.dump(2);
}

MlpModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format_version", 0) != 1)
        throw ConfigError("model file: unsupported format_version");
    MlpModel m = make_mlp(j.at("layer_sizes").get<std::vector<std::size_t>>());
    m.hidden = j.value("hidden_activation", "tanh") == "tanh" ? Activation::Tanh
                                                              : Activation::Identity;
    m.input_mean = j.value("input_mean", Vector{});
    m.input_std = j.value("input_std", Vector{});
    m.output_scale = j.value("output_scale", 1.0);
    if (j.contains("output_transform")) {
        const std::size_t n = m.output_size();
        auto t = j.at("output_transform").get<Vector>();
        if (t.size() != n * n)
            throw ConfigError("model file: output_transform size mismatch");
        m.output_transform = Matrix(n, n);
        m.output_transform.a = std::move(t);
    }
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        auto w = j.at("weights").at(l).get<Vector>();
        if (w.size() != m.weights[l].a.size())
            throw ConfigError("model file: weight block size mismatch");
        m.weights[l].a = std::move(w);
        auto b = j.at("biases").at(l).get<Vector>();
        if (b.size() != m.biases[l].size())
            throw ConfigError("model file: bias block size mismatch");
        m.biases[l] = std::move(b);
    }
    return m;
}

void save_model(const MlpModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("save_model: cannot open " + path);
    out << model_to_json(m) << "\n";
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("load_model: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace femnn::neural
