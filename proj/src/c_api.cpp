#include "femnn.h"

#include <cstring>
#include <new>

#include "femnn/commands.hpp"
#include "femnn/neural.hpp"

namespace {

using nlohmann::json;

void fill(char* buf, size_t cap, const char* msg) {
    if (!buf || cap == 0) return;
    std::strncpy(buf, msg, cap - 1);
    buf[cap - 1] = '\0';
}

template <class Fn>
femnn_status guarded(Fn&& fn, char* err, size_t err_cap) {
    try {
        fn();
        return FEMNN_OK;
    } catch (const femnn::DivergenceError& e) {
        fill(err, err_cap, e.what());
        return FEMNN_ERR_NUMERIC;
    } catch (const femnn::SingularMatrixError& e) {
        fill(err, err_cap, e.what());
        return FEMNN_ERR_NUMERIC;
    } catch (const femnn::NonConvergenceError& e) {
        fill(err, err_cap, e.what());
        return FEMNN_ERR_NUMERIC;
    } catch (const std::invalid_argument& e) {
        fill(err, err_cap, e.what());
        return FEMNN_ERR_CONFIG;
    } catch (const json::exception& e) {
        fill(err, err_cap, e.what());
        return FEMNN_ERR_CONFIG;
    } catch (const std::exception& e) {
        fill(err, err_cap, e.what());
        return FEMNN_ERR_INTERNAL;
    }
}

json parse_cfg(const char* config_json) {
    if (!config_json)
        throw femnn::ConfigError("config_json is null");
    return json::parse(config_json);
}

}  // namespace

extern "C" {

struct femnn_model {
    femnn::neural::MlpModel impl;
};

const char* femnn_version(void) { return "femnn 1.0.0"; }

femnn_status femnn_train_forward(const char* config_json, char* err, size_t err_cap) {
    return guarded([&] { femnn::commands::train_forward(parse_cfg(config_json)); }, err, err_cap);
}

femnn_status femnn_predict(const char* config_json, char* result_json, size_t result_cap,
                           char* err, size_t err_cap) {
    return guarded(
        [&] {
            json out = femnn::commands::predict(parse_cfg(config_json));
            fill(result_json, result_cap, out.dump().c_str());
        },
        err, err_cap);
}

femnn_status femnn_compare_baseline(const char* config_json, char* err, size_t err_cap) {
    return guarded([&] { femnn::commands::compare_baseline(parse_cfg(config_json)); }, err,
                   err_cap);
}

femnn_status femnn_uq(const char* config_json, char* err, size_t err_cap) {
    return guarded([&] { femnn::commands::uq_run(parse_cfg(config_json)); }, err, err_cap);
}

femnn_status femnn_identify(const char* config_json, char* err, size_t err_cap) {
    return guarded([&] { femnn::commands::identify(parse_cfg(config_json)); }, err, err_cap);
}

femnn_status femnn_generate_observations(const char* config_json, char* err, size_t err_cap) {
    return guarded([&] { femnn::commands::generate_observations(parse_cfg(config_json)); }, err,
                   err_cap);
}

femnn_status femnn_model_open(const char* path, femnn_model** out, char* err, size_t err_cap) {
    return guarded(
        [&] {
            if (!path || !out)
                throw femnn::ConfigError("femnn_model_open: null argument");
            *out = new femnn_model{femnn::neural::load_model(path)};
        },
        err, err_cap);
}

void femnn_model_close(femnn_model* model) { delete model; }

size_t femnn_model_input_size(const femnn_model* model) {
    return model ? model->impl.input_size() : 0;
}

size_t femnn_model_output_size(const femnn_model* model) {
    return model ? model->impl.output_size() : 0;
}

femnn_status femnn_model_eval(const femnn_model* model, const double* x, size_t n_x,
                              double* y, size_t y_cap, char* err, size_t err_cap) {
    return guarded(
        [&] {
            if (!model || !x || !y)
                throw femnn::ConfigError("femnn_model_eval: null argument");
            if (y_cap < model->impl.output_size())
                throw femnn::ConfigError("femnn_model_eval: output buffer too small");
            femnn::Vector in(x, x + n_x);
            femnn::Vector out = femnn::neural::evaluate(model->impl, in);
            std::memcpy(y, out.data(), out.size() * sizeof(double));
        },
        err, err_cap);
}

}  // extern "C"
