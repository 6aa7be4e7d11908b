// Command-line front end. Deliberately a thin client of the C library API:
// it only assembles a resolved JSON config from flags and a config file and
// forwards it to the femnn_* entry points.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "femnn.h"

namespace {

using nlohmann::json;

struct CommonOpts {
    std::string config_path;
    std::string out = "out";
    long long seed = 0;
    int parallel = 1;
    bool timings = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--parallel", o.parallel, "worker threads where supported");
    cmd->add_flag("--timings", o.timings, "record real wall-clock columns (non-reproducible)");
}

json base_config(const CLI::App* cmd, const CommonOpts& o) {
    json cfg = json::object();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) {
            std::cerr << "error: cannot open config file " << o.config_path << "\n";
            std::exit(1);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = json::parse(ss.str());
    }
    if (cmd->count("--out") || !cfg.contains("out")) cfg["out"] = o.out;
    if (cmd->count("--seed") || !cfg.contains("seed")) cfg["seed"] = o.seed;
    if (cmd->count("--parallel")) cfg["parallel"] = o.parallel;
    if (cmd->count("--timings")) cfg["timings"] = o.timings;
    return cfg;
}

int run(femnn_status (*fn)(const char*, char*, size_t), const json& cfg) {
    char err[1024] = {0};
    const femnn_status st = fn(cfg.dump().c_str(), err, sizeof(err));
    if (st != FEMNN_OK)
        std::cerr << "error: " << err << "\n";
    return st == FEMNN_ERR_NUMERIC ? 2 : (st == FEMNN_OK ? 0 : 1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FEM-NN hybrid surrogate toolkit"};
    app.require_subcommand(1);

    // train-forward
    auto* train = app.add_subcommand("train-forward",
                                     "train a surrogate against the FEM residual loss");
    CommonOpts t_opts;
    add_common(train, t_opts);
    std::string t_family = "convdiff", t_variant;
    long long t_epochs = -1, t_batch = -1;
    double t_lr = -1.0;
    train->add_option("--family", t_family, "problem family");
    train->add_option("--epochs", t_epochs, "training epochs");
    train->add_option("--batch-size", t_batch, "samples per step");
    train->add_option("--learning-rate", t_lr, "Adam learning rate");
    train->add_option("--loss-variant", t_variant, "norm | mean-squared-norm");

    // predict
    auto* pred = app.add_subcommand("predict", "evaluate a model with residual report");
    CommonOpts p_opts;
    add_common(pred, p_opts);
    std::string p_family = "convdiff", p_model;
    std::vector<double> p_input;
    double p_tol = -1.0;
    bool p_refine = false;
    pred->add_option("--family", p_family, "problem family");
    pred->add_option("--model", p_model, "model JSON file");
    pred->add_option("--input", p_input, "input parameter values (family order)")->expected(-1);
    pred->add_option("--tol", p_tol, "relative residual acceptance tolerance");
    pred->add_flag("--refine", p_refine, "refine rejected predictions classically");

    // compare-baseline
    auto* comp = app.add_subcommand("compare-baseline",
                                    "hybrid vs conventional supervised surrogate");
    CommonOpts c_opts;
    add_common(comp, c_opts);
    std::string c_family = "convdiff";
    long long c_epochs = -1, c_dataset = -1;
    comp->add_option("--family", c_family, "problem family");
    comp->add_option("--epochs", c_epochs, "training epochs for both methods");
    comp->add_option("--dataset-size", c_dataset, "supervised training pairs to create");

    // uq
    auto* uqc = app.add_subcommand("uq", "Monte-Carlo uncertainty quantification");
    CommonOpts u_opts;
    add_common(uqc, u_opts);
    std::string u_family = "building_beam", u_eval = "fem", u_model;
    long long u_n = -1, u_bins = -1;
    double u_tol = -1.0;
    uqc->add_option("--family", u_family, "problem family");
    uqc->add_option("--evaluator", u_eval, "fem | surrogate | surrogate-fallback");
    uqc->add_option("--model", u_model, "model file (surrogate modes)");
    uqc->add_option("--n", u_n, "sample count");
    uqc->add_option("--bins", u_bins, "histogram bins");
    uqc->add_option("--tol", u_tol, "fallback acceptance tolerance");

    // identify
    auto* ident = app.add_subcommand("identify", "bearing stiffness identification");
    CommonOpts i_opts;
    add_common(ident, i_opts);
    std::string i_obs;
    long long i_epochs = -1;
    bool i_generate = false;
    ident->add_option("--observations", i_obs, "observation JSON file");
    ident->add_option("--epochs", i_epochs, "training epochs");
    ident->add_flag("--generate-synthetic", i_generate,
                    "synthesize observations first (smoke mode)");

    // generate-synthetic-observations
    auto* gen = app.add_subcommand("generate-synthetic-observations",
                                   "emit a synthetic rotor observation sweep");
    CommonOpts g_opts;
    add_common(gen, g_opts);
    long long g_count = -1;
    double g_noise = -1.0;
    gen->add_option("--omega-count", g_count, "speeds in the sweep");
    gen->add_option("--noise", g_noise, "relative response noise");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        json cfg = base_config(train, t_opts);
        if (train->count("--family") || !cfg.contains("family")) cfg["family"] = t_family;
        if (t_epochs >= 0) cfg["epochs"] = t_epochs;
        if (t_batch >= 0) cfg["batch_size"] = t_batch;
        if (t_lr >= 0) cfg["learning_rate"] = t_lr;
        if (!t_variant.empty()) cfg["loss_variant"] = t_variant;
        return run(femnn_train_forward, cfg);
    }
    if (pred->parsed()) {
        json cfg = base_config(pred, p_opts);
        if (pred->count("--family") || !cfg.contains("family")) cfg["family"] = p_family;
        if (!p_model.empty()) cfg["model"] = p_model;
        if (!p_input.empty()) cfg["input"] = p_input;
        if (p_tol >= 0) cfg["tol"] = p_tol;
        if (pred->count("--refine")) cfg["refine"] = p_refine;
        char result[1 << 16] = {0};
        char err[1024] = {0};
        const femnn_status st =
            femnn_predict(cfg.dump().c_str(), result, sizeof(result), err, sizeof(err));
        if (st != FEMNN_OK) {
            std::cerr << "error: " << err << "\n";
            return st == FEMNN_ERR_NUMERIC ? 2 : 1;
        }
        std::cout << result << "\n";
        return 0;
    }
    if (comp->parsed()) {
        json cfg = base_config(comp, c_opts);
        if (comp->count("--family") || !cfg.contains("family")) cfg["family"] = c_family;
        if (c_epochs >= 0) cfg["epochs"] = c_epochs;
        if (c_dataset >= 0) cfg["dataset_size"] = c_dataset;
        return run(femnn_compare_baseline, cfg);
    }
    if (uqc->parsed()) {
        json cfg = base_config(uqc, u_opts);
        if (uqc->count("--family") || !cfg.contains("family")) cfg["family"] = u_family;
        if (uqc->count("--evaluator") || !cfg.contains("evaluator")) cfg["evaluator"] = u_eval;
        if (!u_model.empty()) cfg["model"] = u_model;
        if (u_n >= 0) cfg["n"] = u_n;
        if (u_bins >= 0) cfg["n_bins"] = u_bins;
        if (u_tol >= 0) cfg["tol"] = u_tol;
        return run(femnn_uq, cfg);
    }
    if (ident->parsed()) {
        json cfg = base_config(ident, i_opts);
        if (i_epochs >= 0) cfg["epochs"] = i_epochs;
        if (i_generate) {
            // Smoke mode: synthesize into the output directory, then identify.
            json gen_cfg = cfg;
            gen_cfg.erase("epochs");
            char err[1024] = {0};
            if (femnn_generate_observations(gen_cfg.dump().c_str(), err, sizeof(err)) !=
                FEMNN_OK) {
                std::cerr << "error: " << err << "\n";
                return 1;
            }
            cfg["observations"] = cfg.value("out", "out") + std::string("/observations.json");
        } else if (!i_obs.empty()) {
            cfg["observations"] = i_obs;
        }
        if (!cfg.contains("observations")) {
            std::cerr << "error: identify needs --observations or --generate-synthetic\n";
            return 1;
        }
        return run(femnn_identify, cfg);
    }
    if (gen->parsed()) {
        json cfg = base_config(gen, g_opts);
        if (g_count >= 0) cfg["omega_count"] = g_count;
        if (g_noise >= 0) cfg["noise_rel"] = g_noise;
        return run(femnn_generate_observations, cfg);
    }
    return 1;
}
