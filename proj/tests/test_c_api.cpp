#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "femnn.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("femnn_capi_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("version string") {
    const char* v = femnn_version();
    REQUIRE(v != nullptr);
    CHECK(std::strlen(v) > 0);
}

TEST_CASE("error codes for malformed configs") {
    char err[256] = {0};
    CHECK(femnn_train_forward("not json", err, sizeof(err)) == FEMNN_ERR_CONFIG);
    CHECK(std::strlen(err) > 0);
    CHECK(femnn_train_forward(nullptr, err, sizeof(err)) == FEMNN_ERR_CONFIG);
    TempDir tmp("err");
    const std::string bad =
        std::string("{\"family\":\"nope\",\"out\":\"") + tmp.sub("x") + "\"}";
    CHECK(femnn_train_forward(bad.c_str(), err, sizeof(err)) == FEMNN_ERR_CONFIG);
}

TEST_CASE("train, open model handle, evaluate") {
    TempDir tmp("train");
    const std::string cfg = std::string("{\"family\":\"convdiff\",\"epochs\":3,") +
                            "\"batch_size\":2,\"seed\":5,\"out\":\"" + tmp.sub("m") + "\"}";
    char err[512] = {0};
    REQUIRE(femnn_train_forward(cfg.c_str(), err, sizeof(err)) == FEMNN_OK);

    femnn_model* model = nullptr;
    const std::string mp = tmp.sub("m") + "/model.json";
    REQUIRE(femnn_model_open(mp.c_str(), &model, err, sizeof(err)) == FEMNN_OK);
    REQUIRE(model != nullptr);
    CHECK(femnn_model_input_size(model) == 10);
    CHECK(femnn_model_output_size(model) == 4);

    double x[10] = {100, 20, 10, 20, 100, 100, 100, 100, 100, 100};
    double y[4] = {0, 0, 0, 0};
    CHECK(femnn_model_eval(model, x, 10, y, 4, err, sizeof(err)) == FEMNN_OK);
    bool nonzero = false;
    for (double v : y) nonzero = nonzero || v != 0.0;
    CHECK(nonzero);

    double small[2];
    CHECK(femnn_model_eval(model, x, 10, small, 2, err, sizeof(err)) == FEMNN_ERR_CONFIG);
    CHECK(femnn_model_eval(nullptr, x, 10, y, 4, err, sizeof(err)) == FEMNN_ERR_CONFIG);
    femnn_model_close(model);
    femnn_model_close(nullptr);  // tolerated

    femnn_model* missing = nullptr;
    CHECK(femnn_model_open("/nonexistent.json", &missing, err, sizeof(err)) ==
          FEMNN_ERR_CONFIG);
}

TEST_CASE("predict returns a result document") {
    TempDir tmp("predict");
    const std::string tcfg = std::string("{\"family\":\"convdiff\",\"epochs\":2,") +
                             "\"batch_size\":2,\"seed\":1,\"out\":\"" + tmp.sub("m") + "\"}";
    char err[512] = {0};
    REQUIRE(femnn_train_forward(tcfg.c_str(), err, sizeof(err)) == FEMNN_OK);
    const std::string pcfg = std::string("{\"family\":\"convdiff\",\"model\":\"") +
                             tmp.sub("m") + "/model.json\"," +
                             "\"input\":[100,20,10,20,100,100,100,100,100,100]," +
                             "\"out\":\"" + tmp.sub("p") + "\"}";
    char result[8192] = {0};
    REQUIRE(femnn_predict(pcfg.c_str(), result, sizeof(result), err, sizeof(err)) == FEMNN_OK);
    const std::string doc(result);
    CHECK(doc.find("\"residual_norm\"") != std::string::npos);
    CHECK(doc.find("\"u\"") != std::string::npos);
}

TEST_CASE("generate observations and identify via the C API") {
    TempDir tmp("ident");
    char err[512] = {0};
    const std::string gcfg =
        std::string("{\"omega_count\":5,\"seed\":2,\"out\":\"") + tmp.sub("o") + "\"}";
    REQUIRE(femnn_generate_observations(gcfg.c_str(), err, sizeof(err)) == FEMNN_OK);
    const std::string icfg = std::string("{\"observations\":\"") + tmp.sub("o") +
                             "/observations.json\",\"epochs\":10,\"seed\":2,\"out\":\"" +
                             tmp.sub("i") + "\"}";
    CHECK(femnn_identify(icfg.c_str(), err, sizeof(err)) == FEMNN_OK);
    CHECK(fs::exists(tmp.sub("i") + "/stiffness.csv"));
}

TEST_CASE("uq via the C API") {
    TempDir tmp("uq");
    char err[512] = {0};
    const std::string cfg = std::string("{\"family\":\"building_beam\",\"evaluator\":\"fem\",") +
                            "\"n\":20,\"seed\":4,\"out\":\"" + tmp.sub("u") + "\"}";
    CHECK(femnn_uq(cfg.c_str(), err, sizeof(err)) == FEMNN_OK);
    CHECK(fs::exists(tmp.sub("u") + "/summary.json"));
}
