#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "femnn/commands.hpp"
#include "femnn/io.hpp"

using namespace femnn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("femnn_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) { return io::read_text_file(p); }

}  // namespace

TEST_CASE("csv writer format") {
    TempDir tmp("csv");
    const std::string path = tmp.sub("t.csv");
    {
        io::CsvWriter csv(path, {"a", "b"});
        csv.row({1.0, 0.1});
        csv.row({1e300, -2.5});
        CHECK_THROWS_AS(csv.row({1.0}), ShapeError);
    }
    std::istringstream in(slurp(path));
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    std::getline(in, line);
    CHECK(line == "1,0.10000000000000001");  // %.17g round-trips doubles
    std::getline(in, line);
    CHECK(line == "1.0000000000000001e+300,-2.5");
}

TEST_CASE("train-forward command writes artifacts and reruns byte-identically") {
    TempDir tmp("train");
    json cfg = {{"family", "convdiff"}, {"epochs", 3},    {"batch_size", 4},
                {"seed", 1},            {"out", tmp.sub("r1")}};
    commands::train_forward(cfg);
    CHECK(fs::exists(tmp.sub("r1") + "/model.json"));
    CHECK(fs::exists(tmp.sub("r1") + "/history.csv"));
    CHECK(fs::exists(tmp.sub("r1") + "/resolved_config.json"));

    // history has a header + 3 rows, wall_ms column zeroed without --timings
    std::istringstream in(slurp(tmp.sub("r1") + "/history.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,mean_loss,wall_ms");
    int rows = 0;
    while (std::getline(in, line) && !line.empty()) {
        CHECK(line.substr(line.rfind(',') + 1) == "0.000");
        ++rows;
    }
    CHECK(rows == 3);

    cfg["out"] = tmp.sub("r2");
    commands::train_forward(cfg);
    CHECK(slurp(tmp.sub("r1") + "/history.csv") == slurp(tmp.sub("r2") + "/history.csv"));
    CHECK(slurp(tmp.sub("r1") + "/model.json") == slurp(tmp.sub("r2") + "/model.json"));

    // echoed config replays to the same bytes
    json echoed = json::parse(slurp(tmp.sub("r1") + "/resolved_config.json"));
    echoed["out"] = tmp.sub("r3");
    commands::train_forward(echoed);
    CHECK(slurp(tmp.sub("r1") + "/model.json") == slurp(tmp.sub("r3") + "/model.json"));
}

TEST_CASE("train-forward rejects bad configs") {
    TempDir tmp("badcfg");
    CHECK_THROWS_AS(
        commands::train_forward(json{{"family", "nope"}, {"out", tmp.sub("x")}}),
        ConfigError);
    CHECK_THROWS_AS(commands::train_forward(json{{"family", "convdiff"},
                                                 {"loss_variant", "banana"},
                                                 {"out", tmp.sub("y")}}),
                    ConfigError);
    CHECK_THROWS_AS(commands::train_forward(json{{"family", "rotor_bearing"},
                                                 {"out", tmp.sub("z")}}),
                    ConfigError);  // inverse family has no forward trainer
}

TEST_CASE("predict command reports and refines") {
    TempDir tmp("predict");
    json tcfg = {{"family", "convdiff"}, {"epochs", 2}, {"batch_size", 2},
                 {"seed", 2},            {"out", tmp.sub("m")}};
    commands::train_forward(tcfg);

    json pcfg = {{"family", "convdiff"},
                 {"model", tmp.sub("m") + "/model.json"},
                 {"input", {100.0, 20.0, 10.0, 20.0, 100.0, 100.0, 100.0, 100.0, 100.0, 100.0}},
                 {"out", tmp.sub("p")}};
    json out = commands::predict(pcfg);
    CHECK(out.at("u").size() == 4);
    CHECK(out.at("u_full").size() == 6);
    CHECK(out.at("u_full").at(0) == 100.0);
    CHECK(out.at("residual_norm").get<double>() > 0.0);
    CHECK(fs::exists(tmp.sub("p") + "/prediction.json"));

    // --refine contract: refined == true implies tiny relative residual
    pcfg["refine"] = true;
    pcfg["out"] = tmp.sub("pr");
    json refined = commands::predict(pcfg);
    if (refined.at("refined").get<bool>())
        CHECK(refined.at("relative_residual").get<double>() <= 1e-8);
    CHECK(refined.at("accepted") == true);

    // malformed input length
    pcfg["input"] = {1.0, 2.0};
    CHECK_THROWS_AS(commands::predict(pcfg), ConfigError);
}

TEST_CASE("uq command emits ensemble, summary, pdf and cdf") {
    TempDir tmp("uq");
    json cfg = {{"family", "building_beam"}, {"evaluator", "fem"}, {"n", 50},
                {"n_bins", 10},              {"seed", 7},          {"out", tmp.sub("u")}};
    commands::uq_run(cfg);
    std::istringstream in(slurp(tmp.sub("u") + "/ensemble.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "sample_index,u_ref,z0,output");
    int rows = 0;
    while (std::getline(in, line) && !line.empty()) ++rows;
    CHECK(rows == 50);
    json summary = json::parse(slurp(tmp.sub("u") + "/summary.json"));
    CHECK(summary.at("n_samples") == 50);
    CHECK(summary.at("evaluator") == "fem");
    CHECK(summary.at("refinements") == 0);
    CHECK(fs::exists(tmp.sub("u") + "/pdf.csv"));
    CHECK(fs::exists(tmp.sub("u") + "/cdf.csv"));

    // surrogate mode requires a model
    json bad = cfg;
    bad["evaluator"] = "surrogate";
    bad["out"] = tmp.sub("bad");
    CHECK_THROWS_AS(commands::uq_run(bad), ConfigError);
}

TEST_CASE("generate-observations and identify round trip") {
    TempDir tmp("ident");
    json gen = {{"omega_count", 6}, {"seed", 3}, {"out", tmp.sub("obs")}};
    commands::generate_observations(gen);
    CHECK(fs::exists(tmp.sub("obs") + "/observations.json"));
    CHECK(fs::exists(tmp.sub("obs") + "/truth.csv"));

    json ident = {{"observations", tmp.sub("obs") + "/observations.json"},
                  {"epochs", 30},
                  {"seed", 3},
                  {"out", tmp.sub("id")}};
    commands::identify(ident);
    std::istringstream in(slurp(tmp.sub("id") + "/stiffness.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "omega,k_xx,k_yy");
    int rows = 0;
    while (std::getline(in, line) && !line.empty()) ++rows;
    CHECK(rows == 6);
    CHECK(fs::exists(tmp.sub("id") + "/model.json"));
    CHECK(fs::exists(tmp.sub("id") + "/history.csv"));

    json bad = ident;
    bad["observations"] = tmp.sub("obs") + "/missing.json";
    CHECK_THROWS_AS(commands::identify(bad), ConfigError);
}
