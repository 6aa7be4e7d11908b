#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "femnn/problems.hpp"

using namespace femnn;
using nlohmann::json;

namespace {

// Does perturbing input i change K or F? (dead-input probe)
bool input_is_consumed(const problems::ProblemFamily& fam, const Vector& x0, std::size_t i) {
    fem::AssembledSystem base = fam.assemble(x0);
    Vector x = x0;
    x[i] += std::max(std::abs(x[i]) * 1e-3, 1e-6);
    fem::AssembledSystem pert = fam.assemble(x);
    return pert.K.a != base.K.a || pert.F != base.F;
}

Vector nominal_inputs(const problems::ProblemFamily& fam) {
    Vector x;
    for (const auto& in : fam.inputs) x.push_back(problems::spec_moments(in.spec).first);
    return x;
}

}  // namespace

TEST_CASE("family registry") {
    CHECK_THROWS_AS(problems::make_family("nope"), ConfigError);
    for (const char* name : {"convdiff", "truss23", "building_beam", "rotor_bearing"}) {
        auto fam = problems::make_family(name);
        CHECK(fam.name == name);
        CHECK(fam.input_count() >= 1);
        CHECK(fam.dof_count >= 1);
    }
}

TEST_CASE("convdiff family schema") {
    auto fam = problems::make_family("convdiff");
    REQUIRE(fam.input_count() == 10);  // T1 T2 k u S1..S6
    CHECK(fam.inputs[0].name == "T1");
    CHECK(fam.inputs[3].name == "u");
    CHECK(fam.inputs[9].name == "S6");
    CHECK(fam.dof_count == 4);
    Vector x0 = nominal_inputs(fam);
    auto sys = fam.assemble(x0);
    CHECK(sys.K.rows == 4);
    for (std::size_t i = 0; i < fam.input_count(); ++i) CHECK(input_is_consumed(fam, x0, i));

    // overrides change the mesh consistently
    auto fine = problems::make_family("convdiff", json{{"n_nodes", 11}});
    CHECK(fine.dof_count == 9);
    CHECK(fine.input_count() == 15);
    CHECK(fine.assemble(nominal_inputs(fine)).K.rows == 9);
}

TEST_CASE("truss23 family schema matches the input table") {
    auto fam = problems::make_family("truss23");
    REQUIRE(fam.input_count() == 10);
    CHECK(fam.inputs[0].name == "A_h");
    auto check_normal = [&](int idx, double mean, double std) {
        const auto* n = std::get_if<uq::Normal>(&fam.inputs[idx].spec);
        REQUIRE(n != nullptr);
        CHECK(n->mean == mean);
        CHECK(n->std == std);
    };
    check_normal(0, 1.0e-3, 1.0e-4);
    check_normal(1, 2.0e-3, 2.0e-4);
    check_normal(2, 2.1e11, 2.1e10);
    check_normal(3, 2.1e11, 2.1e10);
    for (int p = 0; p < 6; ++p) check_normal(4 + p, -5.0e5, 5.0e4);
    CHECK(fam.dof_count == 23);
    Vector x0 = nominal_inputs(fam);
    for (std::size_t i = 0; i < fam.input_count(); ++i) CHECK(input_is_consumed(fam, x0, i));

    // QoI sign: downward loads -> negative mid-span vertical displacement
    auto sys = fam.assemble(x0);
    Vector u = linalg::lu_solve(sys.K, sys.F);
    CHECK(fam.qoi(u) < 0.0);
    CHECK(std::isfinite(fam.qoi(u)));
}

TEST_CASE("building_beam family schema") {
    auto fam = problems::make_family("building_beam");
    REQUIRE(fam.input_count() == 2);
    CHECK(fam.inputs[0].name == "u_ref");
    CHECK(fam.inputs[1].name == "z0");
    CHECK(fam.dof_count == 32);  // 16 elements, clamped base
    CHECK(fam.config.at("H") == 180.0);
    CHECK(fam.config.at("EI").get<double>() > 0.0);
    Vector x0 = {40.0, 0.3};
    for (std::size_t i = 0; i < 2; ++i) CHECK(input_is_consumed(fam, x0, i));

    // wind -> positive lateral top deflection
    auto sys = fam.assemble(x0);
    Vector u = linalg::lu_solve(sys.K, sys.F);
    CHECK(fam.qoi(u) > 0.0);

    auto stiff = problems::make_family("building_beam", json{{"EI", 1e14}, {"n_e", 8}});
    CHECK(stiff.dof_count == 16);
    CHECK(stiff.config.at("EI") == 1e14);
}

TEST_CASE("rotor_bearing family carries the inverse fixtures") {
    auto fam = problems::make_family("rotor_bearing");
    REQUIRE(fam.rotor.has_value());
    REQUIRE(fam.bearing_param.has_value());
    CHECK(fam.input_count() == 1);
    CHECK(fam.dof_count == 2);  // diagonal parametrization
    CHECK(fam.bearing_param->n_bearings == 2);
    auto full = problems::make_family("rotor_bearing", json{{"parametrization", "full"}});
    CHECK(full.dof_count == 4);
    CHECK_THROWS_AS(problems::make_family("rotor_bearing", json{{"parametrization", "banana"}}),
                    ConfigError);
}

TEST_CASE("sample_inputs draws, assembles, never solves, and is deterministic") {
    auto fam = problems::make_family("convdiff");
    linalg::reset_lu_solve_call_count();
    Rng r1(42);
    auto s1 = problems::sample_inputs(fam, r1);
    CHECK(linalg::lu_solve_call_count() == 0);
    CHECK(s1.x.size() == 10);
    CHECK(s1.system.K.rows == 4);
    Rng r2(42);
    auto s2 = problems::sample_inputs(fam, r2);
    CHECK(s1.x == s2.x);
    CHECK(s1.system.K.a == s2.system.K.a);
    CHECK(s1.system.F == s2.system.F);
    // in-distribution bounds
    CHECK(s1.x[2] >= 1.0);  // k
    CHECK(s1.x[2] <= 12.0);
}

TEST_CASE("input overrides reshape the sampling distribution") {
    json ov;
    ov["inputs"]["u_ref"] = {{"kind", "weibull"}, {"mean", 56.0}, {"shape", 2.0}};
    auto fam = problems::make_family("building_beam", ov);
    auto [mean, stddev] = problems::spec_moments(fam.inputs[0].spec);
    CHECK(mean == doctest::Approx(56.0));
    json bad;
    bad["inputs"]["nope"] = {{"kind", "normal"}, {"mean", 0.0}, {"std", 1.0}};
    CHECK_THROWS_AS(problems::make_family("building_beam", bad), ConfigError);
}

TEST_CASE("make_model matches the family shape and standardization") {
    auto fam = problems::make_family("truss23");
    auto model = problems::make_model(fam, Rng(7));
    CHECK(model.input_size() == 10);
    CHECK(model.output_size() == 23);
    CHECK(model.output_scale == fam.output_scale);
    REQUIRE(model.input_mean.size() == 10);
    CHECK(model.input_mean[0] == doctest::Approx(1.0e-3));
    CHECK(model.input_std[0] == doctest::Approx(1.0e-4));
    // deterministic init
    auto model2 = problems::make_model(fam, Rng(7));
    CHECK(model.weights[0].a == model2.weights[0].a);
}

TEST_CASE("expand_solution reinserts Dirichlet values") {
    auto fam = problems::make_family("convdiff");
    Vector x = nominal_inputs(fam);
    x[0] = 123.0;  // T1
    x[1] = 45.0;   // T2
    auto sys = fam.assemble(x);
    Vector u = {1.0, 2.0, 3.0, 4.0};
    Vector full = problems::expand_solution(fam, sys, u);
    REQUIRE(full.size() == 6);
    CHECK(full[0] == 123.0);
    CHECK(full[5] == 45.0);
    CHECK(full[1] == 1.0);
    CHECK(full[4] == 4.0);
}

TEST_CASE("spec json round trip") {
    for (const uq::DistributionSpec spec :
         {uq::DistributionSpec(uq::Normal{1.0, 2.0}), uq::DistributionSpec(uq::Weibull{40.0, 2.0}),
          uq::DistributionSpec(uq::Uniform{-1.0, 1.0})}) {
        auto back = problems::spec_from_json(problems::spec_to_json(spec));
        auto [m1, s1] = problems::spec_moments(spec);
        auto [m2, s2] = problems::spec_moments(back);
        CHECK(m1 == m2);
        CHECK(s1 == s2);
    }
    CHECK_THROWS_AS(problems::spec_from_json(json{{"kind", "cauchy"}}), ConfigError);
}
