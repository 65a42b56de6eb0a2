#include "ringpbc/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace ringpbc;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string error_of(const nlohmann::json& j) {
    try {
        (void)scenario_from_json(j);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("scenario: built-in campaigns", "[scenario]") {
    const auto names = builtin_scenario_names();
    CHECK(names.size() == 5);

    const auto bal = load_scenario("balanced");
    REQUIRE(bal.size() == 5);
    for (const auto& c : bal.params.converters) {
        CHECK(c.L == 46e-3);
        CHECK(c.C == 100e-6);
        CHECK(c.E == 15.0);
        CHECK(c.R2T == 170.0);
    }
    for (const auto& l : bal.params.lines) {
        CHECK(l.LT == 15e-3);
        CHECK(l.R1T == 100.0);
    }
    CHECK(std::get<ConstantReference>(bal.reference).vCd == std::vector<double>(5, 40.0));
    CHECK(bal.damping.R_alpha == std::vector<double>(5, 15.0));
    CHECK(bal.x0.kind == InitialState::Kind::Zero);
    CHECK(bal.integrator.t_end == 1.0);

    const auto ui = load_scenario("unbalanced-inputs");
    const double e[] = {15, 13, 12, 13, 15};
    for (std::size_t n = 0; n < 5; ++n) CHECK(ui.params.converters[n].E == e[n]);

    const auto ul = load_scenario("unbalanced-loads");
    const double r[] = {130, 170, 140, 170, 130};
    for (std::size_t n = 0; n < 5; ++n) CHECK(ul.params.converters[n].R2T == r[n]);

    CHECK(load_scenario("unbalanced-loads-fig8").params.converters[0].R2T == 30.0);

    const auto sin = load_scenario("sinusoid");
    const auto& ref = std::get<SinusoidReference>(sin.reference);
    CHECK(ref.vDC == 40.0);
    CHECK(ref.A == 8.0);
    CHECK(ref.f == 60.0);

    for (const auto& n : names) CHECK_NOTHROW(builtin_scenario(n).validate());
}

TEST_CASE("scenario: unknown names list the built-ins", "[scenario]") {
    CHECK_THROWS_WITH(load_scenario("no-such-thing"),
                      ContainsSubstring("unknown scenario") && ContainsSubstring("unbalanced-loads"));
}

TEST_CASE("scenario: built-ins round-trip through JSON", "[scenario]") {
    for (const auto& name : builtin_scenario_names()) {
        const auto s = builtin_scenario(name);
        const auto text = scenario_to_json(s).dump(2);
        CHECK(scenario_from_json(nlohmann::json::parse(text)) == s);
    }
    Scenario s = builtin_scenario("unbalanced-inputs");
    s.control = ControlMode::OpenLoop;
    s.mode = SimMode::Switched;
    s.integrator.dt = 1e-6;
    s.integrator.method = IntegratorMethod::Rk4;
    s.pwm.phase = {0.0, 0.1, 0.2, 0.3, 0.4};
    s.voltage_mode = DesiredVoltageMode::Override;
    s.x0 = InitialState{InitialState::Kind::Random, {}, 0.5, 12345678901234ULL};
    CHECK(scenario_from_json(nlohmann::json::parse(scenario_to_json(s).dump())) == s);
    s.x0 = InitialState{InitialState::Kind::Explicit, std::vector<double>(15, 0.1), 1.0, 0};
    CHECK(scenario_from_json(nlohmann::json::parse(scenario_to_json(s).dump())) == s);
}

TEST_CASE("scenario: schema errors name the field", "[scenario]") {
    auto j = scenario_to_json(builtin_scenario("balanced"));
    auto bad = j;
    bad["converters"][2]["L"] = "big";
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.converters[2].L"));

    bad = j;
    bad["converters"][1].erase("C");
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.converters[1].C: missing"));

    bad = j;
    bad["reference"]["vCd"] = {40, 40};
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.reference.vCd"));

    bad = j;
    bad["reference"]["vCd"] = 10.0;
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.reference"));

    bad = j;
    bad["mode"] = "hybrid";
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.mode"));

    bad = j;
    bad["integrator"]["method"] = "euler";
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.integrator.method"));

    bad = j;
    bad["integrator"]["rtol"] = -1;
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.integrator"));

    bad = j;
    bad["lines"].erase(0);
    CHECK_THAT(error_of(bad), ContainsSubstring("lines"));

    bad = j;
    bad["mode"] = "switched";
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.integrator.dt"));

    bad = j;
    bad["x0"] = {{"type", "explicit"}, {"values", {1, 2, 3}}};
    CHECK_THAT(error_of(bad), ContainsSubstring("scenario.x0.values"));
}

TEST_CASE("scenario: minimal file fills defaults", "[scenario]") {
    const auto j = nlohmann::json::parse(R"({
        "name": "pair",
        "converters": [{"L": 0.046, "C": 1e-4, "E": 15, "R2T": 170},
                       {"L": 0.046, "C": 1e-4, "E": 15, "R2T": 170}],
        "lines": [{"LT": 0.015, "R1T": 100}, {"LT": 0.015, "R1T": 100}],
        "reference": {"vCd": 40}
    })");
    const auto s = scenario_from_json(j);
    CHECK(s.size() == 2);
    CHECK(s.control == ControlMode::Pbc);
    CHECK(s.damping.R_alpha == std::vector<double>(2, 15.0));
    CHECK(std::get<ConstantReference>(s.reference).vCd == std::vector<double>(2, 40.0));
    CHECK(s.integrator == IntegratorConfig{});
    CHECK(s.mode == SimMode::Averaged);
    CHECK(s.x0.kind == InitialState::Kind::Zero);
}

TEST_CASE("scenario: load from file", "[scenario]") {
    const auto path = std::filesystem::temp_directory_path() / "ringpbc_scenario_test.json";
    Scenario s = builtin_scenario("unbalanced-loads");
    s.name = "from-file";
    {
        std::ofstream os(path);
        os << scenario_to_json(s).dump(2);
    }
    CHECK(load_scenario(path.string()) == s);
    {
        std::ofstream os(path);
        os << "{ not json";
    }
    CHECK_THROWS_AS(load_scenario(path.string()), std::invalid_argument);
    std::filesystem::remove(path);
}

TEST_CASE("scenario: initial states", "[scenario]") {
    Scenario s = builtin_scenario("balanced");
    CHECK(initial_state(s).vector().isZero());

    s.x0.kind = InitialState::Kind::Equilibrium;
    const auto eq = initial_state(s);
    CHECK(eq.vC(3) == Catch::Approx(40.0));
    CHECK(eq.iL(3) == Catch::Approx(0.62745098));

    s.x0 = InitialState{InitialState::Kind::Random, {}, 0.5, 7};
    const auto a = initial_state(s);
    const auto b = initial_state(s);
    CHECK(a.vector() == b.vector());
    CHECK((a.vector() - eq.vector()).cwiseAbs().maxCoeff() <= 0.5);
    s.x0.seed = 8;
    CHECK(initial_state(s).vector() != a.vector());
}

TEST_CASE("scenario: jobs follow the control and simulation mode", "[scenario]") {
    Scenario s = builtin_scenario("sinusoid");
    auto job = make_job(s);
    CHECK(std::holds_alternative<PassivityControl>(job.law));
    CHECK_FALSE(job.pwm);

    s.control = ControlMode::OpenLoop;
    s.mode = SimMode::Switched;
    s.integrator.dt = 1e-6;
    job = make_job(s);
    CHECK(std::holds_alternative<OpenLoopReference>(job.law));
    REQUIRE(job.pwm);
    CHECK(job.pwm->f_sw == 20e3);
    CHECK(target_voltage(s, 0, 1.0 / 240.0) == Catch::Approx(48.0));
}
