#include "ringpbc/scenario.hpp"

#include "ringpbc/equilibrium.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>

namespace ringpbc {

using nlohmann::json;

namespace {

constexpr double kNominalL = 46e-3;
constexpr double kNominalC = 100e-6;
constexpr double kNominalE = 15.0;
constexpr double kNominalR2T = 170.0;
constexpr double kNominalLT = 15e-3;
constexpr double kNominalR1T = 100.0;
constexpr double kNominalVcd = 40.0;
constexpr double kDampingRalpha = 15.0;
constexpr Index kRingSize = 5;

Scenario nominal_scenario(std::string name, std::string description) {
    Scenario s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.params = RingParams::uniform(kRingSize, ConverterParams{kNominalL, kNominalC, kNominalE, kNominalR2T},
                                   LineParams{kNominalLT, kNominalR1T});
    s.control = ControlMode::Pbc;
    s.damping = DampingConfig::uniform(kRingSize, kDampingRalpha);
    s.reference = ConstantReference{std::vector<double>(kRingSize, kNominalVcd)};
    return s;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) schema_error(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema_error(path + "." + key, "missing required field");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) schema_error(path, "expected a number");
    return v.get<double>();
}

double number(const json& obj, const std::string& key, const std::string& path) {
    return as_number(field(obj, key, path), path + "." + key);
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    return as_number(obj.at(key), path + "." + key);
}

std::string string_or(const json& obj, const std::string& key, const std::string& path,
                      const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) schema_error(path + "." + key, "expected a string");
    return v.get<std::string>();
}

/// A list of m numbers, or a single number broadcast to all converters.
std::vector<double> per_converter(const json& v, const std::string& path, Index m) {
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(m), v.get<double>());
    if (!v.is_array()) schema_error(path, "expected a number or an array of numbers");
    if (static_cast<Index>(v.size()) != m) {
        schema_error(path, "expected " + std::to_string(m) + " entries, got " + std::to_string(v.size()));
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <class Fn>
void rethrow_with_path(const std::string& path, Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        schema_error(path, e.what());
    }
}

json reference_to_json(const Reference& ref) {
    if (const auto* c = std::get_if<ConstantReference>(&ref)) {
        return json{{"type", "constant"}, {"vCd", c->vCd}};
    }
    const auto& s = std::get<SinusoidReference>(ref);
    return json{{"type", "sinusoid"}, {"vDC", s.vDC}, {"A", s.A}, {"f", s.f}};
}

std::string_view to_string(InitialState::Kind k) {
    switch (k) {
        case InitialState::Kind::Zero: return "zero";
        case InitialState::Kind::Equilibrium: return "equilibrium";
        case InitialState::Kind::Explicit: return "explicit";
        case InitialState::Kind::Random: return "random";
    }
    return "?";
}

std::vector<double> reference_at_zero(const Scenario& s) {
    std::vector<double> v;
    for (Index n = 0; n < s.size(); ++n) v.push_back(target_voltage(s, n, 0.0));
    return v;
}

}  // namespace

std::string_view to_string(ControlMode c) { return c == ControlMode::Pbc ? "pbc" : "open-loop"; }
std::string_view to_string(SimMode s) { return s == SimMode::Averaged ? "averaged" : "switched"; }

void Scenario::validate() const {
    if (name.empty()) schema_error("scenario.name", "must not be empty");
    rethrow_with_path("scenario.params", [&] { params.validate(); });
    const Index m = params.size();
    rethrow_with_path("scenario.damping", [&] { damping.validate(m); });
    rethrow_with_path("scenario.reference", [&] { validate_reference(reference, params); });
    rethrow_with_path("scenario.integrator", [&] { integrator.validate(); });
    if (mode == SimMode::Switched) {
        rethrow_with_path("scenario.pwm", [&] { pwm.validate(m, reference_frequency(reference)); });
        if (integrator.dt > 1.0 / (50.0 * pwm.f_sw) * (1.0 + 1e-12)) {
            schema_error("scenario.integrator.dt", "switched mode needs dt <= 1/(50 f_sw)");
        }
    }
    if (x0.kind == InitialState::Kind::Explicit &&
        static_cast<Index>(x0.values.size()) != kSlotsPerConverter * m) {
        schema_error("scenario.x0.values", "expected " + std::to_string(kSlotsPerConverter * m) + " entries");
    }
    if (x0.kind == InitialState::Kind::Random && !(x0.amplitude >= 0.0)) {
        schema_error("scenario.x0.amplitude", "must be non-negative");
    }
}

std::vector<std::string> builtin_scenario_names() {
    return {"balanced", "unbalanced-inputs", "unbalanced-loads", "unbalanced-loads-fig8", "sinusoid"};
}

Scenario builtin_scenario(std::string_view name) {
    if (name == "balanced") {
        return nominal_scenario("balanced", "identical converters and lines, vCd = 40 V");
    }
    if (name == "unbalanced-inputs") {
        Scenario s = nominal_scenario("unbalanced-inputs", "source voltages 15,13,12,13,15 V");
        const double e[] = {15.0, 13.0, 12.0, 13.0, 15.0};
        for (Index n = 0; n < kRingSize; ++n) s.params.converters[static_cast<std::size_t>(n)].E = e[n];
        return s;
    }
    if (name == "unbalanced-loads") {
        Scenario s = nominal_scenario("unbalanced-loads", "load resistances 130,170,140,170,130 Ohm");
        const double r[] = {130.0, 170.0, 140.0, 170.0, 130.0};
        for (Index n = 0; n < kRingSize; ++n) s.params.converters[static_cast<std::size_t>(n)].R2T = r[n];
        return s;
    }
    if (name == "unbalanced-loads-fig8") {
        Scenario s = nominal_scenario("unbalanced-loads-fig8", "load resistances 30,170,140,170,130 Ohm");
        const double r[] = {30.0, 170.0, 140.0, 170.0, 130.0};
        for (Index n = 0; n < kRingSize; ++n) s.params.converters[static_cast<std::size_t>(n)].R2T = r[n];
        return s;
    }
    if (name == "sinusoid") {
        Scenario s = nominal_scenario("sinusoid", "vCd(t) = 40 + 8 sin(2 pi 60 t)");
        s.reference = SinusoidReference{40.0, 8.0, 60.0};
        return s;
    }
    std::string known;
    for (const auto& n : builtin_scenario_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'; built-ins: " + known);
}

Scenario load_scenario(const std::string& name_or_path) {
    const auto names = builtin_scenario_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
        return builtin_scenario(name_or_path);
    }
    if (!std::filesystem::exists(name_or_path)) {
        return builtin_scenario(name_or_path);  // throws with the list of built-ins
    }
    std::ifstream in(name_or_path);
    if (!in) throw std::runtime_error("cannot open scenario file " + name_or_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(name_or_path + ": " + e.what());
    }
    return scenario_from_json(j);
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["description"] = s.description;
    json conv = json::array();
    for (const auto& c : s.params.converters) conv.push_back({{"L", c.L}, {"C", c.C}, {"E", c.E}, {"R2T", c.R2T}});
    json lines = json::array();
    for (const auto& l : s.params.lines) lines.push_back({{"LT", l.LT}, {"R1T", l.R1T}});
    j["converters"] = conv;
    j["lines"] = lines;
    j["control"] = std::string(to_string(s.control));
    j["damping"] = {{"R_alpha", s.damping.R_alpha}};
    j["reference"] = reference_to_json(s.reference);
    j["desired_voltage"] = s.voltage_mode == DesiredVoltageMode::Evolve ? "evolve" : "override";
    const auto& ic = s.integrator;
    j["integrator"] = {{"method", std::string(to_string(ic.method))},
                       {"dt", ic.dt},
                       {"rtol", ic.rtol},
                       {"atol", ic.atol},
                       {"dt_min", ic.dt_min},
                       {"dt_max", ic.dt_max},
                       {"t_end", ic.t_end},
                       {"output_dt", ic.output_dt}};
    j["mode"] = std::string(to_string(s.mode));
    j["pwm"] = {{"f_sw", s.pwm.f_sw}, {"phase", s.pwm.phase}};
    json x0 = {{"type", std::string(to_string(s.x0.kind))}};
    if (s.x0.kind == InitialState::Kind::Explicit) x0["values"] = s.x0.values;
    if (s.x0.kind == InitialState::Kind::Random) {
        x0["amplitude"] = s.x0.amplitude;
        x0["seed"] = s.x0.seed;
    }
    j["x0"] = x0;
    return j;
}

Scenario scenario_from_json(const json& j) {
    const std::string root = "scenario";
    if (!j.is_object()) schema_error(root, "expected an object");
    Scenario s;
    s.name = string_or(j, "name", root, "");
    s.description = string_or(j, "description", root, "");

    const auto& conv = field(j, "converters", root);
    if (!conv.is_array()) schema_error(root + ".converters", "expected an array");
    for (std::size_t i = 0; i < conv.size(); ++i) {
        const std::string p = root + ".converters[" + std::to_string(i) + "]";
        s.params.converters.push_back(ConverterParams{number(conv[i], "L", p), number(conv[i], "C", p),
                                                      number(conv[i], "E", p), number(conv[i], "R2T", p)});
    }
    const auto& lines = field(j, "lines", root);
    if (!lines.is_array()) schema_error(root + ".lines", "expected an array");
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string p = root + ".lines[" + std::to_string(i) + "]";
        s.params.lines.push_back(LineParams{number(lines[i], "LT", p), number(lines[i], "R1T", p)});
    }
    rethrow_with_path(root, [&] { s.params.validate(); });
    const Index m = s.params.size();

    const std::string control = string_or(j, "control", root, "pbc");
    if (control == "pbc") {
        s.control = ControlMode::Pbc;
    } else if (control == "open-loop") {
        s.control = ControlMode::OpenLoop;
    } else {
        schema_error(root + ".control", "expected \"pbc\" or \"open-loop\"");
    }

    if (j.contains("damping")) {
        s.damping.R_alpha = per_converter(field(j.at("damping"), "R_alpha", root + ".damping"),
                                          root + ".damping.R_alpha", m);
    } else {
        s.damping = DampingConfig::uniform(m, kDampingRalpha);
    }

    const auto& ref = field(j, "reference", root);
    const std::string rp = root + ".reference";
    const std::string type = string_or(ref, "type", rp, "constant");
    if (type == "constant") {
        s.reference = ConstantReference{per_converter(field(ref, "vCd", rp), rp + ".vCd", m)};
    } else if (type == "sinusoid") {
        s.reference = SinusoidReference{number(ref, "vDC", rp), number(ref, "A", rp), number(ref, "f", rp)};
    } else {
        schema_error(rp + ".type", "expected \"constant\" or \"sinusoid\"");
    }

    const std::string dv = string_or(j, "desired_voltage", root, "evolve");
    if (dv == "evolve") {
        s.voltage_mode = DesiredVoltageMode::Evolve;
    } else if (dv == "override") {
        s.voltage_mode = DesiredVoltageMode::Override;
    } else {
        schema_error(root + ".desired_voltage", "expected \"evolve\" or \"override\"");
    }

    if (j.contains("integrator")) {
        const auto& ij = j.at("integrator");
        const std::string ip = root + ".integrator";
        if (!ij.is_object()) schema_error(ip, "expected an object");
        IntegratorConfig ic;
        rethrow_with_path(ip + ".method",
                          [&] { ic.method = parse_integrator_method(string_or(ij, "method", ip, "rk45")); });
        ic.dt = number_or(ij, "dt", ip, ic.dt);
        ic.rtol = number_or(ij, "rtol", ip, ic.rtol);
        ic.atol = number_or(ij, "atol", ip, ic.atol);
        ic.dt_min = number_or(ij, "dt_min", ip, ic.dt_min);
        ic.dt_max = number_or(ij, "dt_max", ip, ic.dt_max);
        ic.t_end = number_or(ij, "t_end", ip, ic.t_end);
        ic.output_dt = number_or(ij, "output_dt", ip, ic.output_dt);
        s.integrator = ic;
    }

    const std::string mode = string_or(j, "mode", root, "averaged");
    if (mode == "averaged") {
        s.mode = SimMode::Averaged;
    } else if (mode == "switched") {
        s.mode = SimMode::Switched;
    } else {
        schema_error(root + ".mode", "expected \"averaged\" or \"switched\"");
    }

    if (j.contains("pwm")) {
        const auto& pj = j.at("pwm");
        const std::string pp = root + ".pwm";
        s.pwm.f_sw = number_or(pj, "f_sw", pp, s.pwm.f_sw);
        if (pj.contains("phase") && !(pj.at("phase").is_array() && pj.at("phase").empty())) {
            s.pwm.phase = per_converter(pj.at("phase"), pp + ".phase", m);
        }
    }

    if (j.contains("x0")) {
        const auto& xj = j.at("x0");
        const std::string xp = root + ".x0";
        const std::string kind = string_or(xj, "type", xp, "zero");
        if (kind == "zero") {
            s.x0.kind = InitialState::Kind::Zero;
        } else if (kind == "equilibrium") {
            s.x0.kind = InitialState::Kind::Equilibrium;
        } else if (kind == "explicit") {
            s.x0.kind = InitialState::Kind::Explicit;
            const auto& vals = field(xj, "values", xp);
            if (!vals.is_array()) schema_error(xp + ".values", "expected an array");
            for (std::size_t i = 0; i < vals.size(); ++i) {
                s.x0.values.push_back(as_number(vals[i], xp + ".values[" + std::to_string(i) + "]"));
            }
        } else if (kind == "random") {
            s.x0.kind = InitialState::Kind::Random;
            s.x0.amplitude = number_or(xj, "amplitude", xp, s.x0.amplitude);
            if (xj.contains("seed")) {
                if (!xj.at("seed").is_number_unsigned()) schema_error(xp + ".seed", "expected a non-negative integer");
                s.x0.seed = xj.at("seed").get<std::uint64_t>();
            }
        } else {
            schema_error(xp + ".type", "expected zero | equilibrium | explicit | random");
        }
    }

    s.validate();
    return s;
}

double target_voltage(const Scenario& s, Index n, double t) { return reference_voltage(s.reference, n, t); }

RingState initial_state(const Scenario& s) {
    const Index m = s.size();
    switch (s.x0.kind) {
        case InitialState::Kind::Zero:
            return RingState(m);
        case InitialState::Kind::Explicit:
            return RingState(Eigen::Map<const Eigen::VectorXd>(s.x0.values.data(),
                                                                static_cast<Eigen::Index>(s.x0.values.size())));
        case InitialState::Kind::Equilibrium:
        case InitialState::Kind::Random: {
            RingState x = steady_state_for_voltages(s.params, reference_at_zero(s)).state();
            if (s.x0.kind == InitialState::Kind::Random) {
                std::mt19937_64 rng(s.x0.seed);
                std::uniform_real_distribution<double> dist(-s.x0.amplitude, s.x0.amplitude);
                for (Eigen::Index i = 0; i < x.vector().size(); ++i) x.vector()[i] += dist(rng);
            }
            return x;
        }
    }
    return RingState(m);
}

DutyLaw duty_law(const Scenario& s) {
    if (s.control == ControlMode::Pbc) return PassivityControl{s.damping, s.reference, s.voltage_mode};
    return OpenLoopReference{s.reference};
}

SimulationJob make_job(const Scenario& s) {
    s.validate();
    SimulationJob job;
    job.params = s.params;
    job.x0 = initial_state(s);
    job.law = duty_law(s);
    job.integrator = s.integrator;
    if (s.mode == SimMode::Switched) job.pwm = s.pwm;
    return job;
}

}  // namespace ringpbc
