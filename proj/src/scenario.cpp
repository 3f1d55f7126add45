#include "heatlab/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "heatlab/errors.hpp"
#include "heatlab/norms.hpp"

namespace heatlab {

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const std::string& path,
                                    const char* key) {
    if (!j.contains(key)) {
        throw config_error(path + "/" + key, "missing required field");
    }
    return j.at(key);
}

double require_number(const nlohmann::json& j, const std::string& path, const char* key) {
    const nlohmann::json& v = require_field(j, path, key);
    if (!v.is_number()) throw config_error(path + "/" + key, "expected a number");
    return v.get<double>();
}

double number_or(const nlohmann::json& j, const std::string& path, const char* key,
                 double fallback) {
    if (!j.contains(key)) return fallback;
    const nlohmann::json& v = j.at(key);
    if (!v.is_number()) throw config_error(path + "/" + key, "expected a number");
    return v.get<double>();
}

std::string require_string(const nlohmann::json& j, const std::string& path, const char* key) {
    const nlohmann::json& v = require_field(j, path, key);
    if (!v.is_string()) throw config_error(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

ExprPtr parse_at(const std::string& text, const std::string& path) {
    try {
        return parse_expr(text);
    } catch (const parse_error& err) {
        throw config_error(path, err.what());
    }
}

void validate_initial_expr(const std::string& text, const std::string& path) {
    ExprPtr e = parse_at(text, path);
    for (Var v : variables_of(e)) {
        if (v != Var::x && v != Var::y) {
            throw config_error(path, std::string("initial data may reference x and y only, "
                                                 "found '") +
                                         var_name(v) + "'");
        }
    }
}

InitialSpec initial_from_json(const nlohmann::json& v, const std::string& path) {
    InitialSpec spec;
    if (v.is_number()) {
        spec.text = format_double(v.get<double>());
    } else if (v.is_string()) {
        spec.text = v.get<std::string>();
    } else if (v.is_object() && v.contains("random")) {
        const nlohmann::json& r = v.at("random");
        spec.kind = InitialSpec::Kind::random_positive;
        spec.random_min = number_or(r, path + "/random", "min", 0.5);
        spec.random_max = number_or(r, path + "/random", "max", 1.5);
        if (!(spec.random_min > 0.0) || !(spec.random_max > spec.random_min)) {
            throw config_error(path + "/random", "need 0 < min < max for random initial data");
        }
        return spec;
    } else {
        throw config_error(path, "expected an expression string, a number, or {\"random\": ...}");
    }
    validate_initial_expr(spec.text, path);
    return spec;
}

nlohmann::json initial_to_json(const InitialSpec& spec) {
    if (spec.kind == InitialSpec::Kind::random_positive) {
        return nlohmann::json{{"random", {{"min", spec.random_min}, {"max", spec.random_max}}}};
    }
    return spec.text;
}

const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> ids{
        "sign",          "positivity",        "mass_control",
        "strict_mass_control", "gronwall",    "max_principle_sub",
        "max_principle_super", "lemma1",      "theorem",
    };
    return ids;
}

}  // namespace

ReactionSpec ScenarioSpec::reaction() const {
    if (builtin_name) {
        return builtin_reaction(*builtin_name, builtin_params);
    }
    if (g_text) return system_reaction(*f_text, *g_text);
    return scalar_reaction(*f_text);
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("/", "scenario config must be a JSON object");
    ScenarioSpec spec;
    spec.name = require_string(j, "", "name");
    if (j.contains("description")) spec.description = j.at("description").get<std::string>();

    const nlohmann::json& problem = require_field(j, "", "problem");
    const std::string ppath = "/problem";

    // domain
    const nlohmann::json& domain = require_field(problem, ppath, "domain");
    spec.dim = static_cast<int>(number_or(domain, ppath + "/domain", "dim", 1));
    if (spec.dim != 1 && spec.dim != 2) {
        throw config_error(ppath + "/domain/dim", "dim must be 1 or 2");
    }
    const nlohmann::json& lengths = require_field(domain, ppath + "/domain", "lengths");
    if (!lengths.is_array() || lengths.size() != static_cast<std::size_t>(spec.dim)) {
        throw config_error(ppath + "/domain/lengths", "expected one length per axis");
    }
    spec.lengths.clear();
    for (const auto& v : lengths) spec.lengths.push_back(v.get<double>());
    const std::string btext =
        domain.contains("boundary") ? domain.at("boundary").get<std::string>() : "neumann";
    if (btext == "neumann") {
        spec.boundary = BoundaryKind::neumann;
    } else if (btext == "dirichlet") {
        spec.boundary = BoundaryKind::dirichlet;
    } else if (btext == "robin") {
        spec.boundary = BoundaryKind::robin;
        spec.robin_alpha = require_number(domain, ppath + "/domain", "alpha");
        spec.robin_beta = require_number(domain, ppath + "/domain", "beta");
    } else {
        throw config_error(ppath + "/domain/boundary",
                           "boundary must be neumann, dirichlet, or robin");
    }

    const nlohmann::json& nodes = require_field(problem, ppath, "nodes");
    if (!nodes.is_array() || nodes.size() != static_cast<std::size_t>(spec.dim)) {
        throw config_error(ppath + "/nodes", "expected one node count per axis");
    }
    spec.nodes.clear();
    for (const auto& v : nodes) spec.nodes.push_back(v.get<int>());

    spec.a = require_number(problem, ppath, "a");

    // reaction
    const nlohmann::json& reaction = require_field(problem, ppath, "reaction");
    const std::string rpath = ppath + "/reaction";
    if (reaction.contains("builtin")) {
        spec.builtin_name = reaction.at("builtin").get<std::string>();
        if (reaction.contains("params")) {
            for (auto it = reaction.at("params").begin(); it != reaction.at("params").end();
                 ++it) {
                spec.builtin_params[it.key()] = it.value().get<double>();
            }
        }
        try {
            builtin_reaction(*spec.builtin_name, spec.builtin_params);
        } catch (const std::invalid_argument& err) {
            throw config_error(rpath, err.what());
        }
    } else {
        spec.f_text = require_string(reaction, rpath, "f");
        parse_at(*spec.f_text, rpath + "/f");
        if (reaction.contains("g")) {
            spec.g_text = reaction.at("g").get<std::string>();
            parse_at(*spec.g_text, rpath + "/g");
        }
        try {
            spec.reaction();
        } catch (const std::invalid_argument& err) {
            throw config_error(rpath, err.what());
        }
    }

    const bool system = spec.reaction().is_system();
    if (system) {
        spec.b = require_number(problem, ppath, "b");
    } else if (problem.contains("b")) {
        throw config_error(ppath + "/b", "b is only meaningful for system pairs");
    }

    // initial data
    const nlohmann::json& initial = require_field(problem, ppath, "initial");
    spec.u0 = initial_from_json(require_field(initial, ppath + "/initial", "u"),
                                ppath + "/initial/u");
    if (system) {
        spec.v0 = initial_from_json(require_field(initial, ppath + "/initial", "v"),
                                    ppath + "/initial/v");
    } else if (initial.contains("v")) {
        throw config_error(ppath + "/initial/v", "scalar problems take no v component");
    }

    spec.horizon = require_number(problem, ppath, "horizon");

    // stepper overrides
    if (j.contains("stepper")) {
        const nlohmann::json& s = j.at("stepper");
        const std::string spath = "/stepper";
        spec.stepper.dt_init = number_or(s, spath, "dt_init", spec.stepper.dt_init);
        spec.stepper.dt_min = number_or(s, spath, "dt_min", spec.stepper.dt_min);
        spec.stepper.dt_max = number_or(s, spath, "dt_max", spec.stepper.dt_max);
        spec.stepper.error_tol = number_or(s, spath, "error_tol", spec.stepper.error_tol);
        spec.stepper.blowup_threshold =
            number_or(s, spath, "blowup_threshold", spec.stepper.blowup_threshold);
        spec.stepper.theta = number_or(s, spath, "theta", spec.stepper.theta);
        spec.stepper.record_stride = static_cast<int>(
            number_or(s, spath, "record_stride", spec.stepper.record_stride));
        if (s.contains("extra_norm_ps")) {
            spec.stepper.extra_norm_ps.clear();
            for (const auto& v : s.at("extra_norm_ps")) {
                spec.stepper.extra_norm_ps.push_back(v.get<double>());
            }
        }
        try {
            spec.stepper.validate();
        } catch (const std::invalid_argument& err) {
            throw config_error(spath, err.what());
        }
    }

    if (j.contains("checks")) {
        for (std::size_t k = 0; k < j.at("checks").size(); ++k) {
            const std::string id = j.at("checks").at(k).get<std::string>();
            bool known = false;
            for (const std::string& c : known_checks()) known = known || c == id;
            if (!known) {
                throw config_error("/checks/" + std::to_string(k), "unknown check id '" + id + "'");
            }
            spec.checks.push_back(id);
        }
    }

    if (j.contains("check_params")) {
        const nlohmann::json& cp = j.at("check_params");
        const std::string cpath = "/check_params";
        spec.mass_control_c = number_or(cp, cpath, "mass_control_C", spec.mass_control_c);
        spec.gronwall_c = number_or(cp, cpath, "gronwall_C", spec.gronwall_c);
        if (cp.contains("lemma1_level")) {
            spec.lemma1_level = cp.at("lemma1_level").get<double>();
        }
        spec.lemma1_zero_tol = number_or(cp, cpath, "lemma1_zero_tol", spec.lemma1_zero_tol);
        if (cp.contains("l1_cap")) spec.l1_cap = cp.at("l1_cap").get<double>();
    }

    if (j.contains("expect")) {
        const std::string e = j.at("expect").get<std::string>();
        if (e != "completed" && e != "blowup") {
            throw config_error("/expect", "expect must be 'completed' or 'blowup'");
        }
        spec.expected = e;
    }
    if (j.contains("require_positive_initial")) {
        spec.require_positive_initial = j.at("require_positive_initial").get<bool>();
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();

    return spec;
}

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["name"] = spec.name;
    if (!spec.description.empty()) j["description"] = spec.description;

    nlohmann::json domain;
    domain["dim"] = spec.dim;
    domain["lengths"] = spec.lengths;
    domain["boundary"] = boundary_name(spec.boundary);
    if (spec.boundary == BoundaryKind::robin) {
        domain["alpha"] = spec.robin_alpha;
        domain["beta"] = spec.robin_beta;
    }

    nlohmann::json problem;
    problem["domain"] = domain;
    problem["nodes"] = spec.nodes;
    problem["a"] = spec.a;
    if (spec.b) problem["b"] = *spec.b;

    nlohmann::json reaction;
    if (spec.builtin_name) {
        reaction["builtin"] = *spec.builtin_name;
        if (!spec.builtin_params.empty()) reaction["params"] = spec.builtin_params;
    } else {
        reaction["f"] = *spec.f_text;
        if (spec.g_text) reaction["g"] = *spec.g_text;
    }
    problem["reaction"] = reaction;

    nlohmann::json initial;
    initial["u"] = initial_to_json(spec.u0);
    if (spec.v0) initial["v"] = initial_to_json(*spec.v0);
    problem["initial"] = initial;
    problem["horizon"] = spec.horizon;
    j["problem"] = problem;

    nlohmann::json stepper;
    stepper["dt_init"] = spec.stepper.dt_init;
    stepper["dt_min"] = spec.stepper.dt_min;
    stepper["dt_max"] = spec.stepper.dt_max;
    stepper["error_tol"] = spec.stepper.error_tol;
    stepper["blowup_threshold"] = spec.stepper.blowup_threshold;
    stepper["theta"] = spec.stepper.theta;
    stepper["record_stride"] = spec.stepper.record_stride;
    if (!spec.stepper.extra_norm_ps.empty()) stepper["extra_norm_ps"] = spec.stepper.extra_norm_ps;
    j["stepper"] = stepper;

    j["checks"] = spec.checks;
    nlohmann::json cp;
    cp["mass_control_C"] = spec.mass_control_c;
    cp["gronwall_C"] = spec.gronwall_c;
    if (spec.lemma1_level) cp["lemma1_level"] = *spec.lemma1_level;
    cp["lemma1_zero_tol"] = spec.lemma1_zero_tol;
    if (spec.l1_cap) cp["l1_cap"] = *spec.l1_cap;
    j["check_params"] = cp;

    if (spec.expected) j["expect"] = *spec.expected;
    j["require_positive_initial"] = spec.require_positive_initial;
    j["seed"] = spec.seed;
    return j;
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
    SweepSpec sweep;
    sweep.name = require_string(j, "", "name");
    const nlohmann::json& base = require_field(j, "", "base");
    if (base.is_string()) {
        std::optional<ScenarioSpec> found = find_scenario(base.get<std::string>());
        if (!found) {
            throw config_error("/base", "unknown registry scenario '" +
                                            base.get<std::string>() + "'");
        }
        sweep.base = scenario_to_json(*found);
    } else if (base.is_object()) {
        sweep.base = scenario_to_json(scenario_from_json(base));
    } else {
        throw config_error("/base", "base must be a registry name or an inline scenario");
    }

    const nlohmann::json& axes = require_field(j, "", "axes");
    if (!axes.is_array()) throw config_error("/axes", "expected an array of axes");
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const std::string apath = "/axes/" + std::to_string(k);
        const nlohmann::json& axis = axes.at(k);
        SweepAxis out;
        out.pointer = require_string(axis, apath, "param");
        const nlohmann::json& values = require_field(axis, apath, "values");
        if (!values.is_array() || values.empty()) {
            throw config_error(apath + "/values", "expected a non-empty array");
        }
        for (const auto& v : values) out.values.push_back(v);
        try {
            if (!sweep.base.contains(nlohmann::json::json_pointer(out.pointer))) {
                throw config_error(apath + "/param",
                                   "pointer '" + out.pointer + "' not found in base scenario");
            }
        } catch (const nlohmann::json::exception&) {
            throw config_error(apath + "/param", "invalid JSON pointer '" + out.pointer + "'");
        }
        sweep.axes.push_back(std::move(out));
    }
    return sweep;
}

ConfigVariant load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw config_error("/", "cannot open config file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& err) {
        throw config_error("/", std::string("invalid JSON: ") + err.what());
    }
    if (j.contains("axes")) return sweep_from_json(j);
    return scenario_from_json(j);
}

std::string config_hash_of(const nlohmann::json& resolved) {
    const std::string dump = resolved.dump();
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

namespace {

Field build_initial(const InitialSpec& init, const Grid& grid, std::uint64_t seed,
                    const std::string& path) {
    Field f(grid, 0.0);
    if (init.kind == InitialSpec::Kind::random_positive) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(init.random_min, init.random_max);
        for (double& v : f.values) v = dist(rng);
        return f;
    }
    ExprPtr expr = parse_at(init.text, path);
    Bindings b;
    for (int j = 0; j < grid.ny(); ++j) {
        if (grid.domain.dim == 2) b.y = grid.y(j);
        for (int i = 0; i < grid.nx(); ++i) {
            b.x = grid.x(i);
            f.values[grid.index(i, j)] = eval(expr, b);
        }
    }
    return f;
}

}  // namespace

Problem build_problem(const ScenarioSpec& spec) {
    Domain domain;
    domain.dim = spec.dim;
    domain.boundary = spec.boundary;
    domain.robin_alpha = spec.robin_alpha;
    domain.robin_beta = spec.robin_beta;
    domain.lengths = {spec.lengths[0], spec.dim == 2 ? spec.lengths[1] : 1.0};
    domain.validate();

    Grid grid = spec.dim == 2 ? Grid(domain, spec.nodes[0], spec.nodes[1])
                              : Grid(domain, spec.nodes[0]);

    Problem problem;
    problem.grid = grid;
    problem.a = spec.a;
    if (spec.b) problem.b = *spec.b;
    problem.reaction = spec.reaction();
    problem.horizon = spec.horizon;
    problem.u0 = build_initial(spec.u0, grid, spec.seed, "/problem/initial/u");
    if (spec.v0) {
        // Independent stream for the second component.
        problem.v0 = build_initial(*spec.v0, grid, spec.seed ^ 0x9e3779b97f4a7c15ull,
                                   "/problem/initial/v");
    }

    if (spec.require_positive_initial) {
        if (min_value(problem.u0) <= 0.0) {
            throw config_error("/problem/initial/u",
                               "initial data must be strictly positive (set "
                               "require_positive_initial: false to override)");
        }
        if (problem.v0 && min_value(*problem.v0) < 0.0) {
            throw config_error("/problem/initial/v", "initial data must be nonnegative");
        }
    }
    return problem;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

int RunRecord::exit_status() const {
    if (counterexample_candidate) return 3;
    if (expected_mismatch) return 2;
    return 0;
}

nlohmann::json RunRecord::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["scenario"] = scenario;
    j["config_hash"] = config_hash;
    j["config"] = resolved_config;

    nlohmann::json result;
    result["terminal"] = terminal_name(terminal);
    result["t_end"] = t_end;
    if (blowup) {
        result["t_est"] = blowup->t_est;
        result["beta"] = blowup->beta;
        result["component"] = blowup->component == 0 ? "u" : "v";
        result["trigger"] = blowup->trigger == BlowupEvent::Trigger::threshold
                                ? "threshold"
                                : "dt_collapse";
    }
    result["steps_accepted"] = steps_accepted;
    result["steps_rejected"] = steps_rejected;
    result["wall_time_s"] = wall_time_s;
    j["result"] = result;

    nlohmann::json norms;
    norms["max_linf_u"] = max_linf_u;
    norms["max_l1_u"] = max_l1_u;
    norms["min_u"] = min_u;
    if (max_linf_v) norms["max_linf_v"] = *max_linf_v;
    if (max_l1_v) norms["max_l1_v"] = *max_l1_v;
    if (min_v) norms["min_v"] = *min_v;
    j["norms"] = norms;

    if (trace && !trace->undershoots.empty()) {
        nlohmann::json events = nlohmann::json::array();
        for (const UndershootEvent& e : trace->undershoots) {
            events.push_back({{"time", e.time},
                              {"component", e.component == 0 ? "u" : "v"},
                              {"min_value", e.min_value}});
        }
        j["undershoots"] = events;
    }

    nlohmann::json reports_json = nlohmann::json::object();
    for (const auto& [id, report] : reports) reports_json[id] = report;
    j["reports"] = reports_json;
    if (theorem) j["theorem"] = theorem_to_json(*theorem);
    j["counterexample_candidate"] = counterexample_candidate;
    j["expected_mismatch"] = expected_mismatch;
    if (!trace_path.empty()) j["trace_path"] = trace_path;
    j["exit_status"] = exit_status();
    return j;
}

RunRecord run_scenario(const ScenarioSpec& spec) {
    const auto wall_start = std::chrono::steady_clock::now();

    RunRecord record;
    record.scenario = spec.name;
    record.resolved_config = scenario_to_json(spec);
    record.config_hash = config_hash_of(record.resolved_config);

    Problem problem = build_problem(spec);
    SimResult sim;
    try {
        sim = simulate(problem, spec.stepper);
    } catch (const std::exception& err) {
        throw std::runtime_error("scenario '" + spec.name + "': " + err.what());
    }

    record.terminal = sim.terminal;
    record.t_end = sim.t_end;
    record.blowup = sim.blowup;
    record.steps_accepted = sim.steps_accepted;
    record.steps_rejected = sim.steps_rejected;
    record.trace = sim.trace;
    record.record = sim.record;

    record.min_u = std::numeric_limits<double>::infinity();
    if (sim.trace->system) {
        record.max_linf_v = 0.0;
        record.max_l1_v = 0.0;
        record.min_v = std::numeric_limits<double>::infinity();
    }
    for (const TraceSample& s : sim.trace->samples) {
        record.max_linf_u = std::max(record.max_linf_u, s.u.linf);
        record.max_l1_u = std::max(record.max_l1_u, s.u.l1);
        record.min_u = std::min(record.min_u, s.u.min);
        if (s.v) {
            record.max_linf_v = std::max(*record.max_linf_v, s.v->linf);
            record.max_l1_v = std::max(*record.max_l1_v, s.v->l1);
            record.min_v = std::min(*record.min_v, s.v->min);
        }
    }

    // Requested checks, in order. The theorem probe pulls in the reports it
    // needs whether or not they were listed separately.
    const ReactionSpec reaction = spec.reaction();
    std::optional<HypothesisReport> sign_report;
    std::optional<HypothesisReport> positivity_report;
    std::optional<HypothesisReport> mass_report;

    auto get_sign = [&]() -> const HypothesisReport& {
        if (!sign_report) sign_report = check_sign_condition(*sim.trace);
        return *sign_report;
    };
    auto get_positivity = [&]() -> const HypothesisReport& {
        if (!positivity_report) positivity_report = check_positivity_condition(reaction);
        return *positivity_report;
    };
    auto get_mass = [&]() -> const HypothesisReport& {
        if (!mass_report) mass_report = check_mass_control(reaction, spec.mass_control_c);
        return *mass_report;
    };

    for (const std::string& id : spec.checks) {
        try {
            if (id == "sign") {
                record.reports.emplace_back(id, report_to_json(get_sign()));
            } else if (id == "positivity") {
                record.reports.emplace_back(id, report_to_json(get_positivity()));
            } else if (id == "mass_control") {
                record.reports.emplace_back(id, report_to_json(get_mass()));
            } else if (id == "strict_mass_control") {
                record.reports.emplace_back(id,
                                            report_to_json(check_strict_mass_control(reaction)));
            } else if (id == "gronwall") {
                record.reports.emplace_back(
                    id, gronwall_to_json(gronwall_ledger(*sim.trace, spec.gronwall_c)));
            } else if (id == "max_principle_sub" || id == "max_principle_super") {
                if (!sim.record) throw std::runtime_error("space-time record disabled");
                const PrincipleDirection dir = id == "max_principle_sub"
                                                   ? PrincipleDirection::sub
                                                   : PrincipleDirection::super;
                record.reports.emplace_back(
                    id, max_principle_to_json(max_principle_oracle(*sim.record, dir)));
            } else if (id == "lemma1") {
                if (!sim.record) throw std::runtime_error("space-time record disabled");
                double level;
                if (spec.lemma1_level) {
                    level = *spec.lemma1_level;
                } else {
                    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
                    for (const TraceSample& s : sim.trace->samples) {
                        lo = std::min(lo, s.u.linf);
                        hi = std::max(hi, s.u.linf);
                    }
                    level = 0.5 * (lo + hi);
                }
                record.reports.emplace_back(
                    id, lemma1_to_json(lemma1_probe(*sim.record, reaction, level,
                                                    spec.lemma1_zero_tol)));
            } else if (id == "theorem") {
                TheoremProbeInputs inputs;
                inputs.terminal = sim.terminal;
                inputs.sign = get_sign();
                inputs.positivity = get_positivity();
                if (reaction.is_system()) inputs.mass_control = get_mass();
                inputs.l1_cap = spec.l1_cap;
                TheoremProbe probe = theorem_probe(*sim.trace, inputs);
                record.theorem = probe;
                record.counterexample_candidate =
                    record.counterexample_candidate || probe.counterexample_candidate;
                record.reports.emplace_back(id, theorem_to_json(probe));
            } else {
                throw std::runtime_error("unknown check id '" + id + "'");
            }
        } catch (const std::exception& err) {
            nlohmann::json failure;
            failure["error"] = std::string("check failed: ") + err.what();
            record.reports.emplace_back(id, failure);
        }
    }

    if (spec.expected) {
        const bool matches = (*spec.expected == "completed" &&
                              record.terminal == TerminalKind::completed) ||
                             (*spec.expected == "blowup" &&
                              record.terminal == TerminalKind::blowup);
        record.expected_mismatch = !matches;
    }

    record.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return record;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

std::vector<SweepRow> run_sweep(const SweepSpec& sweep, int threads) {
    std::vector<std::vector<nlohmann::json>> combos;
    std::vector<nlohmann::json> current;
    // Cartesian product, first axis slowest.
    std::function<void(std::size_t)> expand = [&](std::size_t axis) {
        if (axis == sweep.axes.size()) {
            combos.push_back(current);
            return;
        }
        for (const nlohmann::json& v : sweep.axes[axis].values) {
            current.push_back(v);
            expand(axis + 1);
            current.pop_back();
        }
    };
    expand(0);

    std::vector<SweepRow> rows(combos.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= combos.size()) return;
            SweepRow& row = rows[k];
            row.values = combos[k];
            try {
                nlohmann::json patched = sweep.base;
                for (std::size_t axis = 0; axis < sweep.axes.size(); ++axis) {
                    patched[nlohmann::json::json_pointer(sweep.axes[axis].pointer)] =
                        combos[k][axis];
                }
                patched["name"] = sweep.name + "_" + std::to_string(k);
                row.record = run_scenario(scenario_from_json(patched));
            } catch (const std::exception& err) {
                row.error = err.what();
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(combos.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return rows;
}

namespace {

std::string axis_column_name(const std::string& pointer) {
    std::string name = pointer;
    if (!name.empty() && name.front() == '/') name.erase(0, 1);
    for (char& c : name) {
        if (c == '/') c = '.';
    }
    return name;
}

std::string json_scalar_to_csv(const nlohmann::json& v) {
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

std::string sweep_to_csv(const SweepSpec& sweep, const std::vector<SweepRow>& rows) {
    std::string out;
    out += "# schema_version=1\n";
    out += "# sweep=" + sweep.name + "\n";
    for (const SweepAxis& axis : sweep.axes) {
        out += axis_column_name(axis.pointer) + ",";
    }
    out += "terminal,t_est,max_linf_u,max_linf_v,max_l1_u,max_l1_v,theorem_cell,error\n";
    for (const SweepRow& row : rows) {
        for (const nlohmann::json& v : row.values) out += json_scalar_to_csv(v) + ",";
        if (row.record) {
            const RunRecord& r = *row.record;
            out += terminal_name(r.terminal);
            out += ",";
            out += r.blowup ? format_double(r.blowup->t_est) : "";
            out += "," + format_double(r.max_linf_u);
            out += "," + (r.max_linf_v ? format_double(*r.max_linf_v) : "");
            out += "," + format_double(r.max_l1_u);
            out += "," + (r.max_l1_v ? format_double(*r.max_l1_v) : "");
            out += ",";
            out += r.theorem ? theorem_cell_name(*r.theorem) : "";
            out += ",";
        } else {
            out += ",,,,,,,\"" + row.error + "\"";
        }
        out += "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

ScenarioSpec make_power_scenario() {
    ScenarioSpec s;
    s.name = "power";
    s.description = "scalar f = u^p, u0 = 1: global for p <= 1, blow-up at 1/(p-1) for p > 1";
    s.builtin_name = "power";
    s.builtin_params["p"] = 2.0;
    s.u0.text = "1";
    s.horizon = 3.0;
    s.stepper.blowup_threshold = 1e4;
    s.checks = {"sign", "positivity", "theorem"};
    s.expected = "blowup";
    return s;
}

ScenarioSpec make_frank_kamenetskii_scenario() {
    ScenarioSpec s;
    s.name = "frank_kamenetskii";
    s.description =
        "exponential pair -u*exp(v), u*exp(v) with a=2, b=1, u0=1 under the 8ab/(a-b)^2 cap";
    s.builtin_name = "frank_kamenetskii";
    s.a = 2.0;
    s.b = 1.0;
    s.u0.text = "1";
    s.v0 = InitialSpec{};
    s.v0->text = "0.1";
    s.horizon = 5.0;
    s.checks = {"sign", "positivity", "mass_control", "strict_mass_control", "gronwall",
                "theorem"};
    s.expected = "completed";
    return s;
}

ScenarioSpec make_haraux_youkana_scenario() {
    ScenarioSpec s;
    s.name = "haraux_youkana";
    s.description = "sub-exponential pair -u*exp(v^gamma), u*exp(v^gamma), gamma = 0.5";
    s.builtin_name = "haraux_youkana";
    s.builtin_params["gamma"] = 0.5;
    s.a = 2.0;
    s.b = 1.0;
    s.u0.text = "1";
    s.v0 = InitialSpec{};
    s.v0->text = "0.5";
    s.horizon = 5.0;
    s.checks = {"sign", "positivity", "mass_control", "strict_mass_control", "gronwall",
                "theorem"};
    s.expected = "completed";
    return s;
}

ScenarioSpec make_robin_lambda_scenario() {
    ScenarioSpec s;
    s.name = "robin_lambda";
    s.description = "ignition reaction lambda*exp(u) under the robin boundary alpha=beta=1";
    s.boundary = BoundaryKind::robin;
    s.robin_alpha = 1.0;
    s.robin_beta = 1.0;
    s.builtin_name = "robin_lambda";
    s.builtin_params["lambda"] = 0.1;
    s.u0.text = "0.5";
    s.horizon = 2.0;
    s.checks = {"sign", "positivity", "theorem"};
    s.expected = "completed";
    return s;
}

ScenarioSpec make_mass_control_pair_scenario() {
    ScenarioSpec s;
    s.name = "mass_control_pair";
    s.description = "pair -u*v, u*v: strict mass control with equality, signs recorded";
    s.f_text = "-u*v";
    s.g_text = "u*v";
    s.b = 1.0;
    s.u0.text = "1";
    s.v0 = InitialSpec{};
    s.v0->text = "1";
    s.horizon = 3.0;
    s.checks = {"sign", "positivity", "mass_control", "strict_mass_control", "gronwall",
                "theorem"};
    s.expected = "completed";
    return s;
}

ScenarioSpec make_decaying_positive_scenario() {
    ScenarioSpec s;
    s.name = "decaying_positive";
    s.description = "scalar f = exp(-t)*u: positive reaction with integrable growth, u <= e";
    s.f_text = "exp(-t)*u";
    s.u0.text = "1";
    s.horizon = 20.0;
    // The left-endpoint reaction overshoots the closed form exp(1 - e^-t) by
    // O(sqrt(error_tol)); 1e-8 keeps the peak within 1e-4 of e.
    s.stepper.error_tol = 1e-8;
    s.checks = {"sign", "positivity", "theorem"};
    s.expected = "completed";
    return s;
}

}  // namespace

const std::vector<ScenarioSpec>& scenario_registry() {
    static const std::vector<ScenarioSpec> registry = {
        make_power_scenario(),          make_frank_kamenetskii_scenario(),
        make_haraux_youkana_scenario(), make_robin_lambda_scenario(),
        make_mass_control_pair_scenario(), make_decaying_positive_scenario(),
    };
    return registry;
}

std::optional<ScenarioSpec> find_scenario(const std::string& name) {
    for (const ScenarioSpec& s : scenario_registry()) {
        if (s.name == name) return s;
    }
    return std::nullopt;
}

nlohmann::json trace_to_json(const Trace& trace, const std::string& config_hash) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["config_hash"] = config_hash;
    nlohmann::json rows = nlohmann::json::array();
    for (const TraceSample& s : trace.samples) {
        nlohmann::json row;
        row["t"] = s.time;
        row["dt"] = s.dt;
        row["l1_u"] = s.u.l1;
        row["linf_u"] = s.u.linf;
        row["min_u"] = s.u.min;
        row["mass_u"] = s.u.mass;
        if (s.v) {
            row["l1_v"] = s.v->l1;
            row["linf_v"] = s.v->linf;
            row["min_v"] = s.v->min;
            row["mass_v"] = s.v->mass;
        }
        row["f_min"] = s.f.min;
        row["f_max"] = s.f.max;
        row["f_sign"] = sign_summary_name(s.f.sign);
        if (s.g) {
            row["g_min"] = s.g->min;
            row["g_max"] = s.g->max;
            row["g_sign"] = sign_summary_name(s.g->sign);
        }
        if (!trace.extra_norm_ps.empty()) {
            nlohmann::json extras = nlohmann::json::object();
            for (std::size_t k = 0; k < trace.extra_norm_ps.size(); ++k) {
                extras["l" + format_double(trace.extra_norm_ps[k]) + "_u"] = s.u.extra_norms[k];
                if (s.v) {
                    extras["l" + format_double(trace.extra_norm_ps[k]) + "_v"] =
                        s.v->extra_norms[k];
                }
            }
            row["extra_norms"] = extras;
        }
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

}  // namespace heatlab
