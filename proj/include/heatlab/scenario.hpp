#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "heatlab/checks.hpp"
#include "heatlab/stepper.hpp"

namespace heatlab {

// Declarative description of one experiment: domain, grid, diffusion,
// reaction, initial data, horizon, stepper overrides, and the diagnostics to
// run. Loaded from JSON (schema documented in docs/config_schema.md) or taken
// from the built-in registry.

struct InitialSpec {
    enum class Kind { expression, random_positive };
    Kind kind = Kind::expression;
    std::string text = "1";  // expression in x[,y]
    double random_min = 0.5;
    double random_max = 1.5;
};

struct ScenarioSpec {
    std::string name;
    std::string description;

    int dim = 1;
    std::vector<double> lengths{1.0};
    BoundaryKind boundary = BoundaryKind::neumann;
    double robin_alpha = 0.0;
    double robin_beta = 0.0;
    std::vector<int> nodes{257};

    double a = 1.0;
    std::optional<double> b;

    std::optional<std::string> builtin_name;
    std::map<std::string, double> builtin_params;
    std::optional<std::string> f_text;
    std::optional<std::string> g_text;

    InitialSpec u0;
    std::optional<InitialSpec> v0;
    double horizon = 1.0;

    StepperConfig stepper;
    std::vector<std::string> checks;

    double mass_control_c = 1.0;
    double gronwall_c = 1.0;
    std::optional<double> lemma1_level;  // default: mid-range of the sup-norm trace
    double lemma1_zero_tol = 1e-6;
    std::optional<double> l1_cap;

    std::optional<std::string> expected;  // "completed" | "blowup"
    bool require_positive_initial = true;
    std::uint64_t seed = 0;

    ReactionSpec reaction() const;
};

struct SweepAxis {
    std::string pointer;  // JSON pointer into the resolved scenario config
    std::vector<nlohmann::json> values;
};

struct SweepSpec {
    std::string name;
    nlohmann::json base;  // resolved scenario config the axes patch
    std::vector<SweepAxis> axes;
};

using ConfigVariant = std::variant<ScenarioSpec, SweepSpec>;

// Throws config_error with a JSON-pointer path on schema violations and
// carries expression parse offsets through in the message.
ConfigVariant load_config(const std::filesystem::path& path);
ScenarioSpec scenario_from_json(const nlohmann::json& j);
SweepSpec sweep_from_json(const nlohmann::json& j);

// Fully resolved config with every default filled in; hashing and re-loading
// this JSON reproduces the run.
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

// FNV-1a 64-bit hash of the canonical (sorted-key) JSON dump, as hex.
std::string config_hash_of(const nlohmann::json& resolved);

// Builds the grid, reaction, and initial fields (seeded RNG for random data);
// validates initial positivity when the scenario requires it.
Problem build_problem(const ScenarioSpec& spec);

struct RunRecord {
    std::string scenario;
    std::string config_hash;
    nlohmann::json resolved_config;

    TerminalKind terminal = TerminalKind::completed;
    double t_end = 0.0;
    std::optional<BlowupEvent> blowup;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    double wall_time_s = 0.0;

    double max_linf_u = 0.0;
    double max_l1_u = 0.0;
    double min_u = 0.0;
    std::optional<double> max_linf_v;
    std::optional<double> max_l1_v;
    std::optional<double> min_v;

    // check id -> serialized report, in the order the scenario listed them
    std::vector<std::pair<std::string, nlohmann::json>> reports;
    std::optional<TheoremProbe> theorem;
    bool counterexample_candidate = false;
    bool expected_mismatch = false;

    std::string trace_path;  // filled by the CLI after writing the trace
    std::shared_ptr<const Trace> trace;
    std::shared_ptr<const SpaceTimeRecord> record;

    nlohmann::json to_json() const;
    // 0 normal, 2 expected-outcome mismatch, 3 counterexample candidate.
    int exit_status() const;
};

RunRecord run_scenario(const ScenarioSpec& spec);

struct SweepRow {
    std::vector<nlohmann::json> values;  // one per axis
    std::optional<RunRecord> record;
    std::string error;  // non-empty when the run failed
};

// Cartesian product of the axes, first axis slowest; rows come back in
// parameter order regardless of which worker finished first.
std::vector<SweepRow> run_sweep(const SweepSpec& sweep, int threads = 1);
std::string sweep_to_csv(const SweepSpec& sweep, const std::vector<SweepRow>& rows);

const std::vector<ScenarioSpec>& scenario_registry();
std::optional<ScenarioSpec> find_scenario(const std::string& name);

// Trace rendered as JSON (same content as the pinned CSV layout).
nlohmann::json trace_to_json(const Trace& trace, const std::string& config_hash);

}  // namespace heatlab
