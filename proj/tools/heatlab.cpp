#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "heatlab/checks.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/ode.hpp"
#include "heatlab/scenario.hpp"

namespace fs = std::filesystem;
using namespace heatlab;

namespace {

fs::path default_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("HEATLAB_OUT_DIR")) return env;
    return "out";
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// Scenario source: a JSON file path, or a registry name.
ScenarioSpec resolve_scenario(const std::string& source) {
    if (fs::exists(source)) {
        ConfigVariant config = load_config(source);
        if (std::holds_alternative<SweepSpec>(config)) {
            throw std::runtime_error(source + " is a sweep config; use the sweep subcommand");
        }
        return std::get<ScenarioSpec>(config);
    }
    std::optional<ScenarioSpec> found = find_scenario(source);
    if (!found) {
        throw std::runtime_error("no config file or registry scenario named '" + source + "'");
    }
    return *found;
}

int cmd_run(const std::string& source, const std::string& out_dir_flag,
            const std::string& format, int stride, std::optional<std::uint64_t> seed) {
    ScenarioSpec spec = resolve_scenario(source);
    if (stride >= 0) spec.stepper.record_stride = stride;
    if (seed) spec.seed = *seed;

    RunRecord record = run_scenario(spec);

    const fs::path out_dir = default_out_dir(out_dir_flag);
    fs::path trace_path = out_dir / (spec.name + "_trace." + (format == "json" ? "json" : "csv"));
    if (format == "json") {
        write_file(trace_path, trace_to_json(*record.trace, record.config_hash).dump(2) + "\n");
    } else {
        write_file(trace_path, trace_to_csv(*record.trace, record.config_hash));
    }
    record.trace_path = trace_path.string();
    const fs::path record_path = out_dir / (spec.name + "_record.json");
    write_file(record_path, record.to_json().dump(2) + "\n");

    std::cout << spec.name << ": " << terminal_name(record.terminal) << " at t = "
              << format_double(record.t_end);
    if (record.blowup) std::cout << ", t_est = " << format_double(record.blowup->t_est);
    std::cout << ", steps = " << record.steps_accepted << "\n";
    for (const auto& [id, report] : record.reports) {
        std::cout << "  " << id << ": ";
        if (report.contains("verdict")) {
            std::cout << report.at("verdict").get<std::string>();
        } else if (report.contains("cell")) {
            std::cout << report.at("cell").get<std::string>();
        } else if (report.contains("status")) {
            std::cout << report.at("status").get<std::string>();
        } else if (report.contains("holds")) {
            std::cout << (report.at("holds").get<bool>() ? "holds" : "fails");
        } else if (report.contains("error")) {
            std::cout << report.at("error").get<std::string>();
        }
        std::cout << "\n";
    }
    if (record.expected_mismatch) {
        std::cout << "  expected " << *spec.expected << ", got "
                  << terminal_name(record.terminal) << "\n";
    }
    if (record.counterexample_candidate) {
        std::cout << "  counterexample candidate flagged\n";
    }
    std::cout << "  trace: " << trace_path.string() << "\n  record: " << record_path.string()
              << "\n";
    return record.exit_status();
}

int cmd_sweep(const std::string& source, const std::string& out_dir_flag, int threads) {
    ConfigVariant config = load_config(source);
    if (!std::holds_alternative<SweepSpec>(config)) {
        throw std::runtime_error(source + " is a scenario config; use the run subcommand");
    }
    const SweepSpec& sweep = std::get<SweepSpec>(config);
    std::vector<SweepRow> rows = run_sweep(sweep, threads);

    const fs::path out_dir = default_out_dir(out_dir_flag);
    const fs::path csv_path = out_dir / (sweep.name + "_sweep.csv");
    write_file(csv_path, sweep_to_csv(sweep, rows));

    std::size_t failed = 0;
    for (const SweepRow& row : rows) {
        if (!row.error.empty()) ++failed;
    }
    std::cout << sweep.name << ": " << rows.size() << " runs, " << failed << " failed\n"
              << "  table: " << csv_path.string() << "\n";
    return failed == 0 ? 0 : 1;
}

int cmd_list(const std::string& scenario_dir) {
    for (const ScenarioSpec& s : scenario_registry()) {
        std::cout << s.name << " - " << s.description << "\n";
    }
    if (!scenario_dir.empty() && fs::is_directory(scenario_dir)) {
        for (const auto& entry : fs::directory_iterator(scenario_dir)) {
            if (entry.path().extension() != ".json") continue;
            try {
                ConfigVariant config = load_config(entry.path());
                if (std::holds_alternative<ScenarioSpec>(config)) {
                    const ScenarioSpec& s = std::get<ScenarioSpec>(config);
                    std::cout << s.name << " - "
                              << (s.description.empty() ? entry.path().string() : s.description)
                              << "\n";
                }
            } catch (const std::exception& err) {
                std::cerr << entry.path().string() << ": " << err.what() << "\n";
            }
        }
    }
    return 0;
}

int cmd_smooth_fit(double p, double q, int n, int nodes, double coeff, double t_min, double t_max,
                   int samples, bool no_guard) {
    Grid grid = n == 2 ? Grid(Domain::rectangle(1.0, 1.0), nodes, nodes)
                       : Grid(Domain::interval(1.0), nodes);
    Field spike = near_delta_field(grid, p);
    SmoothingFitOptions options;
    options.boundary_quiet_guard = !no_guard;
    SmoothingFit fit =
        fit_smoothing(p, q, spike, coeff, log_spaced_times(t_min, t_max, samples), options);
    std::cout << smoothing_to_json(fit).dump(2) << "\n";
    return 0;
}

int cmd_criterion(const std::string& expr_text, double lower, const std::string& form_name) {
    const CriterionForm form = form_name == "reciprocal" ? CriterionForm::one_over_f
                                                         : CriterionForm::one_over_one_plus_f;
    CriterionVerdict verdict = classify_criterion(parse_criterion_integrand(expr_text),
                                                  lower, form);
    nlohmann::json j;
    j["schema_version"] = 1;
    j["f"] = expr_text;
    j["lower"] = lower;
    j["form"] = form == CriterionForm::one_over_f ? "1/f" : "1/(1+f)";
    j["classification"] = criterion_name(verdict.classification);
    j["estimate"] = verdict.estimate;
    j["error_bound"] = verdict.error_bound;
    j["truncation"] = verdict.truncation;
    if (!verdict.reason.empty()) j["reason"] = verdict.reason;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatlab: semilinear heat / reaction-diffusion laboratory"};
    app.require_subcommand(1);
    app.fallthrough();  // --out-dir may follow the subcommand

    std::string out_dir;
    app.add_option("--out-dir", out_dir, "output directory (or HEATLAB_OUT_DIR, default ./out)");

    // run
    auto* run = app.add_subcommand("run", "run one scenario (config file or registry name)");
    std::string run_source;
    std::string run_format = "csv";
    int run_stride = -1;
    std::optional<std::uint64_t> run_seed;
    run->add_option("config", run_source, "config path or registry name")->required();
    run->add_option("--format", run_format, "trace format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--stride", run_stride, "space-time record stride (0 disables)");
    run->add_option("--seed", run_seed, "seed for random initial data");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    std::string sweep_source;
    int sweep_threads = 1;
    sweep->add_option("config", sweep_source, "sweep config path")->required();
    sweep->add_option("--threads", sweep_threads, "worker threads");

    // list
    auto* list = app.add_subcommand("list", "list registry scenarios");
    std::string scenario_dir;
    list->add_option("--scenario-dir", scenario_dir, "directory of extra scenario files");

    // smooth-fit
    auto* smooth = app.add_subcommand("smooth-fit", "fit the semigroup smoothing exponent");
    double sf_p = 1.0, sf_q = std::numeric_limits<double>::infinity();
    int sf_n = 1, sf_nodes = 2049, sf_samples = 16;
    double sf_coeff = 1.0, sf_tmin = 1e-5, sf_tmax = 1e-3;
    bool sf_no_guard = false;
    smooth->add_option("--p", sf_p, "source norm exponent")->required();
    smooth->add_option("--q", sf_q, "target norm exponent (inf by default)");
    smooth->add_option("--n", sf_n, "dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
    smooth->add_option("--nodes", sf_nodes, "nodes per axis");
    smooth->add_option("--coeff", sf_coeff, "diffusion coefficient");
    smooth->add_option("--t-min", sf_tmin, "first sample time");
    smooth->add_option("--t-max", sf_tmax, "last sample time");
    smooth->add_option("--samples", sf_samples, "number of log-spaced samples");
    smooth->add_flag("--no-guard", sf_no_guard, "disable the boundary-quiet window guard");

    // criterion
    auto* criterion = app.add_subcommand("criterion", "classify the integral blow-up criterion");
    std::string cr_expr;
    double cr_lower = 0.0;
    std::string cr_form = "bu";
    criterion->add_option("--f", cr_expr, "reaction f(s), nonnegative on [lower, inf)")
        ->required();
    criterion->add_option("--lower", cr_lower, "lower integration limit");
    criterion->add_option("--form", cr_form, "bu: 1/(1+f); reciprocal: 1/f")
        ->check(CLI::IsMember({"bu", "reciprocal"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_source, out_dir, run_format, run_stride, run_seed);
        if (*sweep) return cmd_sweep(sweep_source, out_dir, sweep_threads);
        if (*list) return cmd_list(scenario_dir);
        if (*smooth) {
            return cmd_smooth_fit(sf_p, sf_q, sf_n, sf_nodes, sf_coeff, sf_tmin, sf_tmax,
                                  sf_samples, sf_no_guard);
        }
        if (*criterion) return cmd_criterion(cr_expr, cr_lower, cr_form);
    } catch (const config_error& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
