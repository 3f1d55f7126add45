// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line per criterion. Exit status is the number of failures.

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "heatlab/checks.hpp"
#include "heatlab/norms.hpp"
#include "heatlab/ode.hpp"
#include "heatlab/scenario.hpp"
#include "heatlab/spectral.hpp"
#include "heatlab/stepper.hpp"

using namespace heatlab;

namespace {

const double kPi = std::acos(-1.0);
const double kInf = std::numeric_limits<double>::infinity();
int failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %2d. %s  [%s]\n", ok ? "PASS" : "FAIL", index, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <typename Fn>
void criterion(int index, const char* name, Fn&& fn) {
    try {
        auto [ok, detail] = fn();
        report(index, name, ok, detail);
    } catch (const std::exception& err) {
        report(index, name, false, std::string("exception: ") + err.what());
    }
}

Problem scalar_problem(int nodes, const std::string& reaction, double u0_const, double horizon) {
    Problem p;
    p.grid = Grid(Domain::interval(1.0), nodes);
    p.reaction = scalar_reaction(reaction);
    p.u0 = Field(p.grid, u0_const);
    p.horizon = horizon;
    return p;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return std::string(buf);
}

// 1. Smoothing exponent of the heat semigroup.
std::pair<bool, std::string> smoothing_exponent() {
    Grid g(Domain::interval(1.0), 2049);
    const std::vector<double> ts = log_spaced_times(1e-5, 1e-3, 16);

    SmoothingFit l1 = fit_smoothing(1.0, kInf, near_delta_field(g, 1.0), 1.0, ts);
    SmoothingFit l2 = fit_smoothing(2.0, kInf, near_delta_field(g, 2.0), 1.0, ts);

    const bool ok = std::abs(l1.fitted_slope + 0.5) <= 0.05 && l1.r2 >= 0.99 &&
                    std::abs(l2.fitted_slope + 0.25) <= 0.05 && l2.r2 >= 0.99;
    return {ok, fmt("p=1: slope %.4f (R2 %.4f); p=2: slope %.4f", l1.fitted_slope, l1.r2,
                    l2.fitted_slope)};
}

// 2. Mass conservation under pure Neumann diffusion.
std::pair<bool, std::string> mass_conservation() {
    Problem p = scalar_problem(257, "0", 0.0, 1.0);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    for (double& v : p.u0.values) v = dist(rng);
    SimResult r = simulate(p, StepperConfig{});

    const double mass0 = r.trace->samples.front().u.mass;
    double worst = 0.0;
    for (const TraceSample& s : r.trace->samples) {
        worst = std::max(worst, std::abs(s.u.mass - mass0) / std::abs(mass0));
    }
    return {r.terminal == TerminalKind::completed && worst <= 1e-10,
            fmt("max relative drift %.3e over %g samples", worst,
                static_cast<double>(r.trace->samples.size()))};
}

// 3. Agreement with the spectral oracle on pure diffusion.
std::pair<bool, std::string> spectral_agreement() {
    Problem p = scalar_problem(257, "0", 0.0, 0.1);
    for (int i = 0; i < p.grid.nx(); ++i) p.u0(i) = std::cos(kPi * p.grid.x(i)) + 2.0;
    StepperConfig c;
    c.error_tol = 1e-8;
    c.theta = 0.5;  // second-order diffusion; theta=1 carries O(dt) error
    SimResult r = simulate(p, c);
    Field oracle = heat_propagate_spectral(p.u0, 1.0, 0.1);
    const double dev = norm_inf_diff(r.final_state.u, oracle);
    return {r.terminal == TerminalKind::completed && dev <= 1e-5,
            fmt("max deviation %.3e", dev)};
}

// 4. Parabolic maximum principle in both directions.
std::pair<bool, std::string> maximum_principle() {
    StepperConfig c;
    c.record_stride = 1;

    Problem sub = scalar_problem(257, "-u", 0.0, 0.5);
    for (int i = 0; i < sub.grid.nx(); ++i) sub.u0(i) = 2.0 + std::sin(kPi * sub.grid.x(i));
    SimResult rs = simulate(sub, c);
    MaxPrincipleVerdict max_v = max_principle_oracle(*rs.record, PrincipleDirection::sub);

    Problem super = scalar_problem(257, "u", 0.0, 0.5);
    for (int i = 0; i < super.grid.nx(); ++i) super.u0(i) = 2.0 + std::sin(kPi * super.grid.x(i));
    SimResult rp = simulate(super, c);
    MaxPrincipleVerdict min_v = max_principle_oracle(*rp.record, PrincipleDirection::super);

    const bool ok = max_v.holds && max_v.excess <= 1e-8 && min_v.holds && min_v.excess <= 1e-8;
    return {ok, fmt("sub excess %.3e, super excess %.3e", max_v.excess, min_v.excess)};
}

// 5. Blow-up detection against the closed-form pole of u' = u^2.
std::pair<bool, std::string> blowup_oracle() {
    Problem p = scalar_problem(257, "u^2", 1.0, 2.0);
    StepperConfig c;
    c.blowup_threshold = 1e4;  // 1e8 needs ~1e7 first-order steps; extrapolation error ~1e-4
    PdeOdeComparison cmp = compare_pde_ode(p, c);
    if (!cmp.pde_t_est || !cmp.ode_t_est || !cmp.blowup_gap_rel) {
        return {false, "blow-up not detected on both sides"};
    }
    const bool ok = std::abs(*cmp.pde_t_est - 1.0) <= 0.01 && *cmp.blowup_gap_rel <= 0.01;
    return {ok, fmt("pde t_est %.4f, ode t_est %.4f, gap %.2e%%", *cmp.pde_t_est, *cmp.ode_t_est,
                    100.0 * *cmp.blowup_gap_rel)};
}

// 6. Integral blow-up criterion classifier.
std::pair<bool, std::string> criterion_classifier() {
    CriterionVerdict quad = classify_criterion(parse_criterion_integrand("s^2"), 0.0);
    CriterionVerdict lin = classify_criterion(parse_criterion_integrand("s"), 0.0);
    CriterionVerdict expo = classify_criterion(parse_criterion_integrand("exp(s)"), 0.0);
    const bool ok = quad.classification == CriterionVerdict::Classification::finite &&
                    std::abs(quad.estimate - kPi / 2.0) <= 1e-6 &&
                    lin.classification == CriterionVerdict::Classification::infinite &&
                    expo.classification == CriterionVerdict::Classification::finite &&
                    std::abs(expo.estimate - std::log(2.0)) <= 1e-6;
    return {ok, fmt("s^2: %.9f (pi/2 err %.1e); e^s err %.1e", quad.estimate,
                    std::abs(quad.estimate - kPi / 2.0), std::abs(expo.estimate - std::log(2.0)))};
}

// 7. Gronwall mass ledger.
std::pair<bool, std::string> gronwall() {
    RunRecord fk = run_scenario(*find_scenario("frank_kamenetskii"));
    const double mass0 = fk.trace->samples.front().u.mass + fk.trace->samples.front().v->mass;
    double worst = 0.0;
    for (const TraceSample& s : fk.trace->samples) {
        worst = std::max(worst, std::abs(s.u.mass + s.v->mass - mass0) / std::abs(mass0));
    }
    const bool flat = worst <= 1e-8;

    Problem growth;
    growth.grid = Grid(Domain::interval(1.0), 65);
    growth.reaction = system_reaction("u", "v");
    growth.u0 = Field(growth.grid, 1.0);
    growth.v0 = Field(growth.grid, 1.0);
    growth.horizon = 1.0;
    SimResult gr = simulate(growth, StepperConfig{});
    GronwallLedger ledger = gronwall_ledger(*gr.trace, 1.0);

    const bool ok = flat && ledger.verdict == Verdict::holds;
    return {ok, fmt("fk mass drift %.3e; (u,v) ledger over %g intervals: ", worst,
                    static_cast<double>(ledger.samples_checked)) +
                    (ledger.verdict == Verdict::holds ? "holds" : "FAILS")};
}

// 8. Theorem-shaped probe on the decaying-positive scenario.
std::pair<bool, std::string> theorem_probe_consistency() {
    RunRecord dp = run_scenario(*find_scenario("decaying_positive"));
    double max_linf = dp.max_linf_u;
    const bool held = dp.theorem && dp.theorem->hypotheses_held &&
                      dp.theorem->conclusion == TheoremProbe::Conclusion::bounded;
    const bool bounded = max_linf <= std::exp(1.0) + 1e-3;

    Problem neg = scalar_problem(65, "-u", 1.0, 2.0);
    SimResult rn = simulate(neg, StepperConfig{});
    TheoremProbeInputs inputs;
    inputs.terminal = rn.terminal;
    inputs.sign = check_sign_condition(*rn.trace);
    TheoremProbe probe = theorem_probe(*rn.trace, inputs);

    const bool ok = held && bounded && !probe.counterexample_candidate &&
                    !dp.counterexample_candidate;
    return {ok, fmt("max ||u||inf %.6f vs e=%.6f; candidates none", max_linf, std::exp(1.0))};
}

// 9. Barabanova-threshold scenario completes and stays ordered.
std::pair<bool, std::string> barabanova() {
    RunRecord fk = run_scenario(*find_scenario("frank_kamenetskii"));
    bool u_monotone = true;
    for (std::size_t k = 1; k < fk.trace->samples.size(); ++k) {
        if (fk.trace->samples[k].u.linf >
            fk.trace->samples[k - 1].u.linf * (1.0 + 1e-12)) {
            u_monotone = false;
        }
    }
    const double v_max = fk.max_linf_v.value_or(0.0);
    const bool ok = fk.terminal == TerminalKind::completed && u_monotone &&
                    std::isfinite(v_max) && v_max < 1e8;
    // ||u0||inf = 1 <= 8ab/(a-b)^2 = 16; empirical confirmation, not proof.
    return {ok, fmt("completed, ||u||inf non-increasing, v_max %.6f recorded", v_max)};
}

// 10. Power-family sweep across the p = 1 threshold.
std::pair<bool, std::string> power_sweep() {
    nlohmann::json j;
    j["name"] = "power_family";
    j["base"] = "power";
    j["axes"] = {{{"param", "/problem/reaction/params/p"}, {"values", {0.5, 1.0, 1.5, 2.0}}}};
    SweepSpec sweep = sweep_from_json(j);
    std::vector<SweepRow> rows = run_sweep(sweep, 2);
    if (rows.size() != 4) return {false, "expected 4 rows"};
    for (const SweepRow& row : rows) {
        if (!row.error.empty() || !row.record) return {false, "row failed: " + row.error};
    }
    const bool kinds = rows[0].record->terminal == TerminalKind::completed &&
                       rows[1].record->terminal == TerminalKind::completed &&
                       rows[2].record->terminal == TerminalKind::blowup &&
                       rows[3].record->terminal == TerminalKind::blowup;
    const double t_est = rows[3].record->blowup ? rows[3].record->blowup->t_est : -1.0;
    const bool ok = kinds && std::abs(t_est - 1.0) <= 0.02;  // 1/(p-1) = 1 within 2%
    return {ok, std::string(kinds ? "kinds as predicted" : "kinds WRONG") +
                    fmt(", p=2 t_est %.4f", t_est)};
}

// 11. Byte-identical traces for identical configs.
std::pair<bool, std::string> determinism() {
    ScenarioSpec spec = *find_scenario("mass_control_pair");
    RunRecord first = run_scenario(spec);
    RunRecord second = run_scenario(spec);
    const std::string csv1 = trace_to_csv(*first.trace, first.config_hash);
    const std::string csv2 = trace_to_csv(*second.trace, second.config_hash);
    return {csv1 == csv2 && !csv1.empty(),
            fmt("%g identical bytes", static_cast<double>(csv1.size()))};
}

// 12. Value-repetition probe locates a reaction zero.
std::pair<bool, std::string> lemma1() {
    Problem p = scalar_problem(257, "cos(t)", 1.5, 7.0);
    StepperConfig c;
    c.record_stride = 1;
    SimResult r = simulate(p, c);
    Lemma1Result res = lemma1_probe(*r.record, p.reaction, 2.0, 1e-6);
    if (res.status != Lemma1Result::Status::witness_found || !res.witness) {
        return {false, "no reaction zero located"};
    }
    const double f_at_witness = std::cos(res.witness->t);
    const bool inside = res.witness->t > res.crossing_times[0] &&
                        res.witness->t < res.crossing_times[2];
    const bool ok = std::abs(f_at_witness) <= 1e-6 && inside;
    return {ok, fmt("crossings %.3f/%.3f/%.3f", res.crossing_times[0], res.crossing_times[1],
                    res.crossing_times[2]) +
                    fmt(", |f| at witness %.2e", std::abs(f_at_witness))};
}

}  // namespace

int main() {
    std::printf("heatlab acceptance suite\n");
    criterion(1, "smoothing exponent (p=1 -> -0.5, p=2 -> -0.25)", smoothing_exponent);
    criterion(2, "mass conservation <= 1e-10 relative", mass_conservation);
    criterion(3, "spectral-oracle agreement <= 1e-5", spectral_agreement);
    criterion(4, "maximum principle, sub and super <= 1e-8", maximum_principle);
    criterion(5, "blow-up oracle t_est = 1.00 +- 0.01, gap <= 1%", blowup_oracle);
    criterion(6, "criterion classifier (pi/2, infinite, ln 2)", criterion_classifier);
    criterion(7, "gronwall ledger (flat mass; y' <= C(y+|Omega|))", gronwall);
    criterion(8, "theorem probe held/bounded, u <= e + 1e-3", theorem_probe_consistency);
    criterion(9, "barabanova scenario completes, u ordered", barabanova);
    criterion(10, "power sweep kinds and 1/(p-1) timing", power_sweep);
    criterion(11, "determinism: identical trace bytes", determinism);
    criterion(12, "lemma-1 probe finds |f| <= 1e-6 between crossings", lemma1);

    std::printf("%d of 12 criteria passed\n", 12 - failures);
    return failures;
}
