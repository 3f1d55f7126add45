#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "heatlab/checks.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/norms.hpp"
#include "heatlab/stepper.hpp"

using namespace heatlab;

namespace {

const double kPi = std::acos(-1.0);

Problem scalar_problem(const Grid& grid, const std::string& reaction, double u0_const,
                       double horizon) {
    Problem p;
    p.grid = grid;
    p.reaction = scalar_reaction(reaction);
    p.u0 = Field(grid, u0_const);
    p.horizon = horizon;
    return p;
}

SimResult run_scalar(const std::string& reaction, double u0, double horizon,
                     StepperConfig c = {}) {
    Grid g(Domain::interval(1.0), 33);
    return simulate(scalar_problem(g, reaction, u0, horizon), c);
}

}  // namespace

TEST_CASE("sign condition: uniformly positive reaction holds from the first sample") {
    SimResult r = run_scalar("u", 1.0, 1.0);
    HypothesisReport report = check_sign_condition(*r.trace);
    CHECK(report.condition == ConditionId::H17);
    CHECK(report.verdict == Verdict::holds);
    REQUIRE(report.t0_detected.has_value());
    CHECK(*report.t0_detected == r.trace->samples.front().time);
}

TEST_CASE("sign condition: uniformly negative reaction holds") {
    SimResult r = run_scalar("-u", 1.0, 1.0);
    HypothesisReport report = check_sign_condition(*r.trace);
    CHECK(report.verdict == Verdict::holds);
}

TEST_CASE("sign condition: sin(t)*u keeps flipping and fails") {
    SimResult r = run_scalar("sin(t)*u", 1.0, 10.0);
    HypothesisReport report = check_sign_condition(*r.trace);
    CHECK(report.verdict == Verdict::fails);
    REQUIRE(report.witness.has_value());
    // Last flip of sin on (0, 10) is at 3*pi.
    CHECK(std::abs(report.witness->t - 3.0 * kPi) <= 0.5);
}

TEST_CASE("sign condition: verdicts are reproducible") {
    SimResult r = run_scalar("sin(t)*u", 1.0, 10.0);
    HypothesisReport a = check_sign_condition(*r.trace);
    HypothesisReport b = check_sign_condition(*r.trace);
    CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("positivity: f = u^2 holds") {
    HypothesisReport report = check_positivity_condition(scalar_reaction("u^2"));
    CHECK(report.condition == ConditionId::P);
    CHECK(report.verdict == Verdict::holds);
}

TEST_CASE("positivity: frank-kamenetskii pair holds") {
    HypothesisReport report = check_positivity_condition(builtin_reaction("frank_kamenetskii"));
    CHECK(report.condition == ConditionId::P3prime);
    CHECK(report.verdict == Verdict::holds);
}

TEST_CASE("positivity: f = u-1 fails with the u=0 witness") {
    HypothesisReport report = check_positivity_condition(scalar_reaction("u-1"));
    CHECK(report.verdict == Verdict::fails);
    REQUIRE(report.witness.has_value());
    CHECK(report.witness->u == 0.0);
    CHECK(report.witness->value == doctest::Approx(-1.0));
}

TEST_CASE("positivity: non-finite sample is undetermined") {
    HypothesisReport report = check_positivity_condition(system_reaction("1/u", "u"));
    CHECK(report.verdict == Verdict::undetermined);
    CHECK(report.witness.has_value());
}

TEST_CASE("mass control: exact cancellation holds for any C and strictly") {
    ReactionSpec fk = builtin_reaction("frank_kamenetskii");
    CHECK(check_mass_control(fk, 0.0).verdict == Verdict::holds);
    CHECK(check_mass_control(fk, 3.0).verdict == Verdict::holds);
    CHECK(check_strict_mass_control(fk).verdict == Verdict::holds);
}

TEST_CASE("mass control: (u, v) with C = 1 holds") {
    ReactionSpec pair = system_reaction("u", "v");
    CHECK(check_mass_control(pair, 1.0).verdict == Verdict::holds);
    CHECK(check_strict_mass_control(pair).verdict == Verdict::fails);
}

TEST_CASE("mass control: (u*v, u) with C = 1 fails at large u,v") {
    ReactionSpec pair = system_reaction("u*v", "u");
    HypothesisReport report = check_mass_control(pair, 1.0);
    CHECK(report.verdict == Verdict::fails);
    REQUIRE(report.witness.has_value());
    CHECK(report.witness->u * report.witness->v > 1e3);
}

TEST_CASE("gronwall ledger: conserved mass is flat and holds") {
    Grid g(Domain::interval(1.0), 33);
    Problem p;
    p.grid = g;
    p.a = 2.0;
    p.b = 1.0;
    p.reaction = builtin_reaction("frank_kamenetskii");
    p.u0 = Field(g, 1.0);
    p.v0 = Field(g, 0.1);
    p.horizon = 2.0;
    SimResult r = simulate(p, StepperConfig{});
    GronwallLedger ledger = gronwall_ledger(*r.trace, 1.0);
    CHECK(ledger.verdict == Verdict::holds);
    // Flat trace: C' is the t=0 value y(0) + |Omega| = 1.1 + 1.
    CHECK(ledger.fitted_c_prime == doctest::Approx(2.1).epsilon(1e-6));

    const double mass0 =
        r.trace->samples.front().u.mass + r.trace->samples.front().v->mass;
    for (const TraceSample& s : r.trace->samples) {
        CHECK(std::abs(s.u.mass + s.v->mass - mass0) <= 1e-8 * mass0);
    }
}

TEST_CASE("gronwall ledger: exponential mass growth obeys y' <= C(y+|Omega|)") {
    Grid g(Domain::interval(1.0), 33);
    Problem p;
    p.grid = g;
    p.reaction = system_reaction("u", "v");
    p.u0 = Field(g, 1.0);
    p.v0 = Field(g, 1.0);
    p.horizon = 1.0;
    SimResult r = simulate(p, StepperConfig{});
    GronwallLedger ledger = gronwall_ledger(*r.trace, 1.0);
    CHECK(ledger.verdict == Verdict::holds);
    CHECK(ledger.samples_checked > 10);
}

TEST_CASE("gronwall ledger: too few samples is undetermined") {
    Trace t;
    t.system = true;
    t.omega_measure = 1.0;
    CHECK(gronwall_ledger(t, 1.0).verdict == Verdict::undetermined);
}

TEST_CASE("max principle: pure diffusion max sits on the initial layer") {
    Grid g(Domain::interval(1.0), 65);
    Problem p = scalar_problem(g, "0", 0.0, 0.3);
    for (int i = 0; i < g.nx(); ++i) p.u0(i) = 2.0 + std::cos(kPi * g.x(i));
    StepperConfig c;
    c.record_stride = 1;
    SimResult r = simulate(p, c);
    MaxPrincipleVerdict verdict = max_principle_oracle(*r.record, PrincipleDirection::sub);
    CHECK(verdict.holds);
    CHECK(verdict.excess <= 1e-8);
    CHECK(verdict.boundary_extremum == doctest::Approx(3.0));
}

TEST_CASE("max principle: subsolution (f <= 0) and supersolution (f >= 0) directions") {
    Grid g(Domain::interval(1.0), 65);
    StepperConfig c;
    c.record_stride = 1;

    Problem sub = scalar_problem(g, "-u", 0.0, 0.5);
    for (int i = 0; i < g.nx(); ++i) sub.u0(i) = 2.0 + std::sin(kPi * g.x(i));
    SimResult rs = simulate(sub, c);
    CHECK(max_principle_oracle(*rs.record, PrincipleDirection::sub).holds);

    Problem super = scalar_problem(g, "u", 0.0, 0.5);
    for (int i = 0; i < g.nx(); ++i) super.u0(i) = 2.0 + std::sin(kPi * g.x(i));
    SimResult rp = simulate(super, c);
    MaxPrincipleVerdict min_verdict = max_principle_oracle(*rp.record, PrincipleDirection::super);
    CHECK(min_verdict.holds);
    CHECK(min_verdict.boundary_extremum == doctest::Approx(2.0));
}

TEST_CASE("lemma1 probe: constant-in-time solution finds f = 0 immediately") {
    SimResult r = run_scalar("0", 2.0, 1.0);
    Lemma1Result res = lemma1_probe(*r.record, scalar_reaction("0"), 2.0, 1e-10, 1e-9);
    CHECK(res.status == Lemma1Result::Status::witness_found);
    REQUIRE(res.witness.has_value());
    CHECK(std::abs(res.witness->value) <= 1e-10);
}

TEST_CASE("lemma1 probe: f = cos(t) run crosses a level three times, zero near pi/2") {
    StepperConfig c;
    c.record_stride = 1;
    SimResult r = run_scalar("cos(t)", 1.5, 7.0, c);
    CHECK(r.terminal == TerminalKind::completed);
    Lemma1Result res = lemma1_probe(*r.record, scalar_reaction("cos(t)"), 2.0, 1e-6);
    REQUIRE(res.status == Lemma1Result::Status::witness_found);
    REQUIRE(res.witness.has_value());
    CHECK(std::abs(std::cos(res.witness->t)) <= 1e-6);
    CHECK(res.witness->t > res.crossing_times[0]);
    CHECK(res.witness->t < res.crossing_times[2]);
    // u = 1.5 + sin(t) crosses level 2 at pi/6, 5pi/6, 13pi/6.
    CHECK(std::abs(res.crossing_times[0] - kPi / 6.0) <= 0.05);
    CHECK(std::abs(res.crossing_times[2] - 13.0 * kPi / 6.0) <= 0.05);
}

TEST_CASE("lemma1 probe: monotone trajectory has no triple") {
    SimResult r = run_scalar("u", 1.0, 1.0);
    Lemma1Result res = lemma1_probe(*r.record, scalar_reaction("u"), 1.5, 1e-8);
    CHECK(res.status == Lemma1Result::Status::not_applicable);
}

TEST_CASE("smoothing fit: p >= q or too few samples are rejected") {
    Grid g(Domain::interval(1.0), 129);
    Field spike = near_delta_field(g, 1.0);
    CHECK_THROWS_AS(fit_smoothing(2.0, 2.0, spike, 1.0, log_spaced_times(1e-5, 1e-3, 16)),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_smoothing(1.0, 2.0, spike, 1.0, log_spaced_times(1e-5, 1e-3, 4)),
                    std::invalid_argument);
}

TEST_CASE("smoothing fit: theoretical exponents") {
    Grid g(Domain::interval(1.0), 513);
    Field spike = near_delta_field(g, 1.0);
    SmoothingFit fit = fit_smoothing(1.0, std::numeric_limits<double>::infinity(), spike, 1.0,
                                     log_spaced_times(1e-5, 1e-4, 10));
    CHECK(fit.theoretical_slope == doctest::Approx(-0.5));
    Field spike2 = near_delta_field(g, 2.0);
    SmoothingFit fit2 = fit_smoothing(2.0, std::numeric_limits<double>::infinity(), spike2, 1.0,
                                      log_spaced_times(1e-5, 1e-4, 10));
    CHECK(fit2.theoretical_slope == doctest::Approx(-0.25));
}

TEST_CASE("smoothing fit: near-delta data reproduces the L1->Linf exponent") {
    Grid g(Domain::interval(1.0), 2049);
    Field spike = near_delta_field(g, 1.0);
    SmoothingFit fit = fit_smoothing(1.0, std::numeric_limits<double>::infinity(), spike, 1.0,
                                     log_spaced_times(1e-5, 1e-3, 16));
    CHECK(std::abs(fit.fitted_slope - (-0.5)) <= 0.05);
    CHECK(fit.r2 >= 0.99);
}

TEST_CASE("smoothing fit: eigenmode in the wrong regime fits a flat slope") {
    // cos(pi x) decays exponentially, not algebraically; fitting well below the
    // mixing time must report slope ~ 0, guarding against wrong-regime fits.
    Grid g(Domain::interval(1.0), 257);
    Field mode(g);
    for (int i = 0; i < g.nx(); ++i) mode(i) = std::cos(kPi * g.x(i));
    SmoothingFitOptions opt;
    opt.boundary_quiet_guard = false;  // an eigenmode always touches the boundary
    SmoothingFit fit = fit_smoothing(1.0, std::numeric_limits<double>::infinity(), mode, 1.0,
                                     log_spaced_times(1e-4, 1e-2, 12), opt);
    CHECK(std::abs(fit.fitted_slope) <= 0.05);
}

TEST_CASE("theorem probe: decaying positive reaction is held/bounded") {
    SimResult r = run_scalar("exp(-t)*u", 1.0, 8.0);
    TheoremProbeInputs inputs;
    inputs.terminal = r.terminal;
    inputs.sign = check_sign_condition(*r.trace);
    inputs.positivity = check_positivity_condition(scalar_reaction("exp(-t)*u"));
    TheoremProbe probe = theorem_probe(*r.trace, inputs);
    CHECK(probe.hypotheses_held);
    CHECK(probe.conclusion == TheoremProbe::Conclusion::bounded);
    CHECK_FALSE(probe.counterexample_candidate);
    CHECK(probe.epsilon_lower >= 1.0);
    // Closed form u = exp(1 - e^-t) <= e.
    double max_linf = 0.0;
    for (const TraceSample& s : r.trace->samples) max_linf = std::max(max_linf, s.u.linf);
    CHECK(max_linf <= std::exp(1.0) + 1e-3);
}

TEST_CASE("theorem probe: u^2 blow-up lands in the consistent failed/growth cell") {
    StepperConfig c;
    c.blowup_threshold = 1e4;
    SimResult r = run_scalar("u^2", 2.0, 2.0, c);
    REQUIRE(r.terminal == TerminalKind::blowup);
    CHECK(std::abs(r.blowup->t_est - 0.5) <= 0.01);  // 1/u0
    TheoremProbeInputs inputs;
    inputs.terminal = r.terminal;
    inputs.sign = check_sign_condition(*r.trace);
    TheoremProbe probe = theorem_probe(*r.trace, inputs);
    CHECK_FALSE(probe.hypotheses_held);  // L1 blows past the cap
    CHECK(probe.conclusion == TheoremProbe::Conclusion::growth);
    CHECK_FALSE(probe.counterexample_candidate);
}

TEST_CASE("theorem probe: nonpositive reactions never flag a counterexample") {
    for (const char* reaction : {"-u", "-u^2", "-exp(-t)*u", "0-u/2"}) {
        SimResult r = run_scalar(reaction, 1.0, 2.0);
        TheoremProbeInputs inputs;
        inputs.terminal = r.terminal;
        inputs.sign = check_sign_condition(*r.trace);
        TheoremProbe probe = theorem_probe(*r.trace, inputs);
        CHECK_MESSAGE(!probe.counterexample_candidate, reaction);
    }
}

TEST_CASE("trace recorder is Holder-consistent at every sample") {
    SimResult r = run_scalar("sin(t)*u", 1.0, 3.0);
    const double omega = r.trace->omega_measure;
    for (const TraceSample& s : r.trace->samples) {
        CHECK(s.u.l1 <= omega * s.u.linf * (1.0 + 1e-12));
    }
    for (std::size_t k = 1; k < r.trace->samples.size(); ++k) {
        CHECK(r.trace->samples[k].time > r.trace->samples[k - 1].time);
    }
}

TEST_CASE("exp-growth trend: G'/F flat for e^v, decaying for e^sqrt(v)") {
    // F = G = e^v has G'/F = 1: not decaying. The gamma = 0.5 family has
    // G'/F = 0.5 v^-0.5 -> 0. Finite-grid heuristic, not a limit statement.
    ReactionSpec fk = builtin_reaction("frank_kamenetskii");
    ExpGrowthTrend flat = check_exp_growth_trend(parse_expr("exp(v)"), parse_expr("exp(v)"));
    CHECK_FALSE(flat.ratio_decreasing);
    CHECK(flat.first_ratio == doctest::Approx(1.0).epsilon(1e-6));

    ExpGrowthTrend decaying =
        check_exp_growth_trend(parse_expr("exp(v^0.5)"), parse_expr("exp(v^0.5)"));
    CHECK(decaying.ratio_decreasing);
    CHECK(decaying.last_ratio < 0.1 * decaying.first_ratio);
    CHECK(decaying.heuristic);
    CHECK(exp_growth_to_json(decaying)["heuristic"] == true);
    (void)fk;
}

TEST_CASE("report json carries stable names") {
    SimResult r = run_scalar("u", 1.0, 0.5);
    nlohmann::json j = report_to_json(check_sign_condition(*r.trace));
    CHECK(j["schema_version"] == 1);
    CHECK(j["condition"] == "H17");
    CHECK(j["verdict"] == "holds");
    CHECK(j.contains("t0_detected"));
}
