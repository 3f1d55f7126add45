#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "heatlab/reactions.hpp"
#include "heatlab/spectral.hpp"
#include "heatlab/stepper.hpp"
#include "heatlab/trace.hpp"

namespace heatlab {

// Machine-checkable verdicts for the hypotheses of the global-existence
// results: sign preservation, positivity at the axes, mass control, the
// Gronwall mass ledger, the parabolic maximum principle, the value-repetition
// lemma, the semigroup smoothing exponent, and the boundedness classification.
// Every verdict is a statement about the sampled sets only.

enum class ConditionId { P, P3prime, H17, MU1, Mprime, Mstrict };
enum class Verdict { holds, fails, undetermined };

const char* condition_name(ConditionId c);
const char* verdict_name(Verdict v);

struct Witness {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
    double v = 0.0;
    double value = 0.0;  // offending quantity at the sample
    bool has_v = false;
};

struct HypothesisReport {
    ConditionId condition = ConditionId::P;
    Verdict verdict = Verdict::undetermined;
    std::optional<Witness> witness;      // present whenever verdict == fails
    std::optional<double> t0_detected;   // time after which the sign is uniform
    std::string note;
};

nlohmann::json report_to_json(const HypothesisReport& report);

// --------------------------------------------------------------------------
// Sign condition: the reaction keeps one strict sign after some detected t0.
// --------------------------------------------------------------------------

struct SignConditionOptions {
    // The uniform-sign tail must cover at least this fraction of the trace
    // span to count as "the sign settled"; a flip just before the horizon
    // leaves the condition unmet.
    double min_tail_fraction = 0.1;
};

// Scalar traces check H17 (f != 0); system traces check MU1 (f*g != 0, i.e.
// both components hold a strict sign).
HypothesisReport check_sign_condition(const Trace& trace,
                                      const SignConditionOptions& options = {});

// --------------------------------------------------------------------------
// Positivity at the axes: f(t,x,0) >= 0, and for pairs also g(..,u,0) >= 0.
// --------------------------------------------------------------------------

HypothesisReport check_positivity_condition(const ReactionSpec& reaction);

// --------------------------------------------------------------------------
// Mass control: f+g <= C(u+v+1) (Mprime) and the strict variant f+g <= 0.
// --------------------------------------------------------------------------

HypothesisReport check_mass_control(const ReactionSpec& pair, double C);
HypothesisReport check_strict_mass_control(const ReactionSpec& pair);

// --------------------------------------------------------------------------
// Gronwall ledger for y(t) = integral of (u + v).
// --------------------------------------------------------------------------

struct GronwallLedger {
    Verdict verdict = Verdict::undetermined;
    double fitted_c_prime = 0.0;  // smallest C' with y + |Omega| <= C' e^{Ct}
    std::optional<Witness> violation;
    int samples_checked = 0;
};

GronwallLedger gronwall_ledger(const Trace& trace, double C);
nlohmann::json gronwall_to_json(const GronwallLedger& ledger);

// --------------------------------------------------------------------------
// Parabolic maximum principle over the recorded space-time samples.
// --------------------------------------------------------------------------

enum class PrincipleDirection { sub, super };  // sub: max on Gamma_T; super: min

struct MaxPrincipleVerdict {
    bool holds = false;
    double interior_extremum = 0.0;  // over all recorded samples
    double boundary_extremum = 0.0;  // over Gamma_T = {t=0} union boundary strips
    double excess = 0.0;             // how far the interior beats Gamma_T
    double tol = 0.0;
};

MaxPrincipleVerdict max_principle_oracle(const SpaceTimeRecord& record,
                                         PrincipleDirection direction, int component = 0,
                                         double mp_tol = 1e-8);
nlohmann::json max_principle_to_json(const MaxPrincipleVerdict& verdict);

// --------------------------------------------------------------------------
// Value-repetition probe: u attaining the same level three times forces a
// reaction zero strictly between the first and third crossing.
// --------------------------------------------------------------------------

struct Lemma1Result {
    enum class Status { not_applicable, witness_found, violated };
    Status status = Status::not_applicable;
    std::array<double, 3> crossing_times{0.0, 0.0, 0.0};
    std::optional<Witness> witness;  // reaction zero, when found
};

Lemma1Result lemma1_probe(const SpaceTimeRecord& record, const ReactionSpec& reaction,
                          double level, double zero_tol, double level_tol = 0.0);
nlohmann::json lemma1_to_json(const Lemma1Result& result);

// --------------------------------------------------------------------------
// Smoothing-exponent fit for the heat semigroup.
// --------------------------------------------------------------------------

struct SmoothingFitOptions {
    // Drop sample times at which the propagated spike has reached the
    // boundary (boundary amplitude >= 1e-6 of the peak); the estimate is a
    // small-time statement. Disable to probe the wrong regime deliberately.
    bool boundary_quiet_guard = true;
};

struct SmoothingFit {
    double p = 1.0;
    double q = 2.0;
    int n = 1;  // spatial dimension
    double fitted_slope = 0.0;
    double intercept = 0.0;
    double theoretical_slope = 0.0;  // -(n/2)(1/p - 1/q)
    double fitted_c = 0.0;
    double r2 = 0.0;
    int samples_used = 0;
};

// Computes ||S(t)v||_q at each sample time with the spectral propagator and
// fits log-norm against log-t. Throws std::invalid_argument when p >= q or
// fewer than 8 usable samples remain.
SmoothingFit fit_smoothing(double p, double q, const Field& initial, double coeff,
                           const std::vector<double>& t_samples,
                           const SmoothingFitOptions& options = {});
nlohmann::json smoothing_to_json(const SmoothingFit& fit);

// L^p-normalized concentrated spike used as near-delta initial data: a single
// node for p = 1, a grid-cut |x - c|^(-n/p) profile for p > 1 (a fixed
// single-node spike decays like t^(-n/2) regardless of p, which would hide
// every exponent except the L1 one).
Field near_delta_field(const Grid& grid, double p);

// --------------------------------------------------------------------------
// Exponential-growth trend: does G'(v)/F(v) decay as v grows?
// --------------------------------------------------------------------------

// Finite-grid heuristic only (v on a log grid in [1, 1e3], G' by central
// differences); it cannot certify the v -> inf limit.
struct ExpGrowthTrend {
    bool ratio_decreasing = false;
    double first_ratio = 0.0;  // at v = 1
    double last_ratio = 0.0;   // at v = 1e3 (or the last finite sample)
    int samples = 0;
    bool heuristic = true;
};

ExpGrowthTrend check_exp_growth_trend(const ExprPtr& F, const ExprPtr& G);
nlohmann::json exp_growth_to_json(const ExpGrowthTrend& trend);

// Log-uniform sample times for the fit.
std::vector<double> log_spaced_times(double t_min, double t_max, int count);

// --------------------------------------------------------------------------
// Theorem-shaped classification: hypotheses x conclusion.
// --------------------------------------------------------------------------

struct TheoremProbeInputs {
    TerminalKind terminal = TerminalKind::completed;
    HypothesisReport sign;
    std::optional<HypothesisReport> positivity;
    std::optional<HypothesisReport> mass_control;  // systems
    std::optional<double> l1_cap;  // default: 10 * ||u0||_1 * (1 + |Omega|)
};

struct TheoremProbe {
    bool hypotheses_held = false;
    bool l1_bounded = false;
    double l1_sup = 0.0;
    double l1_cap = 0.0;
    double t0 = 0.0;
    enum class Conclusion { bounded, growth } conclusion = Conclusion::bounded;
    // The cell "hypotheses held, conclusion growth" is an empirical
    // counterexample candidate; it is always reported, never suppressed.
    bool counterexample_candidate = false;
    // Proof-tracing quantities; nothing downstream depends on them.
    double m1 = 0.0;             // running max of ||u||_1 on t >= t0
    double alpha = 0.0;          // ||u(t0)||_inf
    double omega_measure = 0.0;
    double epsilon_lower = 0.0;  // max(1, m1 / (alpha |Omega|))
};

const char* theorem_cell_name(const TheoremProbe& probe);

TheoremProbe theorem_probe(const Trace& trace, const TheoremProbeInputs& inputs);
nlohmann::json theorem_to_json(const TheoremProbe& probe);

}  // namespace heatlab
