#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heatlab/expr.hpp"
#include "heatlab/stepper.hpp"

namespace heatlab {

// Spatially homogeneous companion: u' = f(t, u) with a Dormand-Prince 5(4)
// embedded pair, blow-up estimation, and the integral blow-up criterion.

struct OdeSample {
    double t = 0.0;
    double u = 0.0;
};

enum class OdeTerminal { completed, blowup };

struct OdeResult {
    OdeTerminal terminal = OdeTerminal::completed;
    double t_end = 0.0;
    std::optional<double> t_est;  // blow-up estimate, present iff terminal == blowup
    double beta = 0.0;            // fitted exponent of the power-law pole
    std::vector<OdeSample> samples;
    std::size_t steps_accepted = 0;
};

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double blowup_threshold = 1e10;
};

// f may reference t and u only. dt underflow is reported as blow-up, matching
// the detector semantics of the PDE stepper.
OdeResult integrate_ode(const ExprPtr& f, double u0, double horizon,
                        const OdeOptions& options = {});

// Same integrator, but lands exactly on each requested time so traces can be
// compared sample-by-sample.
OdeResult integrate_ode_at(const ExprPtr& f, double u0, double horizon,
                           const std::vector<double>& land_times,
                           const OdeOptions& options = {});

// ---------------------------------------------------------------------------
// Integral blow-up criterion
// ---------------------------------------------------------------------------

enum class CriterionForm {
    one_over_one_plus_f,  // integral of ds / (1 + f(s)) from `lower`
    one_over_f,           // integral of ds / f(s) from a positive `lower`
};

struct CriterionVerdict {
    enum class Classification { finite, infinite, inconclusive };
    Classification classification = Classification::inconclusive;
    double estimate = 0.0;     // partial integral over [lower, truncation]
    double error_bound = 0.0;  // tail extrapolation + quadrature tolerance (finite case)
    double truncation = 0.0;   // upper limit actually integrated to
    std::string reason;        // inconclusive: "oscillatory tail" or "slowly varying tail"
};

const char* criterion_name(CriterionVerdict::Classification c);

// f is a function of the integration variable (written u or s in text form);
// it must be nonnegative on [lower, inf) -- checked on a sampled grid, with a
// std::invalid_argument raised on failure. Partial sums over [lower, S] with S
// doubling from 1e2 to 1e12 are classified by the shape of their increments.
CriterionVerdict classify_criterion(const ExprPtr& f, double lower,
                                    CriterionForm form = CriterionForm::one_over_one_plus_f);

// Parses an integrand over the dummy variable s (an alias for u).
ExprPtr parse_criterion_integrand(const std::string& text);

// Calculus consistency: with g <= f pointwise, 1/(1+f) <= 1/(1+g), so g
// classifying finite while f classifies infinite is impossible.
bool criterion_monotonicity_violated(const CriterionVerdict& smaller_reaction,
                                     const CriterionVerdict& larger_reaction);

// ---------------------------------------------------------------------------
// PDE/ODE comparison
// ---------------------------------------------------------------------------

struct PdeOdeComparison {
    double max_deviation = 0.0;  // max over compared times of | ||u||inf - u_ode |
    std::optional<double> blowup_gap_rel;  // |t_pde - t_ode| / t_ode when both blow up
    std::optional<double> pde_t_est;
    std::optional<double> ode_t_est;
    std::size_t compared_samples = 0;
};

// Requires spatially constant u0 and a reaction independent of x and y. When
// either side blows up, comparison stops 0.05 time units before the earliest
// blow-up estimate.
PdeOdeComparison compare_pde_ode(const Problem& problem, const StepperConfig& config,
                                 const OdeOptions& ode_options = {});

}  // namespace heatlab
