#include "heatlab/ode.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "heatlab/errors.hpp"
#include "heatlab/norms.hpp"

namespace heatlab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,     0.0,        500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,     0.0,          7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

void check_ode_vars(const ExprPtr& f) {
    for (Var v : variables_of(f)) {
        if (v != Var::t && v != Var::u) {
            throw std::invalid_argument(std::string("ODE reaction may reference t and u only, "
                                                    "found '") +
                                        var_name(v) + "'");
        }
    }
}

double eval_tu(const ExprPtr& f, double t, double u) {
    Bindings b;
    b.t = t;
    b.u = u;
    return eval(f, b);
}

void finish_ode_blowup(OdeResult& result) {
    result.terminal = OdeTerminal::blowup;
    std::vector<double> times, norms;
    times.reserve(result.samples.size());
    norms.reserve(result.samples.size());
    for (const OdeSample& s : result.samples) {
        times.push_back(s.t);
        norms.push_back(std::abs(s.u));
    }
    std::vector<double> ft, fm;
    select_blowup_fit_window(times, norms, ft, fm);
    PowerLawFit fit = fit_blowup_time(ft, fm);
    result.t_est = fit.ok ? fit.t_est : result.t_end;
    result.beta = fit.beta;
}

}  // namespace

OdeResult integrate_ode_at(const ExprPtr& f, double u0, double horizon,
                           const std::vector<double>& land_times, const OdeOptions& options) {
    if (!std::isfinite(u0)) throw std::invalid_argument("u0 must be finite");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    check_ode_vars(f);
    eval_tu(f, 0.0, u0);  // non-finite f at the start propagates as eval_error

    std::vector<double> targets = land_times;
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    std::size_t next_target = 0;
    while (next_target < targets.size() && targets[next_target] <= 0.0) ++next_target;

    OdeResult result;
    result.samples.push_back({0.0, u0});

    double t = 0.0;
    double u = u0;
    double dt = std::min(1e-4 * horizon, 1e-2);
    double k[7];

    while (t < horizon) {
        const double dt_min = 1e-14 * std::max(1.0, std::abs(t));
        double limit = horizon;
        if (next_target < targets.size()) limit = std::min(limit, targets[next_target]);
        const bool clipped = limit - t <= dt;
        const double h = clipped ? limit - t : dt;

        bool failed = false;
        double u_new = 0.0, err = 0.0;
        try {
            k[0] = eval_tu(f, t, u);
            for (int stage = 1; stage < 7; ++stage) {
                double acc = 0.0;
                for (int m = 0; m < stage; ++m) acc += kA[stage][m] * k[m];
                k[stage] = eval_tu(f, t + kC[stage] * h, u + h * acc);
            }
            double acc5 = 0.0, acc4 = 0.0;
            for (int m = 0; m < 7; ++m) {
                acc5 += kB5[m] * k[m];
                acc4 += kB4[m] * k[m];
            }
            u_new = u + h * acc5;
            err = std::abs(h * (acc5 - acc4));
            if (!std::isfinite(u_new)) failed = true;
        } catch (const eval_error&) {
            failed = true;
        }

        const double scale =
            options.abs_tol + options.rel_tol * std::max(std::abs(u), std::abs(u_new));
        const double err_norm = failed ? 2.0 : err / scale;

        if (!failed && err_norm <= 1.0) {
            t = clipped ? limit : t + h;
            u = u_new;
            result.steps_accepted += 1;
            result.samples.push_back({t, u});
            if (next_target < targets.size() && t >= targets[next_target]) ++next_target;
            if (std::abs(u) >= options.blowup_threshold) {
                result.t_end = t;
                finish_ode_blowup(result);
                return result;
            }
            if (t >= horizon) break;
        }

        const double factor =
            failed ? 0.2
                   : std::clamp(0.9 * std::pow(std::max(err_norm, 1e-30), -0.2), 0.2, 5.0);
        dt = h * factor;
        if (dt < dt_min) {
            // Controller collapse: declared as blow-up, same as the PDE detector.
            result.t_end = t;
            finish_ode_blowup(result);
            return result;
        }
    }

    result.t_end = t;
    result.terminal = OdeTerminal::completed;
    return result;
}

OdeResult integrate_ode(const ExprPtr& f, double u0, double horizon, const OdeOptions& options) {
    return integrate_ode_at(f, u0, horizon, {}, options);
}

// ---------------------------------------------------------------------------
// Criterion classifier
// ---------------------------------------------------------------------------

namespace {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
constexpr double kGk[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <typename F>
double gk15(const F& fn, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double y0 = fn(mid);
    double g7 = kGk[0][1] * y0;
    double k15 = kGk[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk[i][0];
        const double y = fn(mid + dx) + fn(mid - dx);
        g7 += kGk[i][1] * y;
        k15 += kGk[i][2] * y;
    }
    g7 *= half;
    k15 *= half;
    err = std::pow(200.0 * std::abs(g7 - k15), 1.5);
    return k15;
}

template <typename F>
double adaptive_quad(const F& fn, double a, double b, double tol, int depth = 0) {
    double err = 0.0;
    const double estimate = gk15(fn, a, b, err);
    if (err <= tol || depth >= 48 || !(std::isfinite(estimate))) {
        return estimate;
    }
    const double mid = 0.5 * (a + b);
    return adaptive_quad(fn, a, mid, tol / 2, depth + 1) +
           adaptive_quad(fn, mid, b, tol / 2, depth + 1);
}

}  // namespace

const char* criterion_name(CriterionVerdict::Classification c) {
    switch (c) {
        case CriterionVerdict::Classification::finite: return "finite";
        case CriterionVerdict::Classification::infinite: return "infinite";
        case CriterionVerdict::Classification::inconclusive: return "inconclusive";
    }
    return "unknown";
}

ExprPtr parse_criterion_integrand(const std::string& text) {
    // The dummy integration variable s aliases u; rewrite standalone s
    // identifiers (same byte length, offsets in errors stay valid).
    std::string rewritten = text;
    for (std::size_t i = 0; i < rewritten.size(); ++i) {
        if (rewritten[i] != 's') continue;
        const bool prev_ident =
            i > 0 && (std::isalnum(static_cast<unsigned char>(rewritten[i - 1])) ||
                      rewritten[i - 1] == '_');
        const bool next_ident =
            i + 1 < rewritten.size() &&
            (std::isalnum(static_cast<unsigned char>(rewritten[i + 1])) || rewritten[i + 1] == '_');
        if (!prev_ident && !next_ident) rewritten[i] = 'u';
    }
    return parse_expr(rewritten);
}

CriterionVerdict classify_criterion(const ExprPtr& f, double lower, CriterionForm form) {
    for (Var v : variables_of(f)) {
        if (v != Var::u) {
            throw std::invalid_argument("criterion integrand must depend on the integration "
                                        "variable only");
        }
    }
    if (form == CriterionForm::one_over_f && !(lower > 0.0)) {
        throw std::invalid_argument("the 1/f criterion form requires a positive lower limit");
    }
    if (!std::isfinite(lower) || lower < 0.0) {
        throw std::invalid_argument("lower limit must be finite and nonnegative");
    }

    auto f_at = [&f](double s) {
        Bindings b;
        b.u = s;
        return eval_unchecked(f, b);
    };

    // Sampled nonnegativity check of f on [lower, 1e12].
    {
        std::vector<double> probes{lower};
        for (double s = std::max(lower, 1e-3); s <= 1e12; s *= 4.0) probes.push_back(s);
        for (double s : probes) {
            const double value = f_at(s);
            if (std::isnan(value) || value < -1e-12) {
                throw std::invalid_argument("criterion requires f >= 0 on [lower, inf); f(" +
                                            format_double(s) + ") = " + format_double(value));
            }
        }
    }

    auto integrand = [&](double s) {
        const double value = form == CriterionForm::one_over_one_plus_f ? 1.0 + f_at(s) : f_at(s);
        const double r = 1.0 / value;
        return std::isfinite(r) ? r : 0.0;  // f -> inf contributes nothing
    };

    CriterionVerdict verdict;
    const double quad_tol = 1e-10;

    const double first_cap = std::max(1e2, 2.0 * std::max(lower, 1.0));
    long double total = adaptive_quad(integrand, lower, first_cap, quad_tol);
    double cap = first_cap;

    std::vector<double> increments;
    double negligible_streak = 0;
    while (cap < 1e12) {
        const double next = cap * 2.0;
        const double inc = adaptive_quad(integrand, cap, next, quad_tol);
        increments.push_back(inc);
        total += inc;
        cap = next;
        if (std::abs(inc) <= 1e-13 * (1.0 + std::abs(static_cast<double>(total)))) {
            if (++negligible_streak >= 3) break;  // tail already dead (e.g. f = e^s)
        } else {
            negligible_streak = 0;
        }
    }
    verdict.estimate = static_cast<double>(total);
    verdict.truncation = cap;

    const double scale = 1.0 + std::abs(verdict.estimate);
    const double quad_total_err = quad_tol * (increments.size() + 1.0);

    if (negligible_streak >= 3) {
        verdict.classification = CriterionVerdict::Classification::finite;
        verdict.error_bound = quad_total_err + 1e-12 * scale;
        return verdict;
    }

    // Shape of log(increment) vs doubling index over the trailing half.
    std::vector<double> tail;
    for (std::size_t k = increments.size() / 2; k < increments.size(); ++k) {
        tail.push_back(increments[k]);
    }
    bool any_nonpositive = false;
    for (double d : tail) {
        if (!(d > 0.0)) any_nonpositive = true;
    }
    if (tail.size() < 4 || any_nonpositive) {
        verdict.classification = CriterionVerdict::Classification::inconclusive;
        verdict.reason = "oscillatory tail";
        verdict.error_bound = quad_total_err;
        return verdict;
    }

    long double sk = 0, sy = 0, skk = 0, sky = 0, syy = 0;
    for (std::size_t k = 0; k < tail.size(); ++k) {
        const double y = std::log(tail[k]);
        sk += k;
        sy += y;
        skk += static_cast<double>(k) * k;
        sky += k * y;
        syy += y * y;
    }
    const long double n = static_cast<long double>(tail.size());
    const long double denom = n * skk - sk * sk;
    const double sigma = static_cast<double>((n * sky - sk * sy) / denom);  // log-ratio per doubling
    const long double ss_tot = syy - sy * sy / n;
    const long double ss_res = ss_tot - sigma * sigma * denom / n;
    const double r2 = ss_tot > 1e-30 ? static_cast<double>(1.0L - ss_res / ss_tot) : 1.0;

    const double last_inc = tail.back();
    const double ratio = std::exp(sigma);

    if (r2 < 0.9 && ss_tot > 1e-6) {
        verdict.classification = CriterionVerdict::Classification::inconclusive;
        verdict.reason = "oscillatory tail";
        verdict.error_bound = quad_total_err;
        return verdict;
    }
    if (sigma <= std::log(0.8) && last_inc <= 1e-12 * scale) {
        verdict.classification = CriterionVerdict::Classification::finite;
        verdict.error_bound = quad_total_err + last_inc * ratio / (1.0 - ratio);
        return verdict;
    }
    if (sigma >= -0.005) {
        // Increments constant or growing: partial sums grow at least like log S.
        verdict.classification = CriterionVerdict::Classification::infinite;
        verdict.error_bound = quad_total_err;
        return verdict;
    }
    verdict.classification = CriterionVerdict::Classification::inconclusive;
    verdict.reason = "slowly varying tail";
    verdict.error_bound = quad_total_err;
    return verdict;
}

bool criterion_monotonicity_violated(const CriterionVerdict& smaller_reaction,
                                     const CriterionVerdict& larger_reaction) {
    return smaller_reaction.classification == CriterionVerdict::Classification::finite &&
           larger_reaction.classification == CriterionVerdict::Classification::infinite;
}

// ---------------------------------------------------------------------------
// PDE/ODE comparison
// ---------------------------------------------------------------------------

PdeOdeComparison compare_pde_ode(const Problem& problem, const StepperConfig& config,
                                 const OdeOptions& ode_options) {
    if (problem.reaction.is_system()) {
        throw std::invalid_argument("compare_pde_ode handles scalar problems only");
    }
    for (Var v : variables_of(problem.reaction.f)) {
        if (v != Var::t && v != Var::u) {
            throw std::invalid_argument("compare_pde_ode requires an x-independent reaction");
        }
    }
    {
        const double lo = min_value(problem.u0);
        const double hi = max_value(problem.u0);
        if (hi - lo > 1e-12 * (1.0 + std::abs(hi))) {
            throw std::invalid_argument("compare_pde_ode requires spatially constant u0");
        }
    }

    SimResult pde = simulate(problem, config);
    std::vector<double> trace_times;
    trace_times.reserve(pde.trace->samples.size());
    for (const TraceSample& s : pde.trace->samples) trace_times.push_back(s.time);

    OdeOptions opts = ode_options;
    OdeResult ode = integrate_ode_at(problem.reaction.f, problem.u0.values.front(),
                                     problem.horizon, trace_times, opts);

    PdeOdeComparison cmp;
    if (pde.blowup) cmp.pde_t_est = pde.blowup->t_est;
    if (ode.t_est) cmp.ode_t_est = *ode.t_est;
    if (cmp.pde_t_est && cmp.ode_t_est) {
        cmp.blowup_gap_rel = std::abs(*cmp.pde_t_est - *cmp.ode_t_est) / *cmp.ode_t_est;
    }

    // Comparison window stops short of the earliest blow-up estimate.
    double t_cap = problem.horizon;
    if (cmp.pde_t_est) t_cap = std::min(t_cap, *cmp.pde_t_est - 0.05);
    if (cmp.ode_t_est) t_cap = std::min(t_cap, *cmp.ode_t_est - 0.05);

    std::size_t oi = 0;
    for (const TraceSample& s : pde.trace->samples) {
        if (s.time > t_cap) break;
        while (oi < ode.samples.size() && ode.samples[oi].t < s.time - 1e-14) ++oi;
        if (oi >= ode.samples.size()) break;
        if (std::abs(ode.samples[oi].t - s.time) > 1e-12 * (1.0 + s.time)) continue;
        cmp.max_deviation = std::max(cmp.max_deviation, std::abs(s.u.linf - ode.samples[oi].u));
        cmp.compared_samples += 1;
    }
    return cmp;
}

}  // namespace heatlab
