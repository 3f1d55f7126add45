#include "heatlab/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "heatlab/errors.hpp"
#include "heatlab/laplacian.hpp"
#include "heatlab/norms.hpp"

namespace heatlab {

namespace {

constexpr double kCgRelTol = 1e-10;
// Fraction of the elapsed-time span the blow-up detector looks back over when
// deciding whether the norm is growing; accepted steps shrink rapidly near a
// singularity, so a fixed step count would cover almost no time.
constexpr double kGrowthLookback = 0.1;

// L with the boundary closure of the grid; pinned rows zeroed.
Field apply_stencil(const Field& in) {
    Field out(in.grid, 0.0);
    detail::add_axis_second_difference(in, 0, 1.0, out);
    if (in.grid.domain.dim == 2) detail::add_axis_second_difference(in, 1, 1.0, out);
    if (detail::boundary_pins_values(in.grid.domain)) detail::zero_box_boundary(out);
    return out;
}

// Solves (I - c*L) x = rhs for a 1D grid by tridiagonal elimination.
Field solve_tridiagonal(const Field& rhs, double c) {
    const Grid& g = rhs.grid;
    const int n = g.nx();
    const double h = g.spacing(0);
    const double mu = c / (h * h);
    const bool pinned = detail::boundary_pins_values(g.domain);
    const double robin_shift =
        (g.domain.boundary == BoundaryKind::robin && g.domain.robin_alpha > 0.0)
            ? 2.0 * h * g.domain.robin_beta / g.domain.robin_alpha
            : 0.0;

    std::vector<double> diag(n, 1.0 + 2.0 * mu), lower(n, -mu), upper(n, -mu);
    if (pinned) {
        diag[0] = diag[n - 1] = 1.0;
        upper[0] = 0.0;
        lower[n - 1] = 0.0;
    } else if (g.domain.boundary == BoundaryKind::neumann) {
        upper[0] = -2.0 * mu;
        lower[n - 1] = -2.0 * mu;
    } else {
        diag[0] = diag[n - 1] = 1.0 + mu * (2.0 + robin_shift);
        upper[0] = -2.0 * mu;
        lower[n - 1] = -2.0 * mu;
    }

    // Thomas sweep; the system is strictly diagonally dominant.
    Field x = rhs;
    std::vector<double> scratch(n, 0.0);
    double pivot = diag[0];
    x.values[0] = rhs.values[0] / pivot;
    for (int i = 1; i < n; ++i) {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * scratch[i];
        x.values[i] = (rhs.values[i] - lower[i] * x.values[i - 1]) / pivot;
    }
    for (int i = n - 2; i >= 0; --i) {
        x.values[i] -= scratch[i + 1] * x.values[i + 1];
    }
    return x;
}

double weighted_dot(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0.0L;
    for (int j = 0; j < g.ny(); ++j) {
        const double wj = g.domain.dim == 2 ? trapezoid_weight(j, g.ny()) : 1.0;
        for (int i = 0; i < g.nx(); ++i) {
            const double w = wj * trapezoid_weight(i, g.nx());
            const std::size_t k = g.index(i, j);
            acc += static_cast<long double>(w * a[k] * b[k]);
        }
    }
    return static_cast<double>(acc);
}

// Conjugate gradients for (I - c*L) x = rhs in the trapezoid-weighted inner
// product, where the closure-aware stencil is self-adjoint.
Field solve_cg(const Field& rhs, const Field& guess, double c) {
    const Grid& g = rhs.grid;
    auto apply = [&](const Field& z) {
        Field lz = apply_stencil(z);
        Field out = z;
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= c * lz.values[k];
        return out;
    };

    Field x = guess;
    Field ax = apply(x);
    Field r(g, 0.0);
    for (std::size_t k = 0; k < r.values.size(); ++k) r.values[k] = rhs.values[k] - ax.values[k];

    const double rhs_norm = std::sqrt(weighted_dot(g, rhs.values, rhs.values));
    const double tol = kCgRelTol * std::max(rhs_norm, 1e-300);
    double rho = weighted_dot(g, r.values, r.values);
    Field p = r;

    const std::size_t max_iter = 50 * g.num_nodes() + 100;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (std::sqrt(rho) <= tol) return x;
        Field q = apply(p);
        const double pq = weighted_dot(g, p.values, q.values);
        if (!(pq > 0.0)) throw solve_error("cg breakdown: operator lost positivity");
        const double alpha = rho / pq;
        for (std::size_t k = 0; k < x.values.size(); ++k) {
            x.values[k] += alpha * p.values[k];
            r.values[k] -= alpha * q.values[k];
        }
        const double rho_new = weighted_dot(g, r.values, r.values);
        const double beta = rho_new / rho;
        for (std::size_t k = 0; k < p.values.size(); ++k) {
            p.values[k] = r.values[k] + beta * p.values[k];
        }
        rho = rho_new;
    }
    throw solve_error("cg failed to reach relative residual 1e-10");
}

Field implicit_solve(const Field& rhs, const Field& guess, double c) {
    if (c == 0.0) return rhs;
    if (rhs.grid.domain.dim == 1) return solve_tridiagonal(rhs, c);
    return solve_cg(rhs, guess, c);
}

Field advance_component(const Field& state, const Field& reaction, double dt, double coeff,
                        double theta) {
    const Grid& g = state.grid;
    const bool pinned = detail::boundary_pins_values(g.domain);

    Field rhs = state;
    for (std::size_t k = 0; k < rhs.values.size(); ++k) {
        rhs.values[k] += dt * reaction.values[k];
    }
    if (theta < 1.0) {
        Field lap = apply_stencil(state);
        const double w = (1.0 - theta) * dt * coeff;
        for (std::size_t k = 0; k < rhs.values.size(); ++k) {
            rhs.values[k] += w * lap.values[k];
        }
    }
    if (pinned) {
        const int nx = g.nx(), ny = g.ny();
        for (int j = 0; j < ny; ++j) {
            rhs(0, j) = state(0, j);
            rhs(nx - 1, j) = state(nx - 1, j);
        }
        if (g.domain.dim == 2) {
            for (int i = 0; i < nx; ++i) {
                rhs(i, 0) = state(i, 0);
                rhs(i, ny - 1) = state(i, ny - 1);
            }
        }
    }

    Field next = implicit_solve(rhs, state, theta * dt * coeff);
    require_finite(next, "step_imex");
    return next;
}

double state_total_linf(const SystemState& s) {
    return norm_inf(s.u) + (s.v ? norm_inf(*s.v) : 0.0);
}

double window_growth_factor(const std::vector<TraceSample>& samples) {
    if (samples.size() < 2) return 1.0;
    const double t_end = samples.back().time;
    const double t_from = t_end - kGrowthLookback * (t_end - samples.front().time);
    std::size_t lo = samples.size() - 1;
    while (lo > 0 && samples[lo - 1].time >= t_from) --lo;
    if (lo + 3 > samples.size()) lo = samples.size() >= 3 ? samples.size() - 3 : 0;
    const double first = samples[lo].total_linf();
    const double last = samples.back().total_linf();
    if (!(first > 0.0)) return std::numeric_limits<double>::infinity();
    return last / first;
}

void fit_window(const std::vector<TraceSample>& samples, std::vector<double>& times,
                std::vector<double>& norms) {
    std::vector<double> all_t, all_m;
    all_t.reserve(samples.size());
    all_m.reserve(samples.size());
    for (const TraceSample& s : samples) {
        all_t.push_back(s.time);
        all_m.push_back(s.total_linf());
    }
    select_blowup_fit_window(all_t, all_m, times, norms);
}

}  // namespace

void select_blowup_fit_window(const std::vector<double>& times, const std::vector<double>& norms,
                              std::vector<double>& out_times, std::vector<double>& out_norms) {
    out_times.clear();
    out_norms.clear();
    if (times.empty() || norms.size() != times.size()) return;
    const double last = norms.back();
    if (last > 0.0) {
        const double floor_norm = last * 1e-4;
        double next_log = -std::numeric_limits<double>::infinity();
        const double log_step = std::log(1e4) / 64.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double m = norms[k];
            if (m < floor_norm || m <= 0.0) continue;
            if (std::log(m) >= next_log) {
                out_times.push_back(times[k]);
                out_norms.push_back(m);
                next_log = std::log(m) + log_step;
            }
        }
        // The extrapolation anchors on the final sample; always keep it.
        if (!out_times.empty() && out_times.back() != times.back()) {
            out_times.push_back(times.back());
            out_norms.push_back(last);
        }
    }
    if (out_times.size() < 3) {
        out_times.clear();
        out_norms.clear();
        const std::size_t lo = times.size() >= 3 ? times.size() - 3 : 0;
        for (std::size_t k = lo; k < times.size(); ++k) {
            out_times.push_back(times[k]);
            out_norms.push_back(norms[k]);
        }
    }
}

const char* terminal_name(TerminalKind k) {
    switch (k) {
        case TerminalKind::completed: return "completed";
        case TerminalKind::blowup: return "blowup";
        case TerminalKind::dt_underflow: return "dt_underflow";
    }
    return "unknown";
}

void StepperConfig::validate() const {
    if (!(dt_min > 0.0) || !(dt_init > 0.0) || !(dt_max > 0.0)) {
        throw std::invalid_argument("step sizes must be positive");
    }
    if (!(dt_min <= dt_init && dt_init <= dt_max)) {
        throw std::invalid_argument("need dt_min <= dt_init <= dt_max");
    }
    if (!(error_tol > 0.0)) throw std::invalid_argument("error_tol must be positive");
    if (!(blowup_threshold > 0.0)) throw std::invalid_argument("blowup_threshold must be positive");
    if (!(theta >= 0.5 && theta <= 1.0)) throw std::invalid_argument("theta must be in [1/2, 1]");
    if (record_stride < 0) throw std::invalid_argument("record_stride must be >= 0");
    for (double p : extra_norm_ps) {
        if (!(p >= 1.0)) throw std::invalid_argument("trace norms require p >= 1");
    }
}

void Problem::validate() const {
    grid.domain.validate();
    if (!(a > 0.0)) throw std::invalid_argument("diffusion coefficient a must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!reaction.f) throw std::invalid_argument("problem has no reaction");
    const bool system = reaction.is_system();
    if (system && !(b > 0.0)) {
        throw std::invalid_argument("diffusion coefficient b must be positive");
    }
    if (system != v0.has_value()) {
        throw std::invalid_argument("system problems need v0, scalar problems must not have it");
    }
    if (!(u0.grid == grid) || (v0 && !(v0->grid == grid))) {
        throw std::invalid_argument("initial data grid does not match the problem grid");
    }
    require_finite(u0, "initial data u0");
    if (v0) require_finite(*v0, "initial data v0");
}

SystemState step_imex(const SystemState& state, double t, double dt, const Problem& problem,
                      const StepperConfig& config) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_imex requires dt > 0");
    const Field* v = state.v ? &*state.v : nullptr;

    // Both reactions sample the pre-step state; the coupling is fully explicit.
    Field fu = eval_over_grid(problem.reaction.f, t, problem.grid, &state.u, v);
    SystemState next;
    if (problem.reaction.is_system()) {
        Field fv = eval_over_grid(problem.reaction.g, t, problem.grid, &state.u, v);
        next.u = advance_component(state.u, fu, dt, problem.a, config.theta);
        next.v = advance_component(*state.v, fv, dt, problem.b, config.theta);
    } else {
        next.u = advance_component(state.u, fu, dt, problem.a, config.theta);
    }
    return next;
}

PowerLawFit fit_blowup_time(const std::vector<double>& times, const std::vector<double>& norms) {
    PowerLawFit fit;
    const std::size_t m = times.size();
    if (m < 3 || norms.size() != m) return fit;
    for (double v : norms) {
        if (!(v > 0.0)) return fit;
    }
    if (!(norms.back() > norms.front())) return fit;
    const double t_last = times.back();
    const double span = t_last - times.front();
    if (!(span > 0.0)) return fit;

    auto sse_at = [&](double gap) {
        // Linear regression of log(norm) on log(T - t) with T = t_last + gap.
        long double sz = 0, sy = 0, szz = 0, szy = 0, syy = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double z = std::log(t_last + gap - times[i]);
            const double y = std::log(norms[i]);
            sz += z;
            sy += y;
            szz += z * z;
            szy += z * y;
            syy += y * y;
        }
        const long double n = static_cast<long double>(m);
        const long double denom = n * szz - sz * sz;
        if (!(denom > 0)) return std::make_pair(1e300, 0.0);
        const long double slope = (n * szy - sz * sy) / denom;
        const long double sse = syy - sy * sy / n - slope * slope * denom / n;
        return std::make_pair(static_cast<double>(sse), static_cast<double>(slope));
    };

    // Golden-section in log(gap); the SSE is smooth and unimodal near the pole.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(span * 1e-9);
    double hi = std::log(span * 10.0);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = sse_at(std::exp(x1)).first;
    double f2 = sse_at(std::exp(x2)).first;
    for (int iter = 0; iter < 200; ++iter) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sse_at(std::exp(x1)).first;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sse_at(std::exp(x2)).first;
        }
    }
    const double gap = std::exp((lo + hi) / 2.0);
    auto [sse, slope] = sse_at(gap);
    fit.t_est = t_last + gap;
    fit.beta = -slope;
    fit.rss = sse;
    fit.ok = fit.beta > 0.0;
    if (!fit.ok) fit.t_est = t_last;
    return fit;
}

std::optional<BlowupEvent> detect_blowup(const std::vector<TraceSample>& window,
                                         const StepperConfig& config) {
    if (window.size() < 3) return std::nullopt;
    const TraceSample& last = window.back();

    const bool over_threshold = last.total_linf() >= config.blowup_threshold;
    const bool dt_collapsed = last.dt <= config.dt_min * (1.0 + 1e-9) &&
                              window_growth_factor(window) >= 2.0;
    if (!over_threshold && !dt_collapsed) return std::nullopt;

    BlowupEvent event;
    event.trigger =
        over_threshold ? BlowupEvent::Trigger::threshold : BlowupEvent::Trigger::dt_collapse;
    event.component = (last.v && last.v->linf > last.u.linf) ? 1 : 0;

    std::vector<double> times, norms;
    fit_window(window, times, norms);
    PowerLawFit fit = fit_blowup_time(times, norms);
    event.t_est = fit.ok ? fit.t_est : last.time;
    event.beta = fit.beta;
    return event;
}

namespace {

TraceSample make_trace_sample(const SystemState& state, double t, double dt,
                              const Problem& problem, const StepperConfig& config) {
    TraceSample s;
    s.time = t;
    s.dt = dt;
    s.u = make_component_sample(state.u, config.extra_norm_ps);
    const Field* v = state.v ? &*state.v : nullptr;
    Field fu = eval_over_grid(problem.reaction.f, t, problem.grid, &state.u, v);
    s.f = make_reaction_sample(fu, state.u, v);
    if (problem.reaction.is_system()) {
        s.v = make_component_sample(*state.v, config.extra_norm_ps);
        Field gv = eval_over_grid(problem.reaction.g, t, problem.grid, &state.u, v);
        s.g = make_reaction_sample(gv, state.u, v);
    }
    return s;
}

}  // namespace

SimResult simulate(const Problem& problem, const StepperConfig& config) {
    problem.validate();
    config.validate();
    {
        double init_max = norm_inf(problem.u0);
        if (problem.v0) init_max = std::max(init_max, norm_inf(*problem.v0));
        if (!(config.blowup_threshold > init_max)) {
            throw std::invalid_argument("blowup_threshold must exceed the initial data max");
        }
    }

    auto trace = std::make_shared<Trace>();
    trace->omega_measure = problem.grid.domain.measure();
    trace->horizon = problem.horizon;
    trace->system = problem.reaction.is_system();
    trace->extra_norm_ps = config.extra_norm_ps;

    auto record = std::make_shared<SpaceTimeRecord>();
    record->grid = problem.grid;
    record->stride = config.record_stride;

    SystemState state{problem.u0, problem.v0};
    double t = 0.0;
    double dt = std::clamp(config.dt_init, config.dt_min, config.dt_max);

    SimResult result;
    result.terminal = TerminalKind::completed;

    bool u_dipped = false, v_dipped = false;
    auto note_undershoot = [&](const TraceSample& s) {
        if (!u_dipped && s.u.min < 0.0) {
            trace->undershoots.push_back({s.time, 0, s.u.min});
            u_dipped = true;
        }
        if (s.v && !v_dipped && s.v->min < 0.0) {
            trace->undershoots.push_back({s.time, 1, s.v->min});
            v_dipped = true;
        }
    };

    auto push_record_layer = [&](double time) {
        if (config.record_stride <= 0) return;
        record->times.push_back(time);
        record->u_layers.push_back(state.u);
        if (state.v) record->v_layers.push_back(*state.v);
    };

    trace->samples.push_back(make_trace_sample(state, 0.0, 0.0, problem, config));
    note_undershoot(trace->samples.back());
    push_record_layer(0.0);

    // Reaction overflow while forming a sample means the explicit reaction left
    // the representable range before the norm threshold tripped; treat it the
    // same way as a threshold crossing.
    auto finish_blowup = [&](BlowupEvent::Trigger trigger) {
        BlowupEvent event;
        event.trigger = trigger;
        const TraceSample& last = trace->samples.back();
        event.component = (last.v && last.v->linf > last.u.linf) ? 1 : 0;
        std::vector<double> times, norms;
        fit_window(trace->samples, times, norms);
        PowerLawFit fit = fit_blowup_time(times, norms);
        event.t_est = fit.ok ? fit.t_est : last.time;
        event.beta = fit.beta;
        result.terminal = TerminalKind::blowup;
        result.blowup = event;
    };

    while (t < problem.horizon) {
        const double remaining = problem.horizon - t;
        const bool final_step = remaining <= dt;
        const double dt_try = final_step ? remaining : dt;

        bool attempt_failed = false;
        double est = 0.0;
        SystemState candidate;
        try {
            SystemState full = step_imex(state, t, dt_try, problem, config);
            SystemState half = step_imex(state, t, dt_try / 2.0, problem, config);
            candidate = step_imex(half, t + dt_try / 2.0, dt_try / 2.0, problem, config);
            est = norm_inf_diff(full.u, candidate.u);
            if (candidate.v) est = std::max(est, norm_inf_diff(*full.v, *candidate.v));
        } catch (const eval_error&) {
            attempt_failed = true;
        } catch (const invalid_field_error&) {
            attempt_failed = true;
        } catch (const solve_error&) {
            attempt_failed = true;
        }

        if (!attempt_failed && est <= config.error_tol) {
            state = std::move(candidate);
            t = final_step ? problem.horizon : t + dt_try;
            result.steps_accepted += 1;

            bool sample_overflowed = false;
            try {
                trace->samples.push_back(make_trace_sample(state, t, dt_try, problem, config));
            } catch (const eval_error&) {
                sample_overflowed = true;
            }
            if (sample_overflowed) {
                finish_blowup(BlowupEvent::Trigger::threshold);
                break;
            }
            note_undershoot(trace->samples.back());
            if (config.record_stride > 0 &&
                result.steps_accepted % static_cast<std::size_t>(config.record_stride) == 0) {
                push_record_layer(t);
            }

            if (state_total_linf(state) >= config.blowup_threshold) {
                finish_blowup(BlowupEvent::Trigger::threshold);
                break;
            }
            if (final_step || t >= problem.horizon) break;
        } else {
            result.steps_rejected += 1;
        }

        const double shrink_grow =
            attempt_failed
                ? 0.2
                : std::clamp(0.9 * std::sqrt(config.error_tol / std::max(est, 1e-300)), 0.2, 2.0);
        const double dt_next = std::clamp(dt_try * shrink_grow, config.dt_min, config.dt_max);
        const bool stuck = (attempt_failed || est > config.error_tol) &&
                           dt_try <= config.dt_min * (1.0 + 1e-9);
        if (stuck) {
            if (window_growth_factor(trace->samples) >= 2.0) {
                finish_blowup(BlowupEvent::Trigger::dt_collapse);
            } else {
                result.terminal = TerminalKind::dt_underflow;
            }
            break;
        }
        dt = dt_next;
    }

    // Final layer, unless the last accepted step already landed on it.
    if (config.record_stride > 0 &&
        (record->times.empty() || record->times.back() != t)) {
        push_record_layer(t);
    }

    result.t_end = t;
    result.final_state = std::move(state);
    result.trace = trace;
    result.record = config.record_stride > 0 ? record : nullptr;
    return result;
}

}  // namespace heatlab
