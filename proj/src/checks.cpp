#include "heatlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "heatlab/errors.hpp"
#include "heatlab/norms.hpp"

namespace heatlab {

const char* condition_name(ConditionId c) {
    switch (c) {
        case ConditionId::P: return "P";
        case ConditionId::P3prime: return "P3prime";
        case ConditionId::H17: return "H17";
        case ConditionId::MU1: return "MU1";
        case ConditionId::Mprime: return "Mprime";
        case ConditionId::Mstrict: return "Mstrict";
    }
    return "unknown";
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::undetermined: return "undetermined";
    }
    return "unknown";
}

namespace {

nlohmann::json witness_to_json(const Witness& w) {
    nlohmann::json j;
    j["t"] = w.t;
    j["x"] = w.x;
    j["y"] = w.y;
    j["u"] = w.u;
    if (w.has_v) j["v"] = w.v;
    j["value"] = w.value;
    return j;
}

Witness witness_from_sample(const TraceSample& sample, const ReactionSample& r, bool system) {
    Witness w;
    w.t = sample.time;
    w.x = r.witness_x;
    w.y = r.witness_y;
    w.u = r.witness_u;
    w.v = r.witness_v;
    w.value = r.witness_value;
    w.has_v = system;
    return w;
}

bool strictly_signed(SignSummary s) {
    return s == SignSummary::all_positive || s == SignSummary::all_negative;
}

}  // namespace

nlohmann::json report_to_json(const HypothesisReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["condition"] = condition_name(report.condition);
    j["verdict"] = verdict_name(report.verdict);
    if (report.witness) j["witness"] = witness_to_json(*report.witness);
    if (report.t0_detected) j["t0_detected"] = *report.t0_detected;
    if (!report.note.empty()) j["note"] = report.note;
    return j;
}

// ---------------------------------------------------------------------------
// Sign condition
// ---------------------------------------------------------------------------

HypothesisReport check_sign_condition(const Trace& trace, const SignConditionOptions& options) {
    HypothesisReport report;
    report.condition = trace.system ? ConditionId::MU1 : ConditionId::H17;
    if (trace.samples.empty()) {
        report.verdict = Verdict::undetermined;
        report.note = "empty trace";
        return report;
    }

    const auto& samples = trace.samples;
    auto sample_uniform = [&](const TraceSample& s) {
        if (!strictly_signed(s.f.sign)) return false;
        if (trace.system && (!s.g || !strictly_signed(s.g->sign))) return false;
        return true;
    };

    // Longest suffix over which each reaction keeps one strict sign.
    std::size_t start = samples.size();
    SignSummary f_sign = SignSummary::has_zero;
    SignSummary g_sign = SignSummary::has_zero;
    for (std::size_t k = samples.size(); k-- > 0;) {
        const TraceSample& s = samples[k];
        if (!sample_uniform(s)) break;
        if (start == samples.size()) {
            f_sign = s.f.sign;
            if (trace.system) g_sign = s.g->sign;
        } else if (s.f.sign != f_sign || (trace.system && s.g->sign != g_sign)) {
            break;
        }
        start = k;
    }

    const double t_first = samples.front().time;
    const double t_last = samples.back().time;
    const double span = t_last - t_first;

    if (start == samples.size()) {
        // Not even the final sample is strictly signed.
        report.verdict = Verdict::fails;
        const TraceSample& bad = samples.back();
        const bool g_broke = trace.system && bad.g && !strictly_signed(bad.g->sign);
        report.witness = witness_from_sample(bad, g_broke ? *bad.g : bad.f, trace.system);
        report.note = "reaction sign is not uniform at the final sample";
        return report;
    }

    const double t_bar = start == 0 ? t_first : samples[start - 1].time;
    report.t0_detected = t_bar;

    const double tail = t_last - t_bar;
    if (start == 0 || tail >= options.min_tail_fraction * span) {
        report.verdict = Verdict::holds;
        report.note = std::string("uniform sign ") +
                      sign_summary_name(samples.back().f.sign) + " after t0";
        return report;
    }

    // The sign flipped too close to the horizon to call it settled.
    report.verdict = Verdict::fails;
    const TraceSample& bad = samples[start - 1];
    const bool g_broke = trace.system && bad.g && !strictly_signed(bad.g->sign);
    report.witness = witness_from_sample(bad, g_broke ? *bad.g : bad.f, trace.system);
    report.note = "last sign change at t = " + format_double(t_bar) +
                  " leaves a uniform tail shorter than the required fraction " +
                  format_double(options.min_tail_fraction) + " of the trace";
    return report;
}

// ---------------------------------------------------------------------------
// Positivity at the axes
// ---------------------------------------------------------------------------

namespace {

const std::vector<double>& positivity_time_grid() {
    static const std::vector<double> grid{0.0, 0.1, 1.0, 10.0};
    return grid;
}

std::vector<double> positivity_space_grid() {
    std::vector<double> xs;
    for (int i = 0; i <= 16; ++i) xs.push_back(i / 16.0);
    return xs;
}

// Capped at 100: large enough to probe growth, small enough that exponential
// families stay evaluable (the condition itself is sampled, not proven).
const std::vector<double>& positivity_partner_grid() {
    static const std::vector<double> grid{0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
    return grid;
}

}  // namespace

HypothesisReport check_positivity_condition(const ReactionSpec& reaction) {
    HypothesisReport report;
    report.condition = reaction.is_system() ? ConditionId::P3prime : ConditionId::P;
    report.verdict = Verdict::holds;

    const double zero_tol = 1e-10;
    auto probe = [&](const ExprPtr& expr, bool zero_in_u, double t, double x,
                     double partner) -> bool {
        Bindings b;
        b.t = t;
        b.x = x;
        b.y = 0.0;
        b.u = zero_in_u ? 0.0 : partner;
        b.v = zero_in_u ? partner : 0.0;
        double value = 0.0;
        bool finite = true;
        try {
            value = eval(expr, b);
        } catch (const eval_error&) {
            finite = false;
        }
        Witness w;
        w.t = t;
        w.x = x;
        w.u = *b.u;
        w.v = *b.v;
        w.has_v = reaction.is_system();
        if (!finite) {
            report.verdict = Verdict::undetermined;
            w.value = std::numeric_limits<double>::quiet_NaN();
            report.witness = w;
            report.note = "non-finite evaluation at a sample";
            return false;
        }
        if (value < -zero_tol * (1.0 + std::abs(value))) {
            report.verdict = Verdict::fails;
            w.value = value;
            report.witness = w;
            return false;
        }
        return true;
    };

    for (double t : positivity_time_grid()) {
        for (double x : positivity_space_grid()) {
            if (!reaction.is_system()) {
                if (!probe(reaction.f, true, t, x, 0.0)) return report;
                continue;
            }
            for (double partner : positivity_partner_grid()) {
                if (!probe(reaction.f, true, t, x, partner)) return report;
                if (!probe(reaction.g, false, t, x, partner)) return report;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Mass control
// ---------------------------------------------------------------------------

namespace {

HypothesisReport mass_control_impl(const ReactionSpec& pair, double C, bool strict) {
    if (!pair.is_system()) {
        throw std::invalid_argument("mass control applies to system pairs");
    }
    HypothesisReport report;
    report.condition = strict ? ConditionId::Mstrict : ConditionId::Mprime;

    std::vector<double> uv_grid{1e-3, 1e-2, 0.1, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6};
    const std::vector<double> ts{0.0, 0.1, 1.0, 10.0};
    const std::vector<double> xs{0.0, 0.5, 1.0};

    std::size_t evaluable = 0, skipped = 0;
    double worst = -std::numeric_limits<double>::infinity();
    Witness worst_witness;

    for (double t : ts) {
        for (double x : xs) {
            for (double uu : uv_grid) {
                for (double vv : uv_grid) {
                    Bindings b;
                    b.t = t;
                    b.x = x;
                    b.y = 0.0;
                    b.u = uu;
                    b.v = vv;
                    const double fv = eval_unchecked(pair.f, b);
                    const double gv = eval_unchecked(pair.g, b);
                    const double sum = fv + gv;
                    if (!std::isfinite(fv) || !std::isfinite(gv) || !std::isfinite(sum)) {
                        // Exponential pairs overflow well inside the sampled
                        // box; the verdict covers the evaluable samples.
                        skipped += 1;
                        continue;
                    }
                    evaluable += 1;
                    const double bound = strict ? 0.0 : C * (uu + vv + 1.0);
                    const double margin = sum - bound;
                    const double tol =
                        1e-10 * (1.0 + std::abs(fv) + std::abs(gv) + std::abs(bound));
                    if (margin > tol && margin > worst) {
                        worst = margin;
                        worst_witness = Witness{t, x, 0.0, uu, vv, margin, true};
                    }
                }
            }
        }
    }

    if (evaluable == 0) {
        report.verdict = Verdict::undetermined;
        report.note = "no finite samples on the (u,v) grid";
        return report;
    }
    if (worst > 0.0) {
        report.verdict = Verdict::fails;
        report.witness = worst_witness;
    } else {
        report.verdict = Verdict::holds;
    }
    if (skipped > 0) {
        report.note = format_double(static_cast<double>(skipped)) +
                      " samples skipped as non-finite (exponential overflow)";
    }
    return report;
}

}  // namespace

HypothesisReport check_mass_control(const ReactionSpec& pair, double C) {
    if (!(C >= 0.0) || !std::isfinite(C)) {
        throw std::invalid_argument("mass-control constant C must be nonnegative");
    }
    return mass_control_impl(pair, C, false);
}

HypothesisReport check_strict_mass_control(const ReactionSpec& pair) {
    return mass_control_impl(pair, 0.0, true);
}

// ---------------------------------------------------------------------------
// Gronwall ledger
// ---------------------------------------------------------------------------

GronwallLedger gronwall_ledger(const Trace& trace, double C) {
    if (!(C > 0.0)) throw std::invalid_argument("gronwall constant C must be positive");
    GronwallLedger ledger;
    if (trace.samples.size() < 3) {
        ledger.verdict = Verdict::undetermined;
        return ledger;
    }

    const double omega = trace.omega_measure;
    auto mass_at = [&](const TraceSample& s) {
        return s.u.mass + (s.v ? s.v->mass : 0.0);
    };

    double y_max = 0.0;
    for (const TraceSample& s : trace.samples) y_max = std::max(y_max, std::abs(mass_at(s)));
    const double slope_tol = 1e-6 * (1.0 + y_max);

    ledger.verdict = Verdict::holds;
    double c_prime = 0.0;
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        const TraceSample& s = trace.samples[k];
        const double y = mass_at(s);
        c_prime = std::max(c_prime, (y + omega) / std::exp(C * s.time));
        if (k + 1 < trace.samples.size()) {
            const TraceSample& next = trace.samples[k + 1];
            const double dt = next.time - s.time;
            if (!(dt > 0.0)) continue;
            const double dy = (mass_at(next) - y) / dt;
            if (dy > C * (y + omega) + slope_tol) {
                ledger.verdict = Verdict::fails;
                if (!ledger.violation) {
                    Witness w;
                    w.t = s.time;
                    w.u = y;
                    w.value = dy - C * (y + omega);
                    ledger.violation = w;
                }
            }
            ledger.samples_checked += 1;
        }
    }
    ledger.fitted_c_prime = c_prime;
    return ledger;
}

nlohmann::json gronwall_to_json(const GronwallLedger& ledger) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["verdict"] = verdict_name(ledger.verdict);
    j["fitted_c_prime"] = ledger.fitted_c_prime;
    j["samples_checked"] = ledger.samples_checked;
    if (ledger.violation) j["violation"] = witness_to_json(*ledger.violation);
    return j;
}

// ---------------------------------------------------------------------------
// Maximum principle
// ---------------------------------------------------------------------------

namespace {

bool on_box_boundary(const Grid& g, int i, int j) {
    if (i == 0 || i == g.nx() - 1) return true;
    return g.domain.dim == 2 && (j == 0 || j == g.ny() - 1);
}

}  // namespace

MaxPrincipleVerdict max_principle_oracle(const SpaceTimeRecord& record,
                                         PrincipleDirection direction, int component,
                                         double mp_tol) {
    if (record.times.empty()) throw std::invalid_argument("empty space-time record");
    const auto& layers = component == 0 ? record.u_layers : record.v_layers;
    if (layers.size() != record.times.size()) {
        throw std::invalid_argument("record has no layers for the requested component");
    }
    const Grid& g = record.grid;
    const double sgn = direction == PrincipleDirection::sub ? 1.0 : -1.0;

    double all_extreme = -std::numeric_limits<double>::infinity();
    double gamma_extreme = -std::numeric_limits<double>::infinity();
    for (std::size_t layer = 0; layer < layers.size(); ++layer) {
        const Field& f = layers[layer];
        const bool initial = layer == 0;
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                const double value = sgn * f.values[g.index(i, j)];
                all_extreme = std::max(all_extreme, value);
                if (initial || on_box_boundary(g, i, j)) {
                    gamma_extreme = std::max(gamma_extreme, value);
                }
            }
        }
    }

    MaxPrincipleVerdict verdict;
    verdict.tol = mp_tol;
    verdict.interior_extremum = sgn * all_extreme;
    verdict.boundary_extremum = sgn * gamma_extreme;
    verdict.excess = all_extreme - gamma_extreme;
    verdict.holds = verdict.excess <= mp_tol;
    return verdict;
}

nlohmann::json max_principle_to_json(const MaxPrincipleVerdict& verdict) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["holds"] = verdict.holds;
    j["interior_extremum"] = verdict.interior_extremum;
    j["boundary_extremum"] = verdict.boundary_extremum;
    j["excess"] = verdict.excess;
    j["tol"] = verdict.tol;
    return j;
}

// ---------------------------------------------------------------------------
// Value-repetition probe
// ---------------------------------------------------------------------------

namespace {

double reaction_at(const ReactionSpec& reaction, double t, double x, double y, double u,
                   const std::optional<double>& v) {
    Bindings b;
    b.t = t;
    b.x = x;
    b.y = y;
    b.u = u;
    if (v) b.v = *v;
    return eval_unchecked(reaction.f, b);
}

}  // namespace

Lemma1Result lemma1_probe(const SpaceTimeRecord& record, const ReactionSpec& reaction,
                          double level, double zero_tol, double level_tol) {
    if (!(level > 0.0)) throw std::invalid_argument("lemma1 level must be positive");
    Lemma1Result result;
    const Grid& g = record.grid;
    const std::size_t layers = record.times.size();
    if (layers < 2) return result;
    const bool system = !record.v_layers.empty();

    // Crossing times of u = level, per node, located by linear interpolation
    // between recorded layers.
    std::vector<double> crossings;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t idx = g.index(i, j);
            for (std::size_t l = 0; l + 1 < layers; ++l) {
                const double w0 = record.u_layers[l].values[idx] - level;
                const double w1 = record.u_layers[l + 1].values[idx] - level;
                if (std::abs(w0) <= level_tol) {
                    crossings.push_back(record.times[l]);
                } else if ((w0 < 0.0) != (w1 < 0.0)) {
                    const double frac = w0 / (w0 - w1);
                    crossings.push_back(record.times[l] +
                                        frac * (record.times[l + 1] - record.times[l]));
                }
            }
            if (std::abs(record.u_layers[layers - 1].values[idx] - level) <= level_tol) {
                crossings.push_back(record.times[layers - 1]);
            }
        }
    }
    std::sort(crossings.begin(), crossings.end());
    if (crossings.size() < 3) return result;

    const double t1 = crossings.front();
    const double t3 = crossings.back();
    const double eps = 1e-9 * (1.0 + t3 - t1);
    double t2 = t1;
    for (double c : crossings) {
        if (c > t1 + eps && c < t3 - eps) {
            t2 = c;
            break;
        }
    }
    if (!(t2 > t1) || !(t2 < t3)) return result;
    result.crossing_times = {t1, t2, t3};

    auto value_at = [&](std::size_t layer, std::size_t idx) {
        const double u = record.u_layers[layer].values[idx];
        std::optional<double> v;
        if (system) v = record.v_layers[layer].values[idx];
        const int i = static_cast<int>(idx) % g.nx();
        const int j = static_cast<int>(idx) / g.nx();
        return reaction_at(reaction, record.times[layer], g.x(i), g.y(j), u, v);
    };

    // Pass 1: a recorded sample with |f| <= zero_tol inside (t1, t3).
    double best_abs = std::numeric_limits<double>::infinity();
    std::size_t best_layer = 0, best_idx = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        if (!(record.times[l] > t1 && record.times[l] < t3)) continue;
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            const double f = value_at(l, idx);
            if (std::abs(f) < best_abs) {
                best_abs = std::abs(f);
                best_layer = l;
                best_idx = idx;
            }
        }
    }
    auto make_witness = [&](double t, std::size_t idx, double u, double v, double f) {
        Witness w;
        w.t = t;
        w.x = g.x(static_cast<int>(idx) % g.nx());
        w.y = g.y(static_cast<int>(idx) / g.nx());
        w.u = u;
        w.v = v;
        w.value = f;
        w.has_v = system;
        return w;
    };
    if (best_abs <= zero_tol) {
        result.status = Lemma1Result::Status::witness_found;
        result.witness = make_witness(record.times[best_layer], best_idx,
                                      record.u_layers[best_layer].values[best_idx],
                                      system ? record.v_layers[best_layer].values[best_idx] : 0.0,
                                      value_at(best_layer, best_idx));
        return result;
    }

    // Pass 2: per-node sign change of f between consecutive layers, refined by
    // bisection in time on the linearly interpolated state.
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        const double ta = std::max(record.times[l], t1 + eps);
        const double tb = std::min(record.times[l + 1], t3 - eps);
        if (!(ta < tb)) continue;
        for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
            const int i = static_cast<int>(idx) % g.nx();
            const int j = static_cast<int>(idx) / g.nx();
            const double x = g.x(i), y = g.y(j);
            auto f_lerp = [&](double tau) {
                const double frac =
                    (tau - record.times[l]) / (record.times[l + 1] - record.times[l]);
                const double u = (1.0 - frac) * record.u_layers[l].values[idx] +
                                 frac * record.u_layers[l + 1].values[idx];
                std::optional<double> v;
                if (system) {
                    v = (1.0 - frac) * record.v_layers[l].values[idx] +
                        frac * record.v_layers[l + 1].values[idx];
                }
                return std::make_pair(reaction_at(reaction, tau, x, y, u, v), u);
            };
            const double fa = f_lerp(ta).first;
            const double fb = f_lerp(tb).first;
            if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
            if ((fa < 0.0) == (fb < 0.0)) continue;
            double lo = ta, hi = tb;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                auto [fm, um] = f_lerp(mid);
                if (std::abs(fm) <= zero_tol) {
                    result.status = Lemma1Result::Status::witness_found;
                    result.witness = make_witness(mid, idx, um, 0.0, fm);
                    return result;
                }
                if ((fm < 0.0) == (fa < 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }

    result.status = Lemma1Result::Status::violated;
    return result;
}

nlohmann::json lemma1_to_json(const Lemma1Result& result) {
    nlohmann::json j;
    j["schema_version"] = 1;
    switch (result.status) {
        case Lemma1Result::Status::not_applicable: j["status"] = "not_applicable"; break;
        case Lemma1Result::Status::witness_found: j["status"] = "witness_found"; break;
        case Lemma1Result::Status::violated: j["status"] = "lemma violated numerically"; break;
    }
    if (result.status != Lemma1Result::Status::not_applicable) {
        j["crossing_times"] = result.crossing_times;
    }
    if (result.witness) j["witness"] = witness_to_json(*result.witness);
    return j;
}

// ---------------------------------------------------------------------------
// Smoothing fit
// ---------------------------------------------------------------------------

Field near_delta_field(const Grid& grid, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("near_delta_field requires p >= 1");
    Field f(grid, 0.0);
    const int ci = grid.nx() / 2;
    const int cj = grid.domain.dim == 2 ? grid.ny() / 2 : 0;
    if (p == 1.0) {
        f(ci, cj) = 1.0;
    } else {
        const double n = grid.domain.dim;
        const double exponent = n / p;
        const double xc = grid.x(ci), yc = grid.y(cj);
        double hmin = grid.spacing(0);
        if (grid.domain.dim == 2) hmin = std::min(hmin, grid.spacing(1));
        for (int j = 0; j < grid.ny(); ++j) {
            for (int i = 0; i < grid.nx(); ++i) {
                const double dx = grid.x(i) - xc;
                const double dy = grid.y(j) - yc;
                const double r = std::max(std::sqrt(dx * dx + dy * dy), 0.5 * hmin);
                f(i, j) = std::pow(r, -exponent);
            }
        }
    }
    const double scale = norm_p(f, p);
    for (double& v : f.values) v /= scale;
    return f;
}

std::vector<double> log_spaced_times(double t_min, double t_max, int count) {
    if (!(t_min > 0.0) || !(t_max > t_min) || count < 2) {
        throw std::invalid_argument("log_spaced_times requires 0 < t_min < t_max, count >= 2");
    }
    std::vector<double> ts(count);
    const double log_lo = std::log(t_min), log_hi = std::log(t_max);
    for (int k = 0; k < count; ++k) {
        ts[k] = std::exp(log_lo + (log_hi - log_lo) * k / (count - 1));
    }
    return ts;
}

SmoothingFit fit_smoothing(double p, double q, const Field& initial, double coeff,
                           const std::vector<double>& t_samples,
                           const SmoothingFitOptions& options) {
    if (!(p >= 1.0) || !(q <= std::numeric_limits<double>::infinity()) || !(p < q)) {
        throw std::invalid_argument("fit_smoothing requires 1 <= p < q <= inf");
    }
    if (t_samples.size() < 8) {
        throw std::invalid_argument("fit_smoothing requires at least 8 sample times");
    }

    const Grid& g = initial.grid;
    NeumannHeatPropagator prop(g);

    auto boundary_amplitude = [&g](const Field& f) {
        double peak = 0.0;
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < g.nx(); ++i) {
                if (!on_box_boundary(g, i, j)) continue;
                peak = std::max(peak, std::abs(f.values[g.index(i, j)]));
            }
        }
        return peak;
    };
    // A sample is in the small-time window while the boundary amplitude has
    // not risen materially above its initial level. For a single-node spike
    // (zero at the walls) this is the plain "boundary < 1e-6 of peak" rule;
    // power-profile spikes get a 25% allowance because the Neumann reflection
    // heals their nonzero wall slope by O(sqrt(t)) immediately, long before
    // any central mass arrives.
    const double boundary0 = boundary_amplitude(initial);

    std::vector<double> log_t, log_norm;
    for (double t : t_samples) {
        if (!(t > 0.0)) throw std::invalid_argument("sample times must be positive");
        Field evolved = prop.propagate(initial, coeff, t);
        if (options.boundary_quiet_guard &&
            boundary_amplitude(evolved) >= 1.25 * boundary0 + 1e-6 * norm_inf(evolved)) {
            continue;  // the spike has reached the wall
        }
        log_t.push_back(std::log(t));
        log_norm.push_back(std::log(norm_p(evolved, q)));
    }
    if (log_t.size() < 8) {
        throw std::invalid_argument("fewer than 8 samples inside the boundary-quiet window");
    }

    long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const long double n = static_cast<long double>(log_t.size());
    for (std::size_t k = 0; k < log_t.size(); ++k) {
        sx += log_t[k];
        sy += log_norm[k];
        sxx += static_cast<long double>(log_t[k]) * log_t[k];
        sxy += static_cast<long double>(log_t[k]) * log_norm[k];
        syy += static_cast<long double>(log_norm[k]) * log_norm[k];
    }
    const long double denom = n * sxx - sx * sx;
    const long double slope = (n * sxy - sx * sy) / denom;
    const long double intercept = (sy - slope * sx) / n;
    const long double ss_tot = syy - sy * sy / n;
    const long double ss_res = ss_tot - slope * slope * denom / n;

    SmoothingFit fit;
    fit.p = p;
    fit.q = q;
    fit.n = g.domain.dim;
    fit.fitted_slope = static_cast<double>(slope);
    fit.intercept = static_cast<double>(intercept);
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    fit.theoretical_slope = -(g.domain.dim / 2.0) * (1.0 / p - inv_q);
    fit.fitted_c = std::exp(fit.intercept) / norm_p(initial, p);
    fit.r2 = ss_tot > 0 ? static_cast<double>(1.0L - ss_res / ss_tot) : 1.0;
    fit.samples_used = static_cast<int>(log_t.size());
    return fit;
}

nlohmann::json smoothing_to_json(const SmoothingFit& fit) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["p"] = fit.p;
    j["q"] = std::isinf(fit.q) ? nlohmann::json("inf") : nlohmann::json(fit.q);
    j["n"] = fit.n;
    j["fitted_slope"] = fit.fitted_slope;
    j["theoretical_slope"] = fit.theoretical_slope;
    j["intercept"] = fit.intercept;
    j["fitted_c"] = fit.fitted_c;
    j["r2"] = fit.r2;
    j["samples_used"] = fit.samples_used;
    return j;
}

// ---------------------------------------------------------------------------
// Exponential-growth trend
// ---------------------------------------------------------------------------

ExpGrowthTrend check_exp_growth_trend(const ExprPtr& F, const ExprPtr& G) {
    ExpGrowthTrend trend;
    auto eval_v = [](const ExprPtr& e, double v) {
        Bindings b;
        b.t = 0.0;
        b.x = 0.0;
        b.y = 0.0;
        b.u = 1.0;
        b.v = v;
        return eval_unchecked(e, b);
    };

    double prev_ratio = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (double v = 1.0; v <= 1e3; v *= std::pow(10.0, 0.25)) {
        const double h = 1e-4 * v;
        const double g_prime = (eval_v(G, v + h) - eval_v(G, v - h)) / (2.0 * h);
        const double f_val = eval_v(F, v);
        const double ratio = g_prime / f_val;
        if (!std::isfinite(ratio)) break;  // exponential overflow ends the grid
        if (trend.samples == 0) trend.first_ratio = ratio;
        trend.last_ratio = ratio;
        trend.samples += 1;
        if (ratio > prev_ratio * (1.0 + 1e-9)) decreasing = false;
        prev_ratio = ratio;
    }
    trend.ratio_decreasing = trend.samples >= 2 && decreasing &&
                             trend.last_ratio < trend.first_ratio;
    return trend;
}

nlohmann::json exp_growth_to_json(const ExpGrowthTrend& trend) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["ratio_decreasing"] = trend.ratio_decreasing;
    j["first_ratio"] = trend.first_ratio;
    j["last_ratio"] = trend.last_ratio;
    j["samples"] = trend.samples;
    j["heuristic"] = trend.heuristic;
    return j;
}

// ---------------------------------------------------------------------------
// Theorem probe
// ---------------------------------------------------------------------------

const char* theorem_cell_name(const TheoremProbe& probe) {
    if (probe.hypotheses_held) {
        return probe.conclusion == TheoremProbe::Conclusion::bounded
                   ? "held_bounded"
                   : "held_growth_counterexample_candidate";
    }
    return probe.conclusion == TheoremProbe::Conclusion::bounded ? "failed_bounded"
                                                                 : "failed_growth";
}

TheoremProbe theorem_probe(const Trace& trace, const TheoremProbeInputs& inputs) {
    if (trace.samples.empty()) throw std::invalid_argument("theorem_probe needs a trace");
    TheoremProbe probe;
    probe.omega_measure = trace.omega_measure;
    probe.t0 = inputs.sign.t0_detected.value_or(trace.samples.front().time);

    const TraceSample& first = trace.samples.front();
    double l1_initial = first.u.l1 + (first.v ? first.v->l1 : 0.0);
    probe.l1_cap = inputs.l1_cap.value_or(10.0 * l1_initial * (1.0 + trace.omega_measure));

    bool alpha_set = false;
    for (const TraceSample& s : trace.samples) {
        if (s.time < probe.t0) continue;
        if (!alpha_set) {
            probe.alpha = s.u.linf;
            alpha_set = true;
        }
        probe.m1 = std::max(probe.m1, s.u.l1);
        double l1 = std::max(s.u.l1, s.v ? s.v->l1 : 0.0);
        probe.l1_sup = std::max(probe.l1_sup, l1);
    }
    probe.l1_bounded = probe.l1_sup <= probe.l1_cap;
    probe.epsilon_lower =
        probe.alpha > 0.0
            ? std::max(1.0, probe.m1 / (probe.alpha * trace.omega_measure))
            : std::numeric_limits<double>::infinity();

    bool held = inputs.sign.verdict == Verdict::holds && probe.l1_bounded;
    if (inputs.positivity) held = held && inputs.positivity->verdict == Verdict::holds;
    if (inputs.mass_control) held = held && inputs.mass_control->verdict == Verdict::holds;
    probe.hypotheses_held = held;

    probe.conclusion = inputs.terminal == TerminalKind::completed
                           ? TheoremProbe::Conclusion::bounded
                           : TheoremProbe::Conclusion::growth;
    probe.counterexample_candidate =
        probe.hypotheses_held && probe.conclusion == TheoremProbe::Conclusion::growth;
    return probe;
}

nlohmann::json theorem_to_json(const TheoremProbe& probe) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["hypotheses"] = probe.hypotheses_held ? "held" : "failed";
    j["conclusion"] =
        probe.conclusion == TheoremProbe::Conclusion::bounded ? "bounded" : "growth";
    j["cell"] = theorem_cell_name(probe);
    j["counterexample_candidate"] = probe.counterexample_candidate;
    j["l1_sup"] = probe.l1_sup;
    j["l1_cap"] = probe.l1_cap;
    j["t0"] = probe.t0;
    j["m1"] = probe.m1;
    j["alpha"] = probe.alpha;
    j["omega_measure"] = probe.omega_measure;
    j["epsilon_lower_bound"] = probe.epsilon_lower;
    return j;
}

}  // namespace heatlab
