#include "heatlab/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "heatlab/expr.hpp"
#include "heatlab/norms.hpp"

namespace heatlab {

const char* sign_summary_name(SignSummary s) {
    switch (s) {
        case SignSummary::all_positive: return "all-positive";
        case SignSummary::all_negative: return "all-negative";
        case SignSummary::mixed: return "mixed";
        case SignSummary::has_zero: return "has-zero";
    }
    return "unknown";
}

ComponentSample make_component_sample(const Field& f, const std::vector<double>& extra_ps) {
    ComponentSample s;
    s.l1 = norm_p(f, 1.0);
    s.linf = norm_inf(f);
    s.min = min_value(f);
    s.mass = integrate(f);
    s.extra_norms.reserve(extra_ps.size());
    for (double p : extra_ps) s.extra_norms.push_back(norm_p(f, p));
    return s;
}

ReactionSample make_reaction_sample(const Field& reaction, const Field& u, const Field* v) {
    const Grid& g = reaction.grid;
    ReactionSample s;
    s.min = min_value(reaction);
    s.max = max_value(reaction);
    const double zero_tol = 1e-10 * (1.0 + std::max(std::abs(s.min), std::abs(s.max)));

    bool touches_zero = false;
    double best_abs = std::numeric_limits<double>::infinity();
    int best_i = 0, best_j = 0;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const double fv = reaction.values[g.index(i, j)];
            if (std::abs(fv) <= zero_tol) touches_zero = true;
            if (std::abs(fv) < best_abs) {
                best_abs = std::abs(fv);
                best_i = i;
                best_j = j;
            }
        }
    }

    const bool pos = s.max > zero_tol;
    const bool neg = s.min < -zero_tol;
    if (pos && neg) {
        s.sign = SignSummary::mixed;
    } else if (touches_zero || (!pos && !neg)) {
        s.sign = SignSummary::has_zero;
    } else {
        s.sign = pos ? SignSummary::all_positive : SignSummary::all_negative;
    }

    const std::size_t idx = g.index(best_i, best_j);
    s.witness_x = g.x(best_i);
    s.witness_y = g.y(best_j);
    s.witness_u = u.values[idx];
    s.witness_v = v ? v->values[idx] : 0.0;
    s.witness_value = reaction.values[idx];
    return s;
}

std::string trace_to_csv(const Trace& trace, const std::string& config_hash) {
    std::string out;
    out += "# schema_version=1\n";
    if (!config_hash.empty()) {
        out += "# config_hash=" + config_hash + "\n";
    }
    out += trace.system ? "t,dt,l1_u,linf_u,min_u,mass_u,l1_v,linf_v,min_v,mass_v,f_min,f_max,f_sign\n"
                        : "t,dt,l1_u,linf_u,min_u,mass_u,f_min,f_max,f_sign\n";
    auto put = [&out](double v) {
        out += format_double(v);
        out += ',';
    };
    for (const TraceSample& s : trace.samples) {
        put(s.time);
        put(s.dt);
        put(s.u.l1);
        put(s.u.linf);
        put(s.u.min);
        put(s.u.mass);
        if (trace.system) {
            put(s.v->l1);
            put(s.v->linf);
            put(s.v->min);
            put(s.v->mass);
        }
        put(s.f.min);
        put(s.f.max);
        out += sign_summary_name(s.f.sign);
        out += '\n';
    }
    return out;
}

}  // namespace heatlab
