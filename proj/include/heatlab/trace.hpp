#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/grid.hpp"

namespace heatlab {

// Sign classification of a sampled reaction field. "strict" means bounded away
// from zero by the scale-aware tolerance zero_tol = 1e-10 * (1 + max|f|).
enum class SignSummary { all_positive, all_negative, mixed, has_zero };

const char* sign_summary_name(SignSummary s);

struct ComponentSample {
    double l1 = 0.0;
    double linf = 0.0;
    double min = 0.0;
    double mass = 0.0;                // signed integral
    std::vector<double> extra_norms;  // aligned with Trace::extra_norm_ps
};

struct ReactionSample {
    double min = 0.0;
    double max = 0.0;
    SignSummary sign = SignSummary::has_zero;
    // Node minimizing |f|, kept as the witness for sign-condition reports.
    double witness_x = 0.0;
    double witness_y = 0.0;
    double witness_u = 0.0;
    double witness_v = 0.0;
    double witness_value = 0.0;
};

struct TraceSample {
    double time = 0.0;
    double dt = 0.0;  // accepted step that produced this state; 0 for the initial layer
    ComponentSample u;
    std::optional<ComponentSample> v;
    ReactionSample f;
    std::optional<ReactionSample> g;

    // max-norm feeding the blow-up detector: ||u||inf (+ ||v||inf for systems)
    double total_linf() const { return u.linf + (v ? v->linf : 0.0); }
};

struct UndershootEvent {
    double time = 0.0;
    int component = 0;  // 0 = u, 1 = v
    double min_value = 0.0;
};

// Per-accepted-step statistics of one simulation.
struct Trace {
    double omega_measure = 0.0;
    double horizon = 0.0;
    bool system = false;
    std::vector<double> extra_norm_ps;
    std::vector<TraceSample> samples;
    std::vector<UndershootEvent> undershoots;  // first dip below zero per component
};

// Strided snapshots of the full fields for the space-time probes. Verdicts of
// the probes are statements about this strided sample set.
struct SpaceTimeRecord {
    Grid grid;
    int stride = 10;
    std::vector<double> times;
    std::vector<Field> u_layers;
    std::vector<Field> v_layers;  // empty for scalar problems
};

ComponentSample make_component_sample(const Field& f, const std::vector<double>& extra_ps);
ReactionSample make_reaction_sample(const Field& reaction, const Field& u, const Field* v);

// Writes the pinned CSV layout:
//   t,dt,l1_u,linf_u,min_u,mass_u[,l1_v,linf_v,min_v,mass_v],f_min,f_max,f_sign
// preceded by "# schema_version=1" and, when given, "# config_hash=...".
std::string trace_to_csv(const Trace& trace, const std::string& config_hash = "");

}  // namespace heatlab
