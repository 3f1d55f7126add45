#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "heatlab/grid.hpp"
#include "heatlab/reactions.hpp"
#include "heatlab/trace.hpp"

namespace heatlab {

struct StepperConfig {
    double dt_init = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 0.1;
    double error_tol = 1e-6;
    double blowup_threshold = 1e8;
    double theta = 1.0;  // implicitness of diffusion in [1/2, 1]; 1 = backward Euler
    int record_stride = 10;  // space-time record stride; 0 disables the record
    std::vector<double> extra_norm_ps;

    void validate() const;  // throws std::invalid_argument
};

struct Problem {
    Grid grid;
    double a = 1.0;
    double b = 1.0;  // diffusion of the second component (systems only)
    ReactionSpec reaction;
    Field u0;
    std::optional<Field> v0;  // present iff reaction is a system pair
    double horizon = 1.0;

    void validate() const;
};

struct SystemState {
    Field u;
    std::optional<Field> v;
};

enum class TerminalKind { completed, blowup, dt_underflow };

const char* terminal_name(TerminalKind k);

struct BlowupEvent {
    enum class Trigger { threshold, dt_collapse };
    double t_est = 0.0;
    double beta = 0.0;  // fitted exponent of ||u||inf ~ K (T-t)^(-beta)
    int component = 0;  // 0 = u, 1 = v
    Trigger trigger = Trigger::threshold;
};

struct SimResult {
    TerminalKind terminal = TerminalKind::completed;
    double t_end = 0.0;
    std::optional<BlowupEvent> blowup;
    SystemState final_state;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;
    std::shared_ptr<const Trace> trace;
    std::shared_ptr<const SpaceTimeRecord> record;
};

// One IMEX theta step: reaction explicit at (t, state), diffusion theta-implicit,
//   (I - theta*dt*a*L) u_new = u + dt*f(t,u) + (1-theta)*dt*a*L u.
// 1D solves by tridiagonal elimination, 2D by conjugate gradients in the
// trapezoid-weighted inner product (relative residual 1e-10).
SystemState step_imex(const SystemState& state, double t, double dt, const Problem& problem,
                      const StepperConfig& config);

// Adaptive loop with step-doubling error control; the accepted state is the
// two-half-step solution. Terminates at the horizon, on blow-up, or when the
// controller collapses dt to dt_min.
SimResult simulate(const Problem& problem, const StepperConfig& config);

// Blow-up detection over a window of accepted samples (>= 3): threshold
// crossing, or dt at dt_min while the max norm grew by >= 2 over the window.
std::optional<BlowupEvent> detect_blowup(const std::vector<TraceSample>& window,
                                         const StepperConfig& config);

// Least-squares fit of ||u||inf ~ K (T - t)^(-beta) in log-log coordinates,
// minimizing over the pole location T. `ok` is false for degenerate data.
struct PowerLawFit {
    double t_est = 0.0;
    double beta = 0.0;
    double rss = 0.0;
    bool ok = false;
};

PowerLawFit fit_blowup_time(const std::vector<double>& times, const std::vector<double>& norms);

// Thins (times, norms) to a log-uniform subset spanning the last four decades
// of the norm, which keeps the power-law fit well conditioned when adaptive
// steps cluster near the pole. Falls back to the last three samples.
void select_blowup_fit_window(const std::vector<double>& times, const std::vector<double>& norms,
                              std::vector<double>& out_times, std::vector<double>& out_norms);

}  // namespace heatlab
