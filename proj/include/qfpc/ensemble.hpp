#ifndef QFPC_ENSEMBLE_HPP
#define QFPC_ENSEMBLE_HPP

#include <cstdint>
#include <vector>

#include "qfpc/discretize.hpp"
#include "qfpc/fpd.hpp"
#include "qfpc/lindblad.hpp"
#include "qfpc/rng.hpp"
#include "qfpc/types.hpp"

namespace qfpc {

/// Recorded closed-loop run.  states holds x_0..x_H, controls u_0..u_{H-1}
/// (u_t acts on the transition x_t -> x_{t+1}), outputs and fidelities one
/// entry per state.
struct Trajectory {
    std::vector<double> times;
    std::vector<VecXc> states;
    std::vector<VecX> controls;
    std::vector<VecX> outputs;
    std::vector<double> fidelities;
    std::vector<double> trace_drift;  // population sum of (x_t + x_e) minus 1
    std::vector<double> im_residuals;

    std::size_t steps() const { return controls.size(); }
};

struct EnsembleReport {
    int n_members = 0;
    std::vector<double> final_fidelities;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::uint64_t seed = 0;
};

struct StepOutcome {
    VecXc x;
    VecX o;
};

/// One forward step x = (1 + zeta) a x_prev + b u; o = Re(d (x + x_e)) + sigma_noise.
StepOutcome simulate_step(const VecXc& x_prev, const MatXc& a, const MatXc& b, const VecX& u,
                          double zeta, const VecX& sigma_noise, const MatXc& d, const VecXc& x_e);

/// Overlap Tr(rho Pi) between the state and a pure-state projector row,
/// clamped to [0, 1].
double fidelity(const VecXc& x, const VecXc& x_e, const RowVecXc& d_target);

struct RunOptions {
    double dt = 0.0;
    int horizon = 0;
    std::uint64_t seed = 0;
    double stop_fidelity = 0.999;
    int dwell = 100;                // consecutive steps at stop_fidelity before stopping
    double riccati_tol = 1e-10;
    int riccati_max_iter = 100000;
    bool sample_control = false;    // draw u ~ N(v, R) instead of applying the mean
};

struct OptimizationResult {
    Trajectory trajectory;
    MatX control_signal;  // steps x p, one row per applied control
    int stop_step = -1;   // first step index of the dwell window, -1 if never stopped
};

/// Optimization phase: at each step linearize b at the current state,
/// recompute the steady-state cost-to-go, apply the controller mean (or a
/// sample), and advance with multiplicative noise.  The target row for the
/// recorded fidelity is d_target; pass spec.d's first row for scalar outputs.
OptimizationResult run_optimization(const GeneratorPair& gen, const NoiseIdealSpec& noise,
                                    const RowVecXc& d_target, const VecXc& x0, const VecXc& x_e,
                                    const RunOptions& opt);

/// Testing phase: replay a stored control signal on n_members independent
/// noise realizations and report final fidelities.  Member k draws from the
/// stream (seed, "test", k), so results are independent of scheduling.
EnsembleReport run_testing(const GeneratorPair& gen, const NoiseIdealSpec& noise,
                           const RowVecXc& d_target, const MatX& control_signal, const VecXc& x0,
                           const VecXc& x_e, double dt, int n_members, std::uint64_t seed,
                           int n_threads = 0);

}  // namespace qfpc

#endif  // QFPC_ENSEMBLE_HPP
