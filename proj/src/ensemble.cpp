#include "qfpc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <Eigen/Cholesky>

namespace qfpc {

namespace {

double population_sum(const VecXc& x_total, int l) {
    double s = 0.0;
    for (int k = 0; k < l; ++k) s += std::real(x_total(k));
    return s;
}

MatX measurement_chol(const MatX& g) {
    Eigen::LLT<MatX> llt(g);
    if (llt.info() != Eigen::Success) throw NumericalError("g is not positive definite");
    return llt.matrixL();
}

}  // namespace

StepOutcome simulate_step(const VecXc& x_prev, const MatXc& a, const MatXc& b, const VecX& u,
                          double zeta, const VecX& sigma_noise, const MatXc& d, const VecXc& x_e) {
    StepOutcome out;
    out.x = (1.0 + zeta) * (a * x_prev) + b * u.cast<cx>();
    out.o = (d * (out.x + x_e)).real() + sigma_noise;
    return out;
}

double fidelity(const VecXc& x, const VecXc& x_e, const RowVecXc& d_target) {
    const double raw = std::real((d_target * (x + x_e))(0));
    return std::clamp(raw, 0.0, 1.0);
}

OptimizationResult run_optimization(const GeneratorPair& gen, const NoiseIdealSpec& noise,
                                    const RowVecXc& d_target, const VecXc& x0, const VecXc& x_e,
                                    const RunOptions& opt) {
    noise.validate();
    if (opt.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (noise.control_dim() != 1) throw ConfigError("the bilinear model carries a single control field");
    const StepOperators ops = make_step_operators(gen, opt.dt);
    const int l = dim_from_vec_size(x0.size());
    const MatX g_chol = measurement_chol(noise.g);
    const double zeta_std = std::sqrt(noise.sigma);
    const Eigen::Index m = noise.output_dim();

    RngStream rng = optimization_stream(opt.seed);

    OptimizationResult res;
    Trajectory& traj = res.trajectory;
    traj.times.reserve(opt.horizon + 1);
    traj.states.reserve(opt.horizon + 1);
    traj.controls.reserve(opt.horizon);

    VecXc x = x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.outputs.push_back((noise.d * (x + x_e)).real());
    traj.fidelities.push_back(fidelity(x, x_e, d_target));
    traj.trace_drift.push_back(population_sum(x + x_e, l) - 1.0);

    int dwell_run = 0;
    for (int t = 1; t <= opt.horizon; ++t) {
        const double zeta = zeta_std > 0.0 ? rng.normal(0.0, zeta_std) : 0.0;
        const MatXc b = ops.b_kernel * (x + x_e);

        SteadyStateResult ss;
        try {
            ss = steady_state(ops.a, b, noise, opt.riccati_tol, opt.riccati_max_iter);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("steady_state failed at step " + std::to_string(t) + ": " + e.what(),
                                   e.residual_m, e.residual_p);
        }
        const ControlLaw law = control_law(ss.cost, ops.a, b, noise, x);
        const VecX u = opt.sample_control ? sample_control(law, rng) : law.v;

        VecX sigma_noise = VecX::Zero(m);
        VecX z(m);
        for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
        sigma_noise = g_chol * z;

        const StepOutcome step = simulate_step(x, ops.a, b, u, zeta, sigma_noise, noise.d, x_e);
        x = step.x;

        traj.times.push_back(t * opt.dt);
        traj.states.push_back(x);
        traj.controls.push_back(u);
        traj.outputs.push_back(step.o);
        traj.fidelities.push_back(fidelity(x, x_e, d_target));
        traj.trace_drift.push_back(population_sum(x + x_e, l) - 1.0);
        traj.im_residuals.push_back(law.im_residual);

        if (traj.fidelities.back() >= opt.stop_fidelity) {
            ++dwell_run;
            if (dwell_run >= opt.dwell) {
                res.stop_step = t - opt.dwell + 1;
                break;
            }
        } else {
            dwell_run = 0;
        }
    }

    const std::size_t steps = traj.controls.size();
    const Eigen::Index p = noise.control_dim();
    res.control_signal = MatX(steps, p);
    for (std::size_t k = 0; k < steps; ++k) res.control_signal.row(k) = traj.controls[k].transpose();
    return res;
}

EnsembleReport run_testing(const GeneratorPair& gen, const NoiseIdealSpec& noise,
                           const RowVecXc& d_target, const MatX& control_signal, const VecXc& x0,
                           const VecXc& x_e, double dt, int n_members, std::uint64_t seed,
                           int n_threads) {
    noise.validate();
    if (n_members < 1) throw ConfigError("ensemble size must be >= 1");
    if (noise.control_dim() != 1) throw ConfigError("the bilinear model carries a single control field");
    if (control_signal.cols() != noise.control_dim()) {
        throw DimensionError("control signal width does not match the control dimension");
    }
    const StepOperators ops = make_step_operators(gen, dt);
    const double zeta_std = std::sqrt(noise.sigma);
    const Eigen::Index steps = control_signal.rows();

    EnsembleReport report;
    report.n_members = n_members;
    report.seed = seed;
    report.final_fidelities.assign(n_members, 0.0);

    auto worker = [&](int begin, int end) {
        for (int k = begin; k < end; ++k) {
            RngStream rng = member_stream(seed, static_cast<std::uint64_t>(k));
            VecXc x = x0;
            for (Eigen::Index t = 0; t < steps; ++t) {
                const double zeta = zeta_std > 0.0 ? rng.normal(0.0, zeta_std) : 0.0;
                const VecXc ax = ops.a * x;
                const VecXc bx = ops.b_kernel * (x + x_e);
                x = (1.0 + zeta) * ax + bx * control_signal(t, 0);
            }
            report.final_fidelities[k] = fidelity(x, x_e, d_target);
        }
    };

    int threads = n_threads > 0 ? n_threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, std::max(1, n_members));
    if (threads == 1) {
        worker(0, n_members);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_members + threads - 1) / threads;
        for (int i = 0; i < threads; ++i) {
            const int begin = i * chunk;
            const int end = std::min(n_members, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    report.mean = 0.0;
    report.min = report.final_fidelities[0];
    report.max = report.final_fidelities[0];
    for (double f : report.final_fidelities) {
        report.mean += f;
        report.min = std::min(report.min, f);
        report.max = std::max(report.max, f);
    }
    report.mean /= static_cast<double>(n_members);
    return report;
}

}  // namespace qfpc
