#ifndef QFPC_ORACLES_HPP
#define QFPC_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "qfpc/fpd.hpp"
#include "qfpc/types.hpp"

// Independent numerical routes used to cross-check the main implementation.
// Nothing here calls the code paths it is meant to verify: exponentials are
// summed as a series, integrals use quadrature, fixed points use plain
// scalar loops, expectations use Monte Carlo.  The comparisons themselves
// live in the test suites and in the `oracle` CLI subcommand.

namespace qfpc::oracles {

/// Truncated Taylor series sum_{k<=terms} m^k / k!.
MatXc series_exp(const MatXc& m, int terms = 50);

/// Trapezoid-rule evaluation of int_0^dt exp(a s) ds with the node
/// exponentials built by cumulative products of a series exponential.
MatXc integral_exp_trapezoid(const MatXc& a, double dt, int nodes = 10000);

/// Fixed point of the scalar cost-to-go recursion in plain doubles.
double scalar_riccati_fixed_point(double a, double b, double d, double g_r, double omega,
                                  double sigma, double tol = 1e-15, int max_iter = 1000000);

/// Direct Kronecker-product solve of m = a^H m a + w.
MatXc dlyap_direct(const MatXc& a, const MatXc& w);

/// One-step exponent whose minimizer over u is the controller mean:
/// Re(beta(u, x)) + 0.5 (u - u_r)^T omega^-1 (u - u_r), with beta assembled
/// term by term from its defining expression.
double exponent_value(const CostToGo& ct, const MatXc& a, const MatXc& b,
                      const NoiseIdealSpec& spec, const VecXc& x, const VecX& u);

VecX finite_diff_gradient(const std::function<double(const VecX&)>& f, const VecX& u, double h = 1e-6);
MatX finite_diff_hessian(const std::function<double(const VecX&)>& f, const VecX& u, double h = 1e-4);

/// Second derivative in x of min_u exponent for a scalar system, read off by
/// finite differences around x = 0 with the inner minimization done by
/// golden-section search.
double scalar_curvature_in_x(const CostToGo& ct, double a, double b, const NoiseIdealSpec& spec,
                             double h = 1e-3);

struct McKldMin {
    double mean = 0.0;
    double variance = 0.0;
};

/// Scalar one-step problem with deterministic state update x' = a x + b u,
/// measurement o ~ N(d x', g), ideal measurement N(o_d, g_r) and ideal
/// controller N(u_r, omega).
struct OneStepScalar {
    double a = 1.0;
    double b = 1.0;
    double d = 1.0;
    double x = 0.0;
    double g = 1.0;
    double g_r = 1.0;
    double o_d = 0.0;
    double u_r = 0.0;
    double omega = 1.0;
};

/// Grid search over the mean and variance of a scalar Gaussian controller
/// N(m, r) minimizing the sampled one-step KLD objective
///   E[ ln(s(o|x')/Is(o|x')) + ln(c(u)/Ic(u)) ],
/// with u and o drawn by Monte Carlo under common random numbers across
/// grid points.  Everything is built from the defining densities.
McKldMin mc_kld_minimize(const OneStepScalar& sys, std::int64_t n_samples, std::uint64_t seed);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo estimate of KL(N(mean0, cov0) || N(mean1, cov1)).
McEstimate mc_kld_gaussians(const VecX& mean0, const MatX& cov0, const VecX& mean1,
                            const MatX& cov1, std::int64_t n_samples, std::uint64_t seed);

struct OracleOptions {
    std::int64_t mc_samples = 1000000;
    std::uint64_t seed = 20240817;
};

/// Run every oracle cross-check, print one PASS/FAIL line each, return
/// true when all pass.
bool run_all(std::ostream& os, const OracleOptions& opt = {});

}  // namespace qfpc::oracles

#endif  // QFPC_ORACLES_HPP
