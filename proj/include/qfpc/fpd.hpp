#ifndef QFPC_FPD_HPP
#define QFPC_FPD_HPP

#include "qfpc/rng.hpp"
#include "qfpc/types.hpp"

namespace qfpc {

/// Noise covariances and ideal-pdf parameters of the control problem.
/// sigma is the variance of the scalar multiplicative state noise; g and
/// g_r are the actual and ideal measurement covariances; omega and u_r
/// describe the ideal controller; o_d is the desired measurement and d the
/// output map o = d x.
struct NoiseIdealSpec {
    double sigma = 0.0;  // variance of the scalar multiplicative noise
    MatX g;              // m x m, SPD
    MatX g_r;            // m x m, SPD
    MatX omega;          // p x p, SPD
    VecX u_r;            // p
    VecX o_d;            // m
    MatXc d;             // m x l^2 output map

    Eigen::Index output_dim() const { return d.rows(); }
    Eigen::Index state_dim() const { return d.cols(); }
    Eigen::Index control_dim() const { return u_r.size(); }

    void validate() const;
};

/// Quadratic cost-to-go 0.5 x^H m x + 0.5 p x + 0.5 omega_const.
struct CostToGo {
    MatXc m;
    RowVecXc p;
    double omega_const = 0.0;

    static CostToGo zero(Eigen::Index state_dim) {
        CostToGo c;
        c.m = MatXc::Zero(state_dim, state_dim);
        c.p = RowVecXc::Zero(state_dim);
        c.omega_const = 0.0;
        return c;
    }
};

/// Gaussian randomized control law N(v, r).  im_residual records the
/// magnitude of the imaginary part discarded when projecting the mean to
/// real controls.
struct ControlLaw {
    VecX v;
    MatX r;
    double im_residual = 0.0;

    bool im_residual_warning() const { return im_residual > 1e-6 * (1.0 + v.norm()); }
};

/// One backward step of the cost-to-go recursion.  The returned m is
/// re-Hermitized by (m + m^H)/2; the pre-symmetrization defect never
/// exceeds roundoff for Hermitian input.
CostToGo riccati_step(const CostToGo& ct, const MatXc& a, const MatXc& b, const NoiseIdealSpec& spec);

struct SteadyStateResult {
    CostToGo cost;
    int iterations = 0;
    double residual_m = 0.0;     // max-norm change of m in the last iteration
    double residual_p = 0.0;     // max-norm change of p in the last iteration
    double omega_increment = 0.0;  // last per-iteration change of omega_const
};

/// Iterate riccati_step from the zero cost-to-go until both m and p move
/// less than tol in max norm.  omega_const accumulates constants and is not
/// part of the stopping test; its last increment is reported instead.
/// Throws ConvergenceError when max_iter is exhausted.
SteadyStateResult steady_state(const MatXc& a, const MatXc& b, const NoiseIdealSpec& spec,
                               double tol, int max_iter);

/// Mean and covariance of the optimal Gaussian controller at state x_prev.
ControlLaw control_law(const CostToGo& ct, const MatXc& a, const MatXc& b,
                       const NoiseIdealSpec& spec, const VecXc& x_prev);

/// Draw a control from N(law.v, law.r).  A zero covariance returns the mean.
VecX sample_control(const ControlLaw& law, RngStream& rng);

/// log N(x; mean, cov) for a real Gaussian.
double gaussian_logpdf(const VecX& x, const VecX& mean, const MatX& cov);

/// log N_C(x; mean, cov) for a circular complex Gaussian (no 1/2 in the
/// quadratic form, pi^n normalization).
double gaussian_logpdf(const VecXc& x, const VecXc& mean, const MatXc& cov);

/// Closed-form KL divergence between two real Gaussians.
double kld_gaussians(const VecX& mean0, const MatX& cov0, const VecX& mean1, const MatX& cov1);

}  // namespace qfpc

#endif  // QFPC_FPD_HPP
