#include "qfpc/fpd.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

namespace qfpc {

namespace {

MatX require_spd(const MatX& m, const char* name) {
    if (m.rows() != m.cols()) throw DimensionError(std::string(name) + " must be square");
    Eigen::LLT<MatX> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(name) + " is not positive definite");
    }
    return m;
}

double logdet_spd(const MatX& m, const char* name) {
    Eigen::LLT<MatX> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(name) + " is not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double logdet_hpd(const MatXc& m, const char* name) {
    Eigen::LLT<MatXc> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(name) + " is not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
}

/// Shared intermediates of one backward step: q = d^H g_r^-1 d + m_t,
/// s = omega^-1 + b^H q b, and h = omega^-1 u_r - 0.5 b^H (p^H - 2 d^H g_r^-1 o_d).
struct StepCore {
    MatXc q;
    MatXc s;
    Eigen::LDLT<MatXc> s_solver;
    VecXc h;
    MatX omega_inv;
    MatX gr_inv;
    MatXc dh_grinv;  // d^H g_r^-1

    double logdet_s() const {
        return s_solver.vectorD().real().array().log().sum();
    }
};

StepCore make_core(const CostToGo& ct, const MatXc& a, const MatXc& b, const NoiseIdealSpec& spec) {
    const Eigen::Index n = spec.state_dim();
    const Eigen::Index p = spec.control_dim();
    if (a.rows() != n || a.cols() != n) throw DimensionError("a must be l^2 x l^2 and match d");
    if (b.rows() != n || b.cols() != p) throw DimensionError("b must be l^2 x p");
    if (ct.m.rows() != n || ct.m.cols() != n || ct.p.size() != n) {
        throw DimensionError("cost-to-go size does not match the state dimension");
    }

    StepCore core;
    Eigen::LLT<MatX> gr_llt(spec.g_r);
    if (gr_llt.info() != Eigen::Success) throw NumericalError("g_r is not positive definite");
    core.gr_inv = gr_llt.solve(MatX::Identity(spec.output_dim(), spec.output_dim()));

    Eigen::LLT<MatX> om_llt(spec.omega);
    if (om_llt.info() != Eigen::Success) throw NumericalError("omega is not positive definite");
    core.omega_inv = om_llt.solve(MatX::Identity(p, p));

    core.dh_grinv = spec.d.adjoint() * core.gr_inv.cast<cx>();
    core.q = core.dh_grinv * spec.d + ct.m;
    core.s = core.omega_inv.cast<cx>() + b.adjoint() * core.q * b;
    core.s_solver.compute(core.s);
    const VecX diag = core.s_solver.vectorD().real();
    const bool degenerate = core.s_solver.info() != Eigen::Success || diag.minCoeff() <= 0.0 ||
                            diag.minCoeff() < 1e-15 * diag.maxCoeff();
    if (degenerate) {
        Eigen::JacobiSVD<MatXc> svd(core.s);
        const double cond = svd.singularValues()(0) /
                            std::max(svd.singularValues()(svd.singularValues().size() - 1), 1e-300);
        throw NumericalError("omega^-1 + b^H q b is singular or indefinite (cond ~ " +
                             std::to_string(cond) + ")");
    }

    core.h = core.omega_inv.cast<cx>() * spec.u_r.cast<cx>() -
             0.5 * b.adjoint() * (ct.p.adjoint() - 2.0 * core.dh_grinv * spec.o_d.cast<cx>());
    return core;
}

}  // namespace

void NoiseIdealSpec::validate() const {
    if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
    require_spd(g, "g");
    require_spd(g_r, "g_r");
    require_spd(omega, "omega");
    const Eigen::Index m = d.rows();
    if (g.rows() != m || g_r.rows() != m || o_d.size() != m) {
        throw DimensionError("g, g_r, o_d must match the output dimension of d");
    }
    if (omega.rows() != u_r.size()) {
        throw DimensionError("omega must match the length of u_r");
    }
}

CostToGo riccati_step(const CostToGo& ct, const MatXc& a, const MatXc& b, const NoiseIdealSpec& spec) {
    const StepCore core = make_core(ct, a, b, spec);

    const MatXc qa = core.q * a;
    const MatXc bh_qa = b.adjoint() * qa;  // b^H q a

    CostToGo out;
    const MatXc m_next = a.adjoint() * qa
                       - (a.adjoint() * (core.q.adjoint() * b)) * core.s_solver.solve(bh_qa)
                       + spec.sigma * (a.adjoint() * qa);
    out.m = 0.5 * (m_next + m_next.adjoint());

    const RowVecXc od_gr_d = (core.dh_grinv * spec.o_d.cast<cx>()).adjoint();  // o_d^H g_r^-1 d
    out.p = (ct.p - 2.0 * od_gr_d) * a + 2.0 * core.h.adjoint() * core.s_solver.solve(bh_qa);

    const double od_term = spec.o_d.dot(core.gr_inv * spec.o_d);
    const double ur_term = spec.u_r.dot(core.omega_inv * spec.u_r);
    const double trace_term = static_cast<double>(spec.output_dim()) - (core.gr_inv * spec.g).trace();
    const double h_term = std::real(core.h.dot(core.s_solver.solve(core.h)));
    out.omega_const = ct.omega_const + od_term + logdet_spd(spec.g_r, "g_r") - logdet_spd(spec.g, "g") -
                      trace_term + ur_term - h_term + logdet_spd(spec.omega, "omega") + core.logdet_s();
    return out;
}

SteadyStateResult steady_state(const MatXc& a, const MatXc& b, const NoiseIdealSpec& spec,
                               double tol, int max_iter) {
    if (tol <= 0.0) throw ConfigError("steady-state tolerance must be > 0");
    SteadyStateResult res;
    res.cost = CostToGo::zero(spec.state_dim());
    double prev_omega = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        CostToGo next = riccati_step(res.cost, a, b, spec);
        res.residual_m = (next.m - res.cost.m).cwiseAbs().maxCoeff();
        res.residual_p = (next.p - res.cost.p).cwiseAbs().maxCoeff();
        res.omega_increment = next.omega_const - prev_omega;
        prev_omega = next.omega_const;
        res.cost = std::move(next);
        res.iterations = it;
        if (res.residual_m < tol && res.residual_p < tol) return res;
    }
    throw ConvergenceError("steady_state did not converge in " + std::to_string(max_iter) +
                               " iterations (residual_m=" + std::to_string(res.residual_m) +
                               ", residual_p=" + std::to_string(res.residual_p) + ")",
                           res.residual_m, res.residual_p);
}

ControlLaw control_law(const CostToGo& ct, const MatXc& a, const MatXc& b,
                       const NoiseIdealSpec& spec, const VecXc& x_prev) {
    const StepCore core = make_core(ct, a, b, spec);
    if (x_prev.size() != a.rows()) throw DimensionError("x_prev must have length l^2");

    const VecXc rhs = core.h - b.adjoint() * (core.q * (a * x_prev));
    const VecXc v_complex = core.s_solver.solve(rhs);

    ControlLaw law;
    law.v = v_complex.real();
    law.im_residual = v_complex.imag().cwiseAbs().maxCoeff();
    const MatXc s_inv = core.s_solver.solve(MatXc::Identity(core.s.rows(), core.s.cols()));
    const MatX r = s_inv.real();
    law.r = 0.5 * (r + r.transpose());
    return law;
}

VecX sample_control(const ControlLaw& law, RngStream& rng) {
    const Eigen::Index p = law.v.size();
    if (law.r.rows() != p || law.r.cols() != p) throw DimensionError("r must be p x p");
    MatX chol = MatX::Zero(p, p);
    if (law.r.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::LLT<MatX> llt(law.r);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("controller covariance is not positive definite");
        }
        chol = llt.matrixL();
    }
    VecX z(p);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
    return law.v + chol * z;
}

double gaussian_logpdf(const VecX& x, const VecX& mean, const MatX& cov) {
    if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size()) {
        throw DimensionError("gaussian_logpdf: inconsistent dimensions");
    }
    Eigen::LLT<MatX> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    const VecX r = x - mean;
    const double quad = r.dot(llt.solve(r));
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * M_PI) + logdet + quad);
}

double gaussian_logpdf(const VecXc& x, const VecXc& mean, const MatXc& cov) {
    if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size()) {
        throw DimensionError("gaussian_logpdf: inconsistent dimensions");
    }
    Eigen::LLT<MatXc> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
    const VecXc r = x - mean;
    const double quad = std::real(r.dot(llt.solve(r)));
    const double logdet = logdet_hpd(cov, "cov");
    return -(static_cast<double>(x.size()) * std::log(M_PI) + logdet + quad);
}

double kld_gaussians(const VecX& mean0, const MatX& cov0, const VecX& mean1, const MatX& cov1) {
    const Eigen::Index n = mean0.size();
    if (mean1.size() != n || cov0.rows() != n || cov1.rows() != n) {
        throw DimensionError("kld_gaussians: dimension mismatch");
    }
    require_spd(cov0, "cov0");
    Eigen::LLT<MatX> llt1(cov1);
    if (llt1.info() != Eigen::Success) throw NumericalError("cov1 is not positive definite");
    const VecX dm = mean1 - mean0;
    const double tr = llt1.solve(cov0).trace();
    const double quad = dm.dot(llt1.solve(dm));
    const double logratio = logdet_spd(cov1, "cov1") - logdet_spd(cov0, "cov0");
    return 0.5 * (tr + quad - static_cast<double>(n) + logratio);
}

}  // namespace qfpc
