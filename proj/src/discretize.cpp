#include "qfpc/discretize.hpp"

namespace qfpc {

StepOperators make_step_operators(const GeneratorPair& gen, double dt) {
    if (dt <= 0.0) throw ConfigError("sampling period dt must be > 0");
    const Eigen::Index n = gen.a_tilde.rows();
    if (gen.a_tilde.cols() != n || gen.n_tilde.rows() != n || gen.n_tilde.cols() != n) {
        throw DimensionError("generator matrices must be square and equally sized");
    }

    MatXc aug = MatXc::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = gen.a_tilde;
    aug.topRightCorner(n, n) = MatXc::Identity(n, n);
    const MatXc big = matrix_exp((aug * dt).eval());

    StepOperators ops;
    ops.a = big.topLeftCorner(n, n);
    ops.b_kernel = big.topRightCorner(n, n) * (cx(0, 1) * gen.n_tilde);
    ops.dt = dt;
    return ops;
}

DiscreteModel discretize(const GeneratorPair& gen, const VecXc& x_prev, const VecXc& x_e, double dt) {
    const StepOperators ops = make_step_operators(gen, dt);
    if (x_prev.size() != ops.a.rows() || x_e.size() != ops.a.rows()) {
        throw DimensionError("state vectors must have length l^2");
    }
    DiscreteModel model;
    model.a = ops.a;
    model.b = ops.b_kernel * (x_prev + x_e);
    model.dt = dt;
    model.x_e = x_e;
    return model;
}

}  // namespace qfpc
