#ifndef QFPC_DISCRETIZE_HPP
#define QFPC_DISCRETIZE_HPP

#include <unsupported/Eigen/MatrixFunctions>

#include "qfpc/lindblad.hpp"
#include "qfpc/types.hpp"

namespace qfpc {

/// Matrix exponential by scaling-and-squaring with Pade(13).
template <typename Derived>
typename Derived::PlainObject matrix_exp(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw DimensionError("matrix_exp expects a square matrix");
    if (!m.allFinite()) throw NumericalError("matrix_exp input has non-finite entries");
    return m.exp();
}

/// One-step discrete model x_t = a x_{t-1} + b u_{t-1} at a fixed linearization point.
struct DiscreteModel {
    MatXc a;    // exp(a_tilder * dt)
    MatXc b;    // l^2 x p control column(s), zero-order hold
    double dt = 0.0;
    VecXc x_e;  // shift state used when the model was built
};

/// State-independent pieces of the discretization: a = exp(a_tilde dt) and
/// the kernel b_kernel = (int_0^dt exp(a_tilde s) ds) * i n_tilde, so that
/// b(x) = b_kernel * (x + x_e).  The integral comes from one exponential of
/// the augmented block matrix [[a_tilde, I], [0, 0]] * dt.
struct StepOperators {
    MatXc a;
    MatXc b_kernel;
    double dt = 0.0;
};

StepOperators make_step_operators(const GeneratorPair& gen, double dt);

DiscreteModel discretize(const GeneratorPair& gen, const VecXc& x_prev, const VecXc& x_e, double dt);

}  // namespace qfpc

#endif  // QFPC_DISCRETIZE_HPP
