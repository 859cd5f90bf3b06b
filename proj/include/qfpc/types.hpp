#ifndef QFPC_TYPES_HPP
#define QFPC_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qfpc {

using cx = std::complex<double>;

using MatXc = Eigen::MatrixXcd;
using VecXc = Eigen::VectorXcd;
using RowVecXc = Eigen::RowVectorXcd;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape or size of an argument is inconsistent.
struct DimensionError : Error {
    using Error::Error;
};

/// A user-supplied parameter or config file is invalid.
struct ConfigError : Error {
    using Error::Error;
};

/// A matrix factorization or solve failed (singular, non-PD, non-finite).
struct NumericalError : Error {
    using Error::Error;
};

/// An iteration did not reach its tolerance within the iteration budget.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double residual_m, double residual_p)
        : Error(what), residual_m(residual_m), residual_p(residual_p) {}
    double residual_m;
    double residual_p;
};

}  // namespace qfpc

#endif  // QFPC_TYPES_HPP
