#ifndef QFPC_VECTORIZATION_HPP
#define QFPC_VECTORIZATION_HPP

#include <cmath>
#include <utility>

#include "qfpc/types.hpp"

namespace qfpc {

// Ordering of the density-matrix flattening used throughout this library:
// the l populations rho_{0,0}..rho_{l-1,l-1} come first, then for each row
// n = 0..l-2 the upper off-diagonals rho_{n,n+1}..rho_{n,l-1} followed by
// their conjugates rho_{n+1,n}..rho_{l-1,n}.  For l = 3 this reads
// (rho00, rho11, rho22, rho01, rho02, rho10, rho20, rho12, rho21).

/// Side length l of the matrix a flattened vector of size n came from.
inline int dim_from_vec_size(Eigen::Index n) {
    const auto l = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (l * l != n) {
        throw DimensionError("vector length " + std::to_string(n) + " is not a perfect square");
    }
    return static_cast<int>(l);
}

/// Flat position of matrix entry (n, q) in the l*l ordering above.
inline int vec_index(int l, int n, int q) {
    if (n == q) return n;
    const int row = std::min(n, q);
    // start of the off-diagonal group for row `row`
    const int offset = l + 2 * (row * (l - 1) - row * (row - 1) / 2);
    if (n < q) return offset + (q - n - 1);
    return offset + (l - 1 - q) + (n - q - 1);
}

/// Inverse of vec_index: matrix coordinates (n, q) of flat position k.
inline std::pair<int, int> vec_coords(int l, int k) {
    if (k < l) return {k, k};
    int pos = k - l;
    for (int row = 0; row < l - 1; ++row) {
        const int width = l - 1 - row;
        if (pos < width) return {row, row + 1 + pos};
        pos -= width;
        if (pos < width) return {row + 1 + pos, row};
        pos -= width;
    }
    throw DimensionError("flat index " + std::to_string(k) + " out of range for dim " + std::to_string(l));
}

/// Position holding the conjugate partner of flat position k (itself for populations).
inline int conj_pair_index(int l, int k) {
    const auto [n, q] = vec_coords(l, k);
    return vec_index(l, q, n);
}

/// Flatten a square matrix into the population-first ordering.
template <typename Derived>
VecXc vectorize(const Eigen::MatrixBase<Derived>& rho) {
    if (rho.rows() != rho.cols()) {
        throw DimensionError("vectorize expects a square matrix");
    }
    const int l = static_cast<int>(rho.rows());
    VecXc x(static_cast<Eigen::Index>(l) * l);
    for (int n = 0; n < l; ++n) {
        for (int q = 0; q < l; ++q) {
            x(vec_index(l, n, q)) = cx(rho(n, q));
        }
    }
    return x;
}

/// Inverse of vectorize.
template <typename Derived>
MatXc devectorize(const Eigen::MatrixBase<Derived>& x) {
    const int l = dim_from_vec_size(x.size());
    MatXc rho(l, l);
    for (int n = 0; n < l; ++n) {
        for (int q = 0; q < l; ++q) {
            rho(n, q) = cx(x(vec_index(l, n, q)));
        }
    }
    return rho;
}

/// Validated density operator together with its flattened form.
struct DensityState {
    int dim = 0;
    MatXc matrix;
    VecXc vector;

    static constexpr double kHermTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kEigTol = 1e-10;

    static DensityState from_matrix(const MatXc& rho) {
        if (rho.rows() != rho.cols() || rho.rows() < 2) {
            throw DimensionError("density matrix must be square with dim >= 2");
        }
        const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermTol) {
            throw ConfigError("density matrix not Hermitian, residual " + std::to_string(herm));
        }
        const cx tr = rho.trace();
        if (std::abs(tr - cx(1.0, 0.0)) > kTraceTol) {
            throw ConfigError("density matrix trace differs from 1 by " + std::to_string(std::abs(tr - cx(1.0, 0.0))));
        }
        Eigen::SelfAdjointEigenSolver<MatXc> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kEigTol) {
            throw ConfigError("density matrix has eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
        }
        DensityState s;
        s.dim = static_cast<int>(rho.rows());
        s.matrix = rho;
        s.vector = vectorize(rho);
        return s;
    }

    static DensityState from_vector(const VecXc& x) { return from_matrix(devectorize(x)); }
};

}  // namespace qfpc

#endif  // QFPC_VECTORIZATION_HPP
