#include "qfpc/lindblad.hpp"

#include <cmath>

namespace qfpc {

void SystemSpec::validate() const {
    if (dim < 2) throw ConfigError("system dim must be >= 2");
    if (h0_eigenvalues.size() != dim) {
        throw DimensionError("h0_eigenvalues size " + std::to_string(h0_eigenvalues.size()) +
                             " != dim " + std::to_string(dim));
    }
    if (h1.rows() != dim || h1.cols() != dim) {
        throw DimensionError("h1 must be dim x dim");
    }
    const double herm = (h1 - h1.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12) {
        throw ConfigError("h1 not Hermitian, residual " + std::to_string(herm));
    }
    if (rates.rows() != dim || rates.cols() != dim) {
        throw DimensionError("rates must be dim x dim");
    }
    for (int k = 0; k < dim; ++k) {
        if (rates(k, k) != 0.0) throw ConfigError("rates diagonal must be zero");
        for (int j = 0; j < dim; ++j) {
            if (rates(k, j) < 0.0) throw ConfigError("rates must be nonnegative");
        }
    }
}

GeneratorPair build_generators(const SystemSpec& spec) {
    spec.validate();
    const int l = spec.dim;
    const int n2 = l * l;

    GeneratorPair gen;
    gen.gamma = MatX::Zero(l, l);
    for (int n = 0; n < l; ++n) {
        for (int q = 0; q < l; ++q) {
            gen.gamma(n, q) = 0.5 * (spec.rates.row(n).sum() + spec.rates.row(q).sum());
        }
    }

    gen.a_tilde = MatXc::Zero(n2, n2);
    gen.n_tilde = MatXc::Zero(n2, n2);

    // Row (n, q) of the element-wise master equation:
    //   d rho_{n,q}/dt = (-i (E_n - E_q) - gamma_{n,q}) rho_{n,q}
    //                    + delta_{n,q} sum_k rates(k, n) rho_{k,k}
    //                    + i u sum_k (rho_{n,k} H1(k, q) - H1(n, k) rho_{k,q})
    for (int n = 0; n < l; ++n) {
        for (int q = 0; q < l; ++q) {
            const int row = vec_index(l, n, q);
            gen.a_tilde(row, row) += cx(-gen.gamma(n, q), -(spec.h0_eigenvalues(n) - spec.h0_eigenvalues(q)));
            if (n == q) {
                for (int k = 0; k < l; ++k) {
                    if (k == n) continue;
                    gen.a_tilde(row, vec_index(l, k, k)) += spec.rates(k, n);
                }
            }
            for (int k = 0; k < l; ++k) {
                gen.n_tilde(row, vec_index(l, n, k)) += spec.h1(k, q);
                gen.n_tilde(row, vec_index(l, k, q)) -= spec.h1(n, k);
            }
        }
    }
    return gen;
}

Preset preset_from_name(const std::string& name) {
    if (name == "spin_half") return Preset::SpinHalf;
    if (name == "lambda_type") return Preset::LambdaType;
    throw ConfigError("unknown preset '" + name + "' (expected spin_half or lambda_type)");
}

std::string preset_name(Preset p) {
    return p == Preset::SpinHalf ? "spin_half" : "lambda_type";
}

SystemSpec preset(Preset which, double theta) {
    if (theta < 0.0) throw ConfigError("preset rate theta must be >= 0");
    SystemSpec spec;
    if (which == Preset::SpinHalf) {
        spec.dim = 2;
        spec.h0_eigenvalues = VecX(2);
        spec.h0_eigenvalues << 0.5, -0.5;
        spec.h1 = MatXc(2, 2);
        // (sigma1 + sigma2) / 2 in the {|1>,|0>} basis
        spec.h1 << cx(0, 0), cx(0.5, -0.5), cx(0.5, 0.5), cx(0, 0);
        spec.rates = MatX::Zero(2, 2);
        spec.rates(0, 1) = theta;  // |1> -> |0>
    } else {
        spec.dim = 3;
        spec.h0_eigenvalues = VecX(3);
        spec.h0_eigenvalues << 1.5, 1.0, 0.0;
        spec.h1 = MatXc::Zero(3, 3);
        spec.h1(0, 2) = spec.h1(2, 0) = cx(1, 0);
        spec.h1(1, 2) = spec.h1(2, 1) = cx(1, 0);
        spec.rates = MatX::Zero(3, 3);
        spec.rates(0, 2) = theta;  // |2> -> |0>
    }
    spec.validate();
    return spec;
}

RowVecXc observable_row(const MatXc& obs) {
    if (obs.rows() != obs.cols()) throw DimensionError("observable must be square");
    const int l = static_cast<int>(obs.rows());
    RowVecXc row(static_cast<Eigen::Index>(l) * l);
    for (int n = 0; n < l; ++n) {
        for (int q = 0; q < l; ++q) {
            row(vec_index(l, n, q)) = obs(q, n);
        }
    }
    return row;
}

RowVecXc projector_row(const VecXc& amplitudes) {
    const double nrm = amplitudes.norm();
    if (nrm == 0.0) throw ConfigError("target amplitudes must be nonzero");
    const VecXc psi = amplitudes / nrm;
    return observable_row(psi * psi.adjoint());
}

}  // namespace qfpc
