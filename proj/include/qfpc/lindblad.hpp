#ifndef QFPC_LINDBLAD_HPP
#define QFPC_LINDBLAD_HPP

#include <string>

#include "qfpc/types.hpp"
#include "qfpc/vectorization.hpp"

namespace qfpc {

/// Physical description of an open system: free-Hamiltonian eigenvalues,
/// one control Hamiltonian and a matrix of dissipative transition rates.
struct SystemSpec {
    int dim = 0;
    VecX h0_eigenvalues;   // E_0..E_{l-1}, hbar = 1 units
    MatXc h1;              // Hermitian control Hamiltonian
    MatX rates;            // rates(k, j) = transition rate k -> j, >= 0, zero diagonal

    void validate() const;
};

/// Drift/control generator pair of the flattened master equation
/// dx/dt = (a_tilde + i u n_tilde) x, plus the derived damping table.
struct GeneratorPair {
    MatXc a_tilde;  // l^2 x l^2, 1/time
    MatXc n_tilde;  // l^2 x l^2, dimensionless
    MatX gamma;     // gamma(n, q) = 0.5 * sum_j (rates(n,j) + rates(q,j))
};

GeneratorPair build_generators(const SystemSpec& spec);

enum class Preset { SpinHalf, LambdaType };

Preset preset_from_name(const std::string& name);
std::string preset_name(Preset p);

/// Built-in systems. SpinHalf: basis {|1>,|0>}, H0 = sigma3/2,
/// H1 = (sigma1+sigma2)/2, one decay channel |1> -> |0>.  LambdaType:
/// basis {|2>,|1>,|0>}, H0 = diag(3/2, 1, 0), 0/1 coupling H1, one
/// channel |2> -> |0>.
SystemSpec preset(Preset which, double theta);

/// Row vector picking Tr(rho * O) out of the flattened state for a
/// Hermitian observable O: row(k) = O(q, n) for flat position k = (n, q).
RowVecXc observable_row(const MatXc& obs);

/// observable_row of the projector onto the (normalized) pure state `amplitudes`.
RowVecXc projector_row(const VecXc& amplitudes);

}  // namespace qfpc

#endif  // QFPC_LINDBLAD_HPP
