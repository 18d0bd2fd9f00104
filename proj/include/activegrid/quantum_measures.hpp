// quantum_measures.hpp: Observables of two-mode density matrices.

#pragma once

#include "activegrid/fock.hpp"

#include <optional>
#include <vector>

namespace activegrid::fock {

/// Hermitian current operator i(g/2)(a_1^dag a_0 - a_0^dag a_1), flowing from mode 0 to mode 1.
[[nodiscard]] SparseMatrix current_operator(const FockSpace& space, double g);

/// Tr(rho J); the imaginary residue is dropped.
[[nodiscard]] double expectation_current(const DensityMatrix& rho, double g);

/// sqrt(<J^2> - <J>^2).
[[nodiscard]] double current_fluctuation(const DensityMatrix& rho, double g);

/// <a_m^dag a_m> per mode.
[[nodiscard]] std::vector<double> occupations(const DensityMatrix& rho);

/// rho^{T_B}: transpose on the second mode.
[[nodiscard]] Matrix partial_transpose(const DensityMatrix& rho);

/// Sum of |negative eigenvalues| of rho^{T_B}. With `k_lowest`, only the k
/// lowest eigenvalues are summed.
[[nodiscard]] double negativity(const DensityMatrix& rho, std::optional<Index> k_lowest = std::nullopt);

/// (1/2) ||rho - sigma||_1.
[[nodiscard]] double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Hermitizes, raises eigenvalues in [floor, 0) to zero and renormalizes.
/// Returns the clipped magnitude; throws if some eigenvalue lies below floor.
double clip_negative_eigenvalues(DensityMatrix& rho, double floor = -1e-8);

}  // namespace activegrid::fock
