// fock.hpp: Truncated multi-mode Fock space, ladder operators, density matrices.
//
// Basis states |n_0 n_1 ...> are indexed in mixed radix with mode 0 the most
// significant digit, each n_m in [0, n_basis).

#pragma once

#include "activegrid/model.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace activegrid::fock {

using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class FockSpace {
public:
    FockSpace(Index n_modes, Index n_basis);

    [[nodiscard]] Index n_modes() const noexcept { return n_modes_; }
    [[nodiscard]] Index n_basis() const noexcept { return n_basis_; }
    [[nodiscard]] Index dim() const noexcept { return dim_; }

    [[nodiscard]] Index index(const std::vector<Index>& occupations) const;
    [[nodiscard]] Index occupation(Index state, Index mode) const noexcept;
    [[nodiscard]] Index total(Index state) const noexcept { return total_[state]; }
    [[nodiscard]] Index max_total() const noexcept { return n_modes_ * (n_basis_ - 1); }

    friend bool operator==(const FockSpace& a, const FockSpace& b) noexcept {
        return a.n_modes_ == b.n_modes_ && a.n_basis_ == b.n_basis_;
    }

private:
    Index n_modes_;
    Index n_basis_;
    Index dim_;
    std::vector<Index> stride_;
    std::vector<Index> total_;
};

struct FockOperator {
    SparseMatrix matrix;
    std::vector<Index> modes;  // modes the operator acts on
};

[[nodiscard]] FockOperator lowering(const FockSpace& space, Index mode);
[[nodiscard]] FockOperator number(const FockSpace& space, Index mode);

/// A = f(a^dag a) a, with <n-1|A|n> = sqrt(n) f(n-1). Its adjoint is the gain jump.
[[nodiscard]] FockOperator saturated_lowering(const FockSpace& space, Index mode,
                                              const SaturationLaw& law);

[[nodiscard]] FockOperator adjoint(const FockOperator& op);

class DensityMatrix {
public:
    DensityMatrix(FockSpace space, Matrix rho);

    [[nodiscard]] const FockSpace& space() const noexcept { return space_; }
    [[nodiscard]] const Matrix& matrix() const noexcept { return rho_; }
    [[nodiscard]] Complex trace() const { return rho_.trace(); }
    [[nodiscard]] double hermiticity_error() const;
    [[nodiscard]] double min_eigenvalue() const;

    /// Returns <O> = Tr(rho O).
    [[nodiscard]] Complex expectation(const SparseMatrix& op) const;

    /// Throws std::runtime_error when trace, Hermiticity or positivity is off
    /// by more than the stated slack.
    void validate(double trace_tol = 1e-8, double herm_tol = 1e-10, double neg_tol = 1e-8) const;

    /// Pure state |psi><psi| / <psi|psi>.
    [[nodiscard]] static DensityMatrix pure(const FockSpace& space, const Vector& psi);

private:
    FockSpace space_;
    Matrix rho_;
};

/// Collapse operators c_k (rate folded in) and the Hamiltonian of a
/// network on a Fock space with one mode per site.
struct QuantumModel {
    FockSpace space;
    SparseMatrix hamiltonian;
    std::vector<SparseMatrix> collapse;
    std::vector<std::string> labels;
};

/// H = -(1/2) sum_edges g (a_i^dag a_j + h.c.) + sum_l Delta_l n_l;
/// c in {sqrt(Gi) A^dag, sqrt(Ge) A, sqrt(gamma (N_th+1)) a, sqrt(gamma N_th) a^dag}.
/// Throws std::invalid_argument when the site count differs from the mode count.
[[nodiscard]] QuantumModel build_quantum_model(const NetworkSpec& spec, const FockSpace& space);

}  // namespace activegrid::fock
