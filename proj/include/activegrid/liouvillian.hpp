// liouvillian.hpp: Vectorized Lindblad generator and its null space.
//
//   L(rho) = K rho + rho K^dag + sum_k c_k rho c_k^dag,   K = -i H - (1/2) sum_k c_k^dag c_k.
//
// Every term conserves the difference of total excitation numbers between
// ket and bra, so L is block diagonal in that difference. The "balanced"
// basis keeps only the block where both agree, which holds the steady state.

#pragma once

#include "activegrid/fock.hpp"

namespace activegrid::fock {

enum class LiouvilleBasis { full, balanced };

class Liouvillian {
public:
    Liouvillian(const QuantumModel& model, LiouvilleBasis basis = LiouvilleBasis::full);

    [[nodiscard]] const SparseMatrix& matrix() const noexcept { return matrix_; }
    [[nodiscard]] const FockSpace& space() const noexcept { return space_; }
    [[nodiscard]] LiouvilleBasis basis() const noexcept { return basis_; }
    [[nodiscard]] Index size() const noexcept { return pairs_.size(); }

    /// Position of |i><j| in the vectorized basis, or -1 outside it.
    [[nodiscard]] long position(Index i, Index j) const noexcept;

    [[nodiscard]] Vector vectorize(const Matrix& rho) const;
    [[nodiscard]] Matrix unvectorize(const Vector& v) const;

    /// L(rho) through the vectorized generator.
    [[nodiscard]] Matrix apply(const Matrix& rho) const;

private:
    FockSpace space_;
    LiouvilleBasis basis_;
    std::vector<std::pair<Index, Index>> pairs_;
    std::vector<long> row_start_;      // balanced: offset of the (i, .) run
    std::vector<long> pos_in_block_;   // balanced: rank of j among states with the same total
    SparseMatrix matrix_;
};

/// Full-space Liouvillian, column-stacked (|i><j| at i + d j).
[[nodiscard]] Liouvillian build_liouvillian(const NetworkSpec& spec, const FockSpace& space);

/// L(rho) evaluated directly from H and the collapse operators.
[[nodiscard]] Matrix apply_lindblad(const QuantumModel& model, const Matrix& rho);

struct DirectOptions {
    Index max_dim{1600};   // cap on the Hilbert-space dimension d
};

/// Null vector of L with the (0,0) equation replaced by Tr(rho) = 1, solved
/// by sparse LU; Hermitized and trace-normalized. Throws std::runtime_error on
/// a singular system (degenerate null space) or a poor residual.
[[nodiscard]] DensityMatrix steady_state_direct(const Liouvillian& liouvillian,
                                                const DirectOptions& options = {});

/// ||L(rho)|| / ||L|| in Frobenius norms.
[[nodiscard]] double relative_residual(const Liouvillian& liouvillian, const DensityMatrix& rho);

}  // namespace activegrid::fock
