#include "activegrid/liouvillian.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>
#include <string>

namespace activegrid::fock {

Liouvillian::Liouvillian(const QuantumModel& model, LiouvilleBasis basis)
    : space_(model.space), basis_(basis) {
    const Index d = space_.dim();
    if (model.hamiltonian.rows() != static_cast<Eigen::Index>(d)) {
        throw std::invalid_argument("Liouvillian: Hamiltonian does not match the space");
    }

    if (basis_ == LiouvilleBasis::full) {
        pairs_.reserve(d * d);
        for (Index j = 0; j < d; ++j) {
            for (Index i = 0; i < d; ++i) {
                pairs_.emplace_back(i, j);
            }
        }
    } else {
        std::vector<long> block_size(space_.max_total() + 1, 0);
        pos_in_block_.resize(d);
        for (Index s = 0; s < d; ++s) {
            pos_in_block_[s] = block_size[space_.total(s)]++;
        }
        std::vector<std::vector<Index>> members(space_.max_total() + 1);
        for (Index s = 0; s < d; ++s) {
            members[space_.total(s)].push_back(s);
        }
        row_start_.resize(d);
        for (Index i = 0; i < d; ++i) {
            row_start_[i] = static_cast<long>(pairs_.size());
            for (Index j : members[space_.total(i)]) {
                pairs_.emplace_back(i, j);
            }
        }
    }

    SparseMatrix jump_sum(static_cast<int>(d), static_cast<int>(d));
    for (const auto& c : model.collapse) {
        jump_sum += SparseMatrix(c.adjoint()) * c;
    }
    const SparseMatrix K = Complex(0.0, -1.0) * model.hamiltonian - 0.5 * jump_sum;

    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(pairs_.size() * 12);
    auto emit = [&](Index r, Index s, Index col, Complex v) {
        const long row = position(r, s);
        if (row < 0) {
            throw std::logic_error("Liouvillian: generator leaves the balanced sector");
        }
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    };
    for (Index col = 0; col < pairs_.size(); ++col) {
        const auto [i, j] = pairs_[col];
        for (SparseMatrix::InnerIterator it(K, static_cast<int>(i)); it; ++it) {
            emit(static_cast<Index>(it.row()), j, col, it.value());
        }
        for (SparseMatrix::InnerIterator it(K, static_cast<int>(j)); it; ++it) {
            emit(i, static_cast<Index>(it.row()), col, std::conj(it.value()));
        }
        for (const auto& c : model.collapse) {
            for (SparseMatrix::InnerIterator ri(c, static_cast<int>(i)); ri; ++ri) {
                for (SparseMatrix::InnerIterator sj(c, static_cast<int>(j)); sj; ++sj) {
                    emit(static_cast<Index>(ri.row()), static_cast<Index>(sj.row()), col,
                         ri.value() * std::conj(sj.value()));
                }
            }
        }
    }
    const int n = static_cast<int>(pairs_.size());
    matrix_.resize(n, n);
    matrix_.setFromTriplets(trips.begin(), trips.end());
    matrix_.makeCompressed();
}

long Liouvillian::position(Index i, Index j) const noexcept {
    const Index d = space_.dim();
    if (i >= d || j >= d) {
        return -1;
    }
    if (basis_ == LiouvilleBasis::full) {
        return static_cast<long>(i + d * j);
    }
    if (space_.total(i) != space_.total(j)) {
        return -1;
    }
    return row_start_[i] + pos_in_block_[j];
}

Vector Liouvillian::vectorize(const Matrix& rho) const {
    if (rho.rows() != static_cast<Eigen::Index>(space_.dim()) || rho.cols() != rho.rows()) {
        throw std::invalid_argument("Liouvillian::vectorize: dimension mismatch");
    }
    Vector v(static_cast<Eigen::Index>(pairs_.size()));
    for (Index k = 0; k < pairs_.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = rho(pairs_[k].first, pairs_[k].second);
    }
    return v;
}

Matrix Liouvillian::unvectorize(const Vector& v) const {
    if (v.size() != static_cast<Eigen::Index>(pairs_.size())) {
        throw std::invalid_argument("Liouvillian::unvectorize: length mismatch");
    }
    const auto d = static_cast<Eigen::Index>(space_.dim());
    Matrix rho = Matrix::Zero(d, d);
    for (Index k = 0; k < pairs_.size(); ++k) {
        rho(pairs_[k].first, pairs_[k].second) = v[static_cast<Eigen::Index>(k)];
    }
    return rho;
}

Matrix Liouvillian::apply(const Matrix& rho) const {
    return unvectorize(matrix_ * vectorize(rho));
}

Liouvillian build_liouvillian(const NetworkSpec& spec, const FockSpace& space) {
    return Liouvillian(build_quantum_model(spec, space), LiouvilleBasis::full);
}

Matrix apply_lindblad(const QuantumModel& model, const Matrix& rho) {
    const Matrix h = Matrix(model.hamiltonian);
    Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
    for (const auto& c_sparse : model.collapse) {
        const Matrix c = Matrix(c_sparse);
        const Matrix cdc = c.adjoint() * c;
        out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
    }
    return out;
}

DensityMatrix steady_state_direct(const Liouvillian& liouvillian, const DirectOptions& options) {
    const FockSpace& space = liouvillian.space();
    if (space.dim() > options.max_dim) {
        throw std::invalid_argument("steady_state_direct: dimension " + std::to_string(space.dim()) +
                                    " exceeds the cap " + std::to_string(options.max_dim));
    }
    const SparseMatrix& L = liouvillian.matrix();
    const int n = static_cast<int>(L.rows());
    const long pinned = liouvillian.position(0, 0);

    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<Index>(L.nonZeros()) + space.dim());
    for (int k = 0; k < L.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(L, k); it; ++it) {
            if (it.row() != pinned) {
                trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
            }
        }
    }
    for (Index s = 0; s < space.dim(); ++s) {
        trips.emplace_back(static_cast<int>(pinned), static_cast<int>(liouvillian.position(s, s)),
                           Complex(1.0, 0.0));
    }
    SparseMatrix A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
        throw std::runtime_error("steady_state_direct: singular system, the null space is degenerate");
    }
    Vector b = Vector::Zero(n);
    b[pinned] = 1.0;
    const Vector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw std::runtime_error("steady_state_direct: solve failed");
    }
    if ((A * x - b).norm() > 1e-8 * (1.0 + x.norm())) {
        throw std::runtime_error("steady_state_direct: residual too large, null space not unique");
    }
    Matrix rho = liouvillian.unvectorize(x);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return DensityMatrix(space, std::move(rho));
}

double relative_residual(const Liouvillian& liouvillian, const DensityMatrix& rho) {
    const Vector r = liouvillian.matrix() * liouvillian.vectorize(rho.matrix());
    return r.norm() / liouvillian.matrix().norm();
}

}  // namespace activegrid::fock
