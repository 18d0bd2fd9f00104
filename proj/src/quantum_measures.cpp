#include "activegrid/quantum_measures.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace activegrid::fock {

namespace {

void require_two_modes(const FockSpace& space) {
    if (space.n_modes() != 2) {
        throw std::invalid_argument("quantum measure defined for two-mode spaces only");
    }
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("Hermitian eigen decomposition failed");
    }
    return es.eigenvalues();
}

}  // namespace

SparseMatrix current_operator(const FockSpace& space, double g) {
    require_two_modes(space);
    const SparseMatrix a0 = lowering(space, 0).matrix;
    const SparseMatrix a1 = lowering(space, 1).matrix;
    const SparseMatrix forward = a1.adjoint() * a0;
    const SparseMatrix backward = a0.adjoint() * a1;
    return Complex(0.0, 0.5 * g) * (forward - backward);
}

double expectation_current(const DensityMatrix& rho, double g) {
    return rho.expectation(current_operator(rho.space(), g)).real();
}

double current_fluctuation(const DensityMatrix& rho, double g) {
    const SparseMatrix j = current_operator(rho.space(), g);
    const SparseMatrix j2 = j * j;
    const double mean = rho.expectation(j).real();
    const double second = rho.expectation(j2).real();
    return std::sqrt(std::max(0.0, second - mean * mean));
}

std::vector<double> occupations(const DensityMatrix& rho) {
    std::vector<double> out;
    for (Index m = 0; m < rho.space().n_modes(); ++m) {
        out.push_back(rho.expectation(number(rho.space(), m).matrix).real());
    }
    return out;
}

Matrix partial_transpose(const DensityMatrix& rho) {
    require_two_modes(rho.space());
    const Index nb = rho.space().n_basis();
    const Matrix& r = rho.matrix();
    Matrix pt(r.rows(), r.cols());
    for (Index i1 = 0; i1 < nb; ++i1) {
        for (Index i2 = 0; i2 < nb; ++i2) {
            for (Index j1 = 0; j1 < nb; ++j1) {
                for (Index j2 = 0; j2 < nb; ++j2) {
                    pt(i1 * nb + i2, j1 * nb + j2) = r(i1 * nb + j2, j1 * nb + i2);
                }
            }
        }
    }
    return pt;
}

double negativity(const DensityMatrix& rho, std::optional<Index> k_lowest) {
    const Matrix pt = partial_transpose(rho);
    const Eigen::VectorXd ev = hermitian_eigenvalues(0.5 * (pt + pt.adjoint()));  // ascending
    const Index k = std::min<Index>(k_lowest.value_or(static_cast<Index>(ev.size())),
                                    static_cast<Index>(ev.size()));
    double neg = 0.0;
    for (Index i = 0; i < k; ++i) {
        if (ev[static_cast<Eigen::Index>(i)] < 0.0) {
            neg -= ev[static_cast<Eigen::Index>(i)];
        }
    }
    return neg;
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (!(rho.space() == sigma.space())) {
        throw std::invalid_argument("trace_distance: density matrices live on different spaces");
    }
    const Matrix diff = rho.matrix() - sigma.matrix();
    const Eigen::VectorXd ev = hermitian_eigenvalues(0.5 * (diff + diff.adjoint()));
    return 0.5 * ev.cwiseAbs().sum();
}

double clip_negative_eigenvalues(DensityMatrix& rho, double floor) {
    const Matrix h = 0.5 * (rho.matrix() + rho.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("clip_negative_eigenvalues: eigen decomposition failed");
    }
    Eigen::VectorXd ev = es.eigenvalues();
    double clipped = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < floor) {
            throw std::runtime_error("clip_negative_eigenvalues: eigenvalue below the clipping floor");
        }
        if (ev[i] < 0.0) {
            clipped -= ev[i];
            ev[i] = 0.0;
        }
    }
    if (clipped > 0.0) {
        Matrix fixed = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
        fixed /= fixed.trace();
        rho = DensityMatrix(rho.space(), std::move(fixed));
    }
    return clipped;
}

}  // namespace activegrid::fock
