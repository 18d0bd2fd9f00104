#include "activegrid/fock.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace activegrid::fock {

FockSpace::FockSpace(Index n_modes, Index n_basis) : n_modes_(n_modes), n_basis_(n_basis) {
    if (n_modes == 0) {
        throw std::invalid_argument("FockSpace: need at least one mode");
    }
    if (n_basis < 2) {
        throw std::invalid_argument("FockSpace: n_basis must be >= 2");
    }
    dim_ = 1;
    stride_.assign(n_modes, 1);
    for (Index m = n_modes; m-- > 0;) {
        stride_[m] = dim_;
        dim_ *= n_basis;
    }
    total_.resize(dim_);
    for (Index s = 0; s < dim_; ++s) {
        Index t = 0;
        for (Index m = 0; m < n_modes; ++m) {
            t += occupation(s, m);
        }
        total_[s] = t;
    }
}

Index FockSpace::index(const std::vector<Index>& occ) const {
    if (occ.size() != n_modes_) {
        throw std::invalid_argument("FockSpace::index: wrong number of occupations");
    }
    Index s = 0;
    for (Index m = 0; m < n_modes_; ++m) {
        if (occ[m] >= n_basis_) {
            throw std::out_of_range("FockSpace::index: occupation beyond truncation");
        }
        s += occ[m] * stride_[m];
    }
    return s;
}

Index FockSpace::occupation(Index state, Index mode) const noexcept {
    return (state / stride_[mode]) % n_basis_;
}

namespace {

/// Operator lowering `mode` by one with amplitude amp(n) on |n> -> |n-1>.
template <class Amp>
SparseMatrix lowering_with(const FockSpace& space, Index mode, Amp amp) {
    if (mode >= space.n_modes()) {
        throw std::out_of_range("fock: mode index out of range");
    }
    const Index stride = space.index([&] {
        std::vector<Index> occ(space.n_modes(), 0);
        occ[mode] = 1;
        return occ;
    }());
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(space.dim());
    for (Index s = 0; s < space.dim(); ++s) {
        const Index n = space.occupation(s, mode);
        if (n > 0) {
            trips.emplace_back(static_cast<int>(s - stride), static_cast<int>(s), amp(n));
        }
    }
    SparseMatrix m(static_cast<int>(space.dim()), static_cast<int>(space.dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

}  // namespace

FockOperator lowering(const FockSpace& space, Index mode) {
    return {lowering_with(space, mode, [](Index n) { return std::sqrt(static_cast<double>(n)); }),
            {mode}};
}

FockOperator number(const FockSpace& space, Index mode) {
    if (mode >= space.n_modes()) {
        throw std::out_of_range("fock: mode index out of range");
    }
    std::vector<Eigen::Triplet<Complex>> trips;
    for (Index s = 0; s < space.dim(); ++s) {
        const Index n = space.occupation(s, mode);
        if (n > 0) {
            trips.emplace_back(static_cast<int>(s), static_cast<int>(s), static_cast<double>(n));
        }
    }
    SparseMatrix m(static_cast<int>(space.dim()), static_cast<int>(space.dim()));
    m.setFromTriplets(trips.begin(), trips.end());
    return {m, {mode}};
}

FockOperator saturated_lowering(const FockSpace& space, Index mode, const SaturationLaw& law) {
    law.validate();
    return {lowering_with(space, mode,
                          [&](Index n) {
                              const double x = static_cast<double>(n);
                              return std::sqrt(x) * saturation_f(x - 1.0, law);
                          }),
            {mode}};
}

FockOperator adjoint(const FockOperator& op) {
    return {SparseMatrix(op.matrix.adjoint()), op.modes};
}

// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(FockSpace space, Matrix rho) : space_(space), rho_(std::move(rho)) {
    if (rho_.rows() != static_cast<Eigen::Index>(space_.dim()) || rho_.cols() != rho_.rows()) {
        throw std::invalid_argument("DensityMatrix: matrix does not match the space dimension");
    }
}

double DensityMatrix::hermiticity_error() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    const Matrix h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("DensityMatrix: eigen decomposition failed");
    }
    return es.eigenvalues().minCoeff();
}

Complex DensityMatrix::expectation(const SparseMatrix& op) const {
    if (op.rows() != rho_.rows()) {
        throw std::invalid_argument("DensityMatrix::expectation: operator dimension mismatch");
    }
    // Tr(rho O) = sum_{ij} rho_ji O_ij
    Complex acc(0.0, 0.0);
    for (int k = 0; k < op.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(op, k); it; ++it) {
            acc += rho_(it.col(), it.row()) * it.value();
        }
    }
    return acc;
}

void DensityMatrix::validate(double trace_tol, double herm_tol, double neg_tol) const {
    const Complex tr = trace();
    if (std::abs(tr - 1.0) > trace_tol) {
        throw std::runtime_error("DensityMatrix: trace " + std::to_string(tr.real()) + " differs from 1");
    }
    if (hermiticity_error() > herm_tol) {
        throw std::runtime_error("DensityMatrix: not Hermitian");
    }
    if (min_eigenvalue() < -neg_tol) {
        throw std::runtime_error("DensityMatrix: negative eigenvalue beyond truncation slack");
    }
}

DensityMatrix DensityMatrix::pure(const FockSpace& space, const Vector& psi) {
    const double nrm = psi.squaredNorm();
    if (!(nrm > 0.0)) {
        throw std::invalid_argument("DensityMatrix::pure: zero vector");
    }
    return DensityMatrix(space, psi * psi.adjoint() / nrm);
}

// ---------------------------------------------------------------------------

QuantumModel build_quantum_model(const NetworkSpec& spec, const FockSpace& space) {
    if (spec.n_sites() != space.n_modes()) {
        throw std::invalid_argument("build_quantum_model: sites (" + std::to_string(spec.n_sites()) +
                                    ") must equal Fock modes (" + std::to_string(space.n_modes()) + ")");
    }
    const int d = static_cast<int>(space.dim());
    QuantumModel model{space, SparseMatrix(d, d), {}, {}};

    std::vector<SparseMatrix> a;
    for (Index m = 0; m < space.n_modes(); ++m) {
        a.push_back(lowering(space, m).matrix);
    }
    SparseMatrix h(d, d);
    for (const auto& e : spec.edges()) {
        const SparseMatrix hop = a[e.i].adjoint() * a[e.j];
        h += (-0.5 * e.g) * (hop + SparseMatrix(hop.adjoint()));
    }
    for (Index m = 0; m < space.n_modes(); ++m) {
        const double delta = spec.detunings()[m];
        if (delta != 0.0) {
            h += delta * number(space, m).matrix;
        }
    }
    model.hamiltonian = h;

    auto add = [&](double rate, SparseMatrix op, std::string label) {
        if (rate > 0.0) {
            model.collapse.push_back(std::sqrt(rate) * op);
            model.labels.push_back(std::move(label));
        }
    };
    for (const auto& t : spec.terminals()) {
        const auto A = saturated_lowering(space, t.site, t.law).matrix;
        const std::string site = std::to_string(t.site);
        if (t.kind == TerminalKind::gain) {
            add(t.rate, SparseMatrix(A.adjoint()), "gain@" + site);
        } else {
            add(t.rate, A, "loss@" + site);
        }
    }
    const auto& bath = spec.bath();
    for (Index m = 0; m < space.n_modes(); ++m) {
        const std::string site = std::to_string(m);
        add(bath.gamma * (bath.n_th + 1.0), a[m], "bath_down@" + site);
        add(bath.gamma * bath.n_th, SparseMatrix(a[m].adjoint()), "bath_up@" + site);
    }
    return model;
}

}  // namespace activegrid::fock
