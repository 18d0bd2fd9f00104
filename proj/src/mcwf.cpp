#include "activegrid/mcwf.hpp"

#include "activegrid/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <omp.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace activegrid::fock {

void McwfConfig::validate() const {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("McwfConfig: dt must be positive");
    }
    if (!(burn_in_time >= 0.0)) {
        throw std::invalid_argument("McwfConfig: burn_in_time must be non-negative");
    }
    if (n_samples == 0 || sample_stride_steps == 0 || n_traj == 0) {
        throw std::invalid_argument("McwfConfig: n_samples, stride and n_traj must be positive");
    }
}

namespace {

/// Propagator and jump maps restricted to fixed total excitation number.
struct BlockModel {
    std::vector<std::vector<Index>> states;   // per total K, global indices
    std::vector<Matrix> propagator;           // per K
    // jump[k][K]: dense map from block K to block K + shift[k]; empty if it leaves the space
    std::vector<std::vector<Matrix>> jump;
    std::vector<int> shift;
    std::vector<std::vector<char>> top_level;  // per K, per member
    double max_jump_probability{0.0};
};

BlockModel build_blocks(const QuantumModel& model, double dt) {
    const FockSpace& space = model.space;
    const Index d = space.dim();
    const Index n_blocks = space.max_total() + 1;
    BlockModel bm;
    bm.states.resize(n_blocks);
    std::vector<Index> pos(d);
    for (Index s = 0; s < d; ++s) {
        pos[s] = bm.states[space.total(s)].size();
        bm.states[space.total(s)].push_back(s);
    }

    SparseMatrix jump_sum(static_cast<int>(d), static_cast<int>(d));
    for (const auto& c : model.collapse) {
        jump_sum += SparseMatrix(c.adjoint()) * c;
    }
    const SparseMatrix heff = model.hamiltonian - Complex(0.0, 0.5) * jump_sum;

    for (int k = 0; k < jump_sum.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(jump_sum, k); it; ++it) {
            if (it.row() == it.col()) {
                bm.max_jump_probability = std::max(bm.max_jump_probability, dt * it.value().real());
            }
        }
    }

    bm.propagator.resize(n_blocks);
    for (Index K = 0; K < n_blocks; ++K) {
        const auto m = static_cast<Eigen::Index>(bm.states[K].size());
        Matrix h = Matrix::Zero(m, m);
        for (Eigen::Index c = 0; c < m; ++c) {
            for (SparseMatrix::InnerIterator it(heff, static_cast<int>(bm.states[K][c])); it; ++it) {
                const auto r = static_cast<Index>(it.row());
                if (space.total(r) != K) {
                    throw std::logic_error("mcwf: effective Hamiltonian mixes excitation numbers");
                }
                h(static_cast<Eigen::Index>(pos[r]), c) = it.value();
            }
        }
        bm.propagator[K] = (Complex(0.0, -dt) * h).exp();
    }

    bm.top_level.resize(n_blocks);
    for (Index K = 0; K < n_blocks; ++K) {
        for (Index s : bm.states[K]) {
            bool top = false;
            for (Index m = 0; m < space.n_modes(); ++m) {
                top = top || space.occupation(s, m) == space.n_basis() - 1;
            }
            bm.top_level[K].push_back(top ? 1 : 0);
        }
    }

    for (const auto& c : model.collapse) {
        int shift = 0;
        bool found = false;
        for (int k = 0; k < c.outerSize() && !found; ++k) {
            for (SparseMatrix::InnerIterator it(c, k); it; ++it) {
                shift = static_cast<int>(space.total(static_cast<Index>(it.row()))) -
                        static_cast<int>(space.total(static_cast<Index>(it.col())));
                found = true;
                break;
            }
        }
        std::vector<Matrix> maps(n_blocks);
        for (Index K = 0; K < n_blocks; ++K) {
            const long target = static_cast<long>(K) + shift;
            if (target < 0 || target >= static_cast<long>(n_blocks)) {
                continue;
            }
            const auto T = static_cast<Index>(target);
            Matrix map = Matrix::Zero(static_cast<Eigen::Index>(bm.states[T].size()),
                                      static_cast<Eigen::Index>(bm.states[K].size()));
            for (Index col = 0; col < bm.states[K].size(); ++col) {
                for (SparseMatrix::InnerIterator it(c, static_cast<int>(bm.states[K][col])); it; ++it) {
                    const auto r = static_cast<Index>(it.row());
                    if (space.total(r) != T) {
                        throw std::logic_error("mcwf: collapse operator with mixed number shift");
                    }
                    map(static_cast<Eigen::Index>(pos[r]), static_cast<Eigen::Index>(col)) = it.value();
                }
            }
            maps[K] = std::move(map);
        }
        bm.jump.push_back(std::move(maps));
        bm.shift.push_back(shift);
    }
    return bm;
}

struct TrajectoryOutput {
    Matrix rho_sum;
    std::vector<std::size_t> jumps;
    double top_level{0.0};
    std::size_t samples{0};
};

TrajectoryOutput run_trajectory(const BlockModel& bm, const McwfConfig& cfg, Index dim, Rng rng) {
    TrajectoryOutput out;
    out.rho_sum = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    out.jumps.assign(bm.jump.size(), 0);

    Index K = 0;
    Vector psi = Vector::Ones(1);
    double r = rng.uniform();
    std::vector<double> weights(bm.jump.size());

    auto step = [&]() {
        psi = bm.propagator[K] * psi;
        const double nrm = psi.squaredNorm();
        if (nrm > r) {
            return;
        }
        if (!(nrm > 1e-300)) {
            throw std::runtime_error("mcwf: wavefunction norm underflow");
        }
        double total = 0.0;
        for (Index k = 0; k < bm.jump.size(); ++k) {
            const Matrix& map = bm.jump[k][K];
            weights[k] = map.size() > 0 ? (map * psi).squaredNorm() : 0.0;
            total += weights[k];
        }
        if (!(total > 0.0)) {
            throw std::runtime_error("mcwf: norm decayed but no jump channel is open");
        }
        double pick = rng.uniform() * total;
        Index chosen = 0;
        while (chosen + 1 < bm.jump.size() && pick >= weights[chosen]) {
            pick -= weights[chosen];
            ++chosen;
        }
        while (weights[chosen] == 0.0) {
            --chosen;  // guard against rounding past the last open channel
        }
        Vector next = bm.jump[chosen][K] * psi;
        psi = next / next.norm();
        K = static_cast<Index>(static_cast<long>(K) + bm.shift[chosen]);
        ++out.jumps[chosen];
        r = rng.uniform();
    };

    const auto burn = static_cast<std::size_t>(std::llround(cfg.burn_in_time / cfg.dt));
    for (std::size_t s = 0; s < burn; ++s) {
        step();
    }
    for (Index sample = 0; sample < cfg.n_samples; ++sample) {
        for (Index s = 0; s < cfg.sample_stride_steps; ++s) {
            step();
        }
        const Vector phi = psi / psi.norm();
        const auto& members = bm.states[K];
        for (Index b = 0; b < members.size(); ++b) {
            const Complex cb = std::conj(phi[static_cast<Eigen::Index>(b)]);
            for (Index a = 0; a < members.size(); ++a) {
                out.rho_sum(static_cast<Eigen::Index>(members[a]), static_cast<Eigen::Index>(members[b])) +=
                    phi[static_cast<Eigen::Index>(a)] * cb;
            }
            if (bm.top_level[K][b]) {
                out.top_level += std::norm(phi[static_cast<Eigen::Index>(b)]);
            }
        }
        ++out.samples;
    }
    return out;
}

McwfResult run(const QuantumModel& model, const McwfConfig& cfg, bool parallel) {
    cfg.validate();
    const BlockModel bm = build_blocks(model, cfg.dt);
    const Index dim = model.space.dim();

    std::vector<Rng> streams;
    Rng base(cfg.seed);
    for (Index k = 0; k < cfg.n_traj; ++k) {
        streams.push_back(base);
        base.jump();
    }
    std::vector<TrajectoryOutput> outs(cfg.n_traj);
    if (parallel) {
        std::string error;
#pragma omp parallel for schedule(dynamic, 1)
        for (long k = 0; k < static_cast<long>(cfg.n_traj); ++k) {
            try {
                outs[static_cast<Index>(k)] = run_trajectory(bm, cfg, dim, streams[static_cast<Index>(k)]);
            } catch (const std::exception& e) {
#pragma omp critical
                error = e.what();
            }
        }
        if (!error.empty()) {
            throw std::runtime_error(error);
        }
    } else {
        for (Index k = 0; k < cfg.n_traj; ++k) {
            outs[k] = run_trajectory(bm, cfg, dim, streams[k]);
        }
    }

    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<std::size_t> jumps(bm.jump.size(), 0);
    std::size_t samples = 0;
    double top = 0.0;
    for (const auto& o : outs) {
        sum += o.rho_sum;
        samples += o.samples;
        top += o.top_level;
        for (Index k = 0; k < o.jumps.size(); ++k) {
            jumps[k] += o.jumps[k];
        }
    }
    sum /= static_cast<double>(samples);
    sum = 0.5 * (sum + sum.adjoint()).eval();
    McwfResult res{DensityMatrix(model.space, std::move(sum)), samples, std::move(jumps),
                   model.labels, 0.0, 0.0, {}};
    res.top_level_population = top / static_cast<double>(samples);
    res.max_jump_probability = bm.max_jump_probability;

    if (res.max_jump_probability > cfg.jump_probability_limit) {
        std::ostringstream os;
        os << "jump probability per step up to " << res.max_jump_probability << " exceeds "
           << cfg.jump_probability_limit;
        res.warnings.push_back(os.str());
    }
    if (res.top_level_population > cfg.leakage_limit) {
        std::ostringstream os;
        os << "truncation leakage: top Fock level population " << res.top_level_population;
        res.warnings.push_back(os.str());
    }
    return res;
}

}  // namespace

McwfResult mcwf_run(const QuantumModel& model, const McwfConfig& config) {
    return run(model, config, true);
}

McwfResult mcwf_run_serial(const QuantumModel& model, const McwfConfig& config) {
    return run(model, config, false);
}

}  // namespace activegrid::fock
