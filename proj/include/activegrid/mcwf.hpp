// mcwf.hpp: Monte-Carlo wavefunction unravelling of the master equation.
//
// Fixed-step first-order scheme: psi <- U psi with U = exp(-i H_eff dt); a
// jump happens once ||psi||^2 drops below a uniform draw r, the channel is
// chosen with weight ||c_k psi||^2 and r is redrawn. H_eff conserves the
// total excitation number, so U is applied block by block.

#pragma once

#include "activegrid/fock.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace activegrid::fock {

struct McwfConfig {
    double dt{2e-3};
    double burn_in_time{1e4};
    Index n_samples{1000};           // per trajectory
    Index sample_stride_steps{800};
    Index n_traj{1};
    std::uint64_t seed{0};
    double leakage_limit{1e-3};      // top-level population above this is reported
    double jump_probability_limit{0.1};

    void validate() const;
};

struct McwfResult {
    DensityMatrix rho;                 // average of the sampled |psi><psi|
    std::size_t sample_count{0};
    std::vector<std::size_t> jump_counts;  // per collapse channel, all trajectories
    std::vector<std::string> channel_labels;
    double max_jump_probability{0.0};  // dt * max_n <n| sum c^dag c |n>
    double top_level_population{0.0};  // sampled weight on states with some mode at n_basis - 1
    std::vector<std::string> warnings;
};

/// Trajectories run in parallel (OpenMP), one xoshiro stream each; samples
/// are merged in trajectory order. Throws std::runtime_error on norm
/// underflow. Every trajectory starts in the vacuum.
[[nodiscard]] McwfResult mcwf_run(const QuantumModel& model, const McwfConfig& config);

/// Serial reference of mcwf_run with identical results.
[[nodiscard]] McwfResult mcwf_run_serial(const QuantumModel& model, const McwfConfig& config);

}  // namespace activegrid::fock
