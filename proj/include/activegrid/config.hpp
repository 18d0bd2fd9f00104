// config.hpp: YAML run configuration and parameter paths.
//
// Schema (all sections optional except `network`):
//
//   network:
//     kind: chain | branched | custom
//     n_sites: 10                       # chain
//     coupling: 1.0
//     gain: {rate: 4, n0: 1, nu: 2}     # chain, branched
//     loss: {rate: 4, n0: 1, nu: 2}     # chain; main path end for branched
//     loss_branch: {rate: 4}            # branched
//     bath: {gamma: 1e-3, n_th: 0}
//     detunings: [0, 0, ...]
//     edges: [[0, 1], [1, 2, 0.5]]      # custom; third entry is g
//     terminals: [{site: 0, kind: gain, rate: 4, n0: 1, nu: 2}]   # custom
//   engine: sde | steady | analytic | linear | relax | quantum
//   integrator: {dt, divergence_guard}
//   ensemble: {n_traj, burn_in_time, n_samples, sample_stride_steps,
//              histogram: {bins, range}, warm_start}
//   steady: {dt, window, tol, max_time, seed_amplitude, ramp, ramp_time, polish,
//            average_time}
//   relax: {delta_alpha, upper, lower, dt, max_time, hold_time}
//   quantum: {n_basis, method: direct | mcwf, negativity_k, dt, burn_in_time,
//             n_samples, sample_stride_steps, n_traj}
//   sweep: [{path: loss.rate, values: [1, 2]}, {path: gain.rate, range: [0.2, 8, 40]}]
//   disorder: {sigma_delta, n_realizations}
//   seed: 1
//
// Parameter paths: gain.rate, gain.n0, gain.nu (likewise loss.*), gain@S.rate
// and loss@S.rate for the terminal at site S, terminal[k].rate, bath.gamma,
// bath.n_th, coupling, detuning[k].

#pragma once

#include "activegrid/mcwf.hpp"
#include "activegrid/probe.hpp"
#include "activegrid/sde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace activegrid::cli {

enum class Engine { sde, steady, analytic, linear, relax, quantum };

[[nodiscard]] std::string to_string(Engine engine);
[[nodiscard]] Engine engine_from_string(const std::string& name);

struct Axis {
    std::string path;
    std::vector<double> values;
};

struct QuantumSettings {
    Index n_basis{30};
    bool direct{true};
    Index negativity_k{0};   // 0: all eigenvalues
    fock::McwfConfig mcwf{};
};

struct DisorderSettings {
    double sigma_delta{0.0};
    Index n_realizations{100};
};

struct RunConfig {
    NetworkSpec spec{build_chain(10, 1.0, {1e-3, 0.0}, {4.0, {}}, {4.0, {}})};
    Engine engine{Engine::sde};
    sde::IntegratorConfig integrator{};
    sde::EnsembleConfig ensemble{};
    bool warm_start{false};   // start trajectories from the noiseless steady state
    probe::SteadyStateConfig steady{};
    probe::RelaxationConfig relax{};
    QuantumSettings quantum{};
    std::vector<Axis> axes;
    DisorderSettings disorder{};
    std::uint64_t seed{0};
    std::string source;       // YAML text the config was parsed from
};

/// Parses YAML text. Throws std::invalid_argument with the offending key on
/// unknown keys, wrong types or invalid values.
[[nodiscard]] RunConfig parse_config(const std::string& yaml_text);

[[nodiscard]] RunConfig load_config(const std::string& path);

/// Copy of `spec` with the parameter at `path` set to `value`.
/// Throws std::invalid_argument if the path does not resolve.
[[nodiscard]] NetworkSpec apply_parameter(const NetworkSpec& spec, const std::string& path,
                                          double value);

/// Reads the current value at `path`.
[[nodiscard]] double read_parameter(const NetworkSpec& spec, const std::string& path);

/// "PATH=start:stop:count" (inclusive linear range) or "PATH=v1,v2,...".
[[nodiscard]] Axis parse_axis(const std::string& text);

}  // namespace activegrid::cli
