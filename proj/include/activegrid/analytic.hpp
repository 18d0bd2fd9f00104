// analytic.hpp: Closed-form steady states of the gain/loss chain in the standing-wave ansatz
//
//   alpha_l = A sin(k0 l) + B cos(k0 l),   l = 1..N,
//
// valid for small bath damping. Amplitudes A, B are in units of sqrt(quanta);
// currents in units of g * quanta.

#pragma once

#include "activegrid/model.hpp"

#include <string>
#include <vector>

namespace activegrid::analytic {

enum class Phase { symmetric, broken, critical };

[[nodiscard]] std::string to_string(Phase phase);

struct StandingWaveSolution {
    Complex A{0.0, 0.0};
    Complex B{0.0, 0.0};
    double k0{0.0};
    double delta{0.0};      // k0 - pi/2
    double omega{0.0};      // |g sin(delta)|; the sign is a convention
    Phase phase{Phase::symmetric};
    double current{0.0};
};

/// pi (N+2) / (2N+2) for even N with Gi > Ge, pi/2 otherwise.
[[nodiscard]] double k0_select(double gain_rate, double loss_rate, Index n_sites);

/// Deep broken phase, Ge >= Gi. Throws std::invalid_argument if Ge < Gi or
/// Gi Ge < g^2.
[[nodiscard]] StandingWaveSolution broken_phase(double gain_rate, double loss_rate, double g,
                                                double n0);

/// Symmetric phase with every oscillator damped at gamma. Throws if Gi <= Ge
/// or the occupation would be negative.
[[nodiscard]] StandingWaveSolution symmetric_phase_all_damped(double gain_rate, double loss_rate,
                                                              double g, double gamma,
                                                              Index n_sites, double n0);

/// Symmetric phase with damping only at the two end sites.
[[nodiscard]] StandingWaveSolution symmetric_phase_end_damped(double gain_rate, double loss_rate,
                                                              double g, double gamma,
                                                              Index n_sites, double n0);

struct TransitionPoints {
    double general;          // 2 Gi (g - gamma) / (2g + gamma (N-1))
    double two_site;         // Gi (g - gamma) / (g + gamma)
    double existence_limit;  // Gi - 2 gamma
};

[[nodiscard]] TransitionPoints transition_point(double gain_rate, double g, double gamma,
                                                Index n_sites);

/// |Ge - Gi| < gamma N is "critical", otherwise the sign picks the phase.
[[nodiscard]] Phase classify(double gain_rate, double loss_rate, double gamma, Index n_sites);

/// Energy-balance weight sum_l eta_l: 2 for N = 2, (N+1)/2 for odd N, N/2 for even N.
[[nodiscard]] double energy_balance_weight(Index n_sites);

struct ExistenceResult {
    bool exists{false};
    double amp_sq{0.0};   // matched end-site occupation |alpha0|^2
    double weight{0.0};   // energy-balance weight used
};

/// Solves Gi(x) - Ge(x) = gamma * weight for the end-site occupation x, using
/// the laws of the first gain and loss terminals. The largest root is returned.
[[nodiscard]] ExistenceResult symmetric_phase_exists(const NetworkSpec& spec);

struct Profile {
    std::vector<double> occupations;  // zero-based sites
    std::vector<double> weights;      // occupations / occupation of site 1
};

[[nodiscard]] Profile standing_wave_profile(const StandingWaveSolution& sol, Index n_sites);

/// Applicable closed form for a chain spec: broken for Ge >= Gi, all-damped
/// symmetric otherwise. Throws where neither applies.
[[nodiscard]] StandingWaveSolution chain_solution(double gain_rate, double loss_rate, double g,
                                                  double gamma, Index n_sites, double n0);

}  // namespace activegrid::analytic
