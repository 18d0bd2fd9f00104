// sde.hpp: Semiclassical Ito dynamics of the network amplitudes.
//
//   d alpha_l = F_l(alpha) dt + sigma_l(alpha) dW_l,   <dW* dW> = dt,
//   F_l = -(gamma/2 + i Delta_l) alpha_l + (i/2) sum_m g_lm alpha_m
//         + Gi(alpha_l) alpha_l / 2   (gain sites)
//         - Ge(alpha_l) alpha_l / 2   (loss sites),
//   sigma_l = sqrt(gamma N_th + Gi(alpha_l)) at gain sites, sqrt(gamma N_th) elsewhere.
//
// The ensemble driver comes in two flavours with identical results: an
// OpenMP version parallel over trajectories and a serial reference.

#pragma once

#include "activegrid/model.hpp"
#include "activegrid/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace activegrid::sde {

struct AmplitudeState {
    std::vector<Complex> alphas;
    double time{0.0};
};

enum class Scheme { euler_maruyama };

struct IntegratorConfig {
    double dt{1e-4};
    std::uint64_t seed{0};
    Scheme scheme{Scheme::euler_maruyama};
    /// A trajectory diverges once some |alpha|^2 exceeds guard * reference n0.
    double divergence_guard{1e6};

    void validate() const;
};

struct HistogramSpec {
    Index bins{101};     // per axis; 0 disables histograms
    double range{4.0};   // covers [-range, range]^2 in units of sqrt(n0)
};

struct EnsembleConfig {
    Index n_traj{50};
    double burn_in_time{5000.0};
    Index n_samples{3000};
    Index sample_stride_steps{17000};
    HistogramSpec histogram{};
    /// Start every trajectory here instead of the vacuum.
    std::optional<AmplitudeState> initial{};

    void validate() const;
};

struct ObservableRecord {
    std::vector<Edge> edges;
    std::vector<double> mean_current;      // per edge, oriented edge.i -> edge.j
    std::vector<double> current_std;       // per edge, pooled over all samples
    std::vector<double> occupations;       // <|alpha_l|^2>
    std::vector<double> occupation_std;
    double mean_damping_rate{0.0};         // <sum_loss Ge(alpha) - sum_gain Gi(alpha)>
    double damping_rate_std{0.0};
    double injected_power{0.0};            // <sum_gain Gi(alpha)|alpha|^2>
    double extracted_power{0.0};           // <sum_loss Ge(alpha)|alpha|^2>
    double bath_power{0.0};                // gamma sum_l <|alpha_l|^2>
    double quantum_dominance{0.0};         // N_q = Gi / gamma
    Index headline_edge{0};

    std::size_t sample_count{0};
    std::size_t n_traj_requested{0};
    std::size_t n_traj_completed{0};
    std::vector<std::size_t> diverged_trajectories;
    bool complete{true};

    double n0_scale{1.0};
    HistogramSpec histogram{};
    std::vector<std::vector<std::uint64_t>> histograms;  // per site, [re_bin * bins + im_bin]
    std::vector<std::uint64_t> histogram_overflow;       // per site

    double dt{0.0};
    std::vector<std::string> warnings;
};

/// Reference drift evaluation, straight from the network description.
[[nodiscard]] std::vector<Complex> drift(const AmplitudeState& state, const NetworkSpec& spec);

/// Per-site diffusion strengths sigma_l.
[[nodiscard]] std::vector<double> noise_amplitudes(const AmplitudeState& state,
                                                   const NetworkSpec& spec);

/// g_ij Im(alpha_i^* alpha_j), the current flowing from edge.i into edge.j.
[[nodiscard]] double bond_current(const AmplitudeState& state, const Edge& edge);
[[nodiscard]] double bond_current(std::span<const Complex> alphas, const Edge& edge) noexcept;

struct StepResult {
    AmplitudeState state;
    bool diverged{false};
};

/// One Euler-Maruyama step, diffusion evaluated at the start of the step.
[[nodiscard]] StepResult em_step(const AmplitudeState& state, const NetworkSpec& spec,
                                 const IntegratorConfig& config, Rng& rng);

/// Drift and diffusion compiled from a NetworkSpec into flat arrays.
class Kernel {
public:
    explicit Kernel(const NetworkSpec& spec);

    [[nodiscard]] Index size() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    void drift(const Complex* alpha, Complex* out) const noexcept;
    void diffusion(const Complex* alpha, double* sigma) const noexcept;

    /// Sites whose diffusion can be non-zero; only these draw noise.
    [[nodiscard]] const std::vector<Index>& noisy_sites() const noexcept { return noisy_; }

    /// Euler-Maruyama update in place. `scratch` must hold 2*size() doubles'
    /// worth of complex drift plus sigma storage (see implementation).
    void em_step(Complex* alpha, double dt, Rng& rng,
                 boost::random::normal_distribution<double>& normal,
                 std::vector<Complex>& drift_scratch, std::vector<double>& sigma_scratch) const;

    // Terminal bookkeeping for observables.
    struct Terminal {
        Index site;
        TerminalKind kind;
        double rate;
        SaturationLaw law;
    };
    [[nodiscard]] const std::vector<Terminal>& terminals() const noexcept { return terminals_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double max_rate() const noexcept;

private:
    Index n_{0};
    std::vector<Complex> diag_;
    std::vector<Index> adj_ptr_;
    std::vector<Index> adj_idx_;
    std::vector<double> adj_half_g_;
    std::vector<Terminal> terminals_;
    std::vector<Index> noisy_;
    std::vector<Edge> edges_;
    double gamma_{0.0};
    double d_th_{0.0};
};

/// Trajectory ensemble, parallel over trajectories (OpenMP).
[[nodiscard]] ObservableRecord run_ensemble(const NetworkSpec& spec, const IntegratorConfig& integ,
                                            const EnsembleConfig& ens);

/// Same computation in a plain serial loop; kept as the reference the
/// parallel driver is checked against.
[[nodiscard]] ObservableRecord run_ensemble_serial(const NetworkSpec& spec,
                                                   const IntegratorConfig& integ,
                                                   const EnsembleConfig& ens);

struct Histogram2D {
    Index bins{0};
    double range{0.0};
    std::vector<double> probability;  // [re_bin * bins + im_bin], divided by all samples
    double overflow_fraction{0.0};

    [[nodiscard]] double at(Index re_bin, Index im_bin) const { return probability[re_bin * bins + im_bin]; }
    [[nodiscard]] double bin_center(Index b) const;
    [[nodiscard]] double l1_distance(const Histogram2D& other) const;
};

/// Normalized phase-space histogram of site `site` over (Re, Im) alpha / sqrt(n0).
[[nodiscard]] Histogram2D marginal_histogram(const ObservableRecord& record, Index site);

}  // namespace activegrid::sde
