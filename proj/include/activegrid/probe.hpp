// probe.hpp: Noise-free dynamics: steady states, relaxation times, critical scaling.

#pragma once

#include "activegrid/model.hpp"
#include "activegrid/sde.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace activegrid::probe {

/// Classical RK4 on the noiseless drift, fixed step.
class Rk4 {
public:
    explicit Rk4(const NetworkSpec& spec);
    void step(std::vector<Complex>& alpha, double dt);
    [[nodiscard]] const sde::Kernel& kernel() const noexcept { return kernel_; }

private:
    sde::Kernel kernel_;
    std::vector<Complex> k1_, k2_, k3_, k4_, tmp_;
};

/// Switch-on order of the terminal rates before the free evolution starts.
enum class RampOrder { none, gain_first, loss_first };

struct SteadyStateConfig {
    double dt{1e-3};
    double window{10.0};           // convergence window T
    double tol{1e-11};             // on ||alpha(t+T) - e^{i phi} alpha(t)|| / sqrt(n0)
    double max_time{1e5};
    double seed_amplitude{1e-3};   // random initial amplitude per site, units sqrt(n0)
    std::uint64_t seed{1};
    RampOrder ramp{RampOrder::none};
    double ramp_time{500.0};
    std::optional<sde::AmplitudeState> initial{};
    /// Once the window difference drops below `polish_trigger`, refine with
    /// Newton iterations on F(alpha) + i omega alpha = 0 and keep integrating
    /// from the refined state. A weakly damped mode otherwise needs very long
    /// integration to reach `tol`.
    bool polish{true};
    double polish_trigger{1e-2};
    /// A run that ends without converging reports occupations and currents
    /// averaged over this trailing time.
    double average_time{1000.0};
};

enum class SteadyOutcome { converged, limit_cycle, not_converged };

[[nodiscard]] std::string to_string(SteadyOutcome outcome);

struct SteadyStateResult {
    sde::AmplitudeState state;
    SteadyOutcome outcome{SteadyOutcome::not_converged};
    double residual{0.0};                 // last window difference, units sqrt(n0)
    double omega{0.0};                    // rotation frequency of the steady frame
    std::vector<double> occupations;      // last window; trailing average if not converged
    std::vector<double> currents;         // per edge, same averaging
    double occupation_swing{0.0};         // max relative peak-to-peak of |alpha_l|^2 in the last window
    bool polished{false};                 // a Newton refinement was accepted

    [[nodiscard]] bool converged() const noexcept { return outcome == SteadyOutcome::converged; }
};

/// Integrates from a small random seed until two states one window apart agree
/// up to a global phase. The phase comparison handles the rotating symmetric
/// phase and detuned networks alike.
[[nodiscard]] SteadyStateResult deterministic_steady_state(const NetworkSpec& spec,
                                                           const SteadyStateConfig& config = {});

struct FixedPoint {
    bool ok{false};
    sde::AmplitudeState state;
    double omega{0.0};
    double residual{0.0};        // ||F + i omega alpha|| / sqrt(n0)
    double slowest_rate{0.0};    // smallest decay rate of the linearization, gauge mode excluded
    bool stable{false};
};

/// Newton iteration for a relative equilibrium alpha(t) = e^{-i omega t} alpha
/// started from `guess`. The global phase is fixed at the largest site.
[[nodiscard]] FixedPoint refine_fixed_point(const NetworkSpec& spec,
                                            const sde::AmplitudeState& guess, double omega_guess);

/// ||F(alpha) + i omega alpha|| / sqrt(n0): the drift seen in the frame
/// rotating with omega.
[[nodiscard]] double corotating_residual(const NetworkSpec& spec, const sde::AmplitudeState& state,
                                         double omega);

struct RelaxationConfig {
    double delta_alpha{0.1};   // kick of the gain-site amplitude, units sqrt(n0)
    double upper{1e-5};        // occupation deviation thresholds, units n0
    double lower{1e-8};
    double dt{1e-3};
    double max_time{1e5};
    double hold_time{100.0};   // deviation must stay below `lower` this long
    /// Kick along the phase of the steady gain-site amplitude, i.e. change
    /// |alpha_1| only. Otherwise the kick is real.
    bool radial_kick{true};
};

struct RelaxationReport {
    double tau_r{0.0};
    bool converged{false};
    bool monotone{true};       // false if the deviation re-crossed `upper` after dropping below it
    double t_upper{0.0};
    double t_lower{0.0};
    double upper{0.0};
    double lower{0.0};
    double delta_alpha{0.0};
};

/// tau_r = (t_lower - t_upper) / ln(upper/lower), where t_x is the last time
/// the gain-site occupation deviation exceeds x. The kicked trajectory is
/// compared with an unkicked twin started from the same steady state.
[[nodiscard]] RelaxationReport relaxation_time(const NetworkSpec& spec,
                                               const sde::AmplitudeState& steady_state,
                                               const RelaxationConfig& config = {});

struct PowerLawFit {
    double xi{0.0};            // tau ~ x^{-xi}
    double xi_stderr{0.0};
    double log_prefactor{0.0};
    std::size_t n_points{0};
};

struct ScalingSample {
    double distance;           // Ge - Gi
    double tau_r;
};

/// Least-squares slope of log tau against log distance for samples inside
/// [window_lo, window_hi]. Throws std::invalid_argument for windows reaching
/// into Ge <= Gi, or with fewer than four points.
[[nodiscard]] PowerLawFit critical_exponent_fit(const std::vector<ScalingSample>& samples,
                                                double window_lo, double window_hi);

struct CriticalScan {
    std::vector<ScalingSample> samples;
    std::vector<RelaxationReport> reports;
    PowerLawFit fit;
};

/// Relaxation times at Ge = Gi + d for each distance d, then the power-law fit
/// over all of them.
[[nodiscard]] CriticalScan critical_exponent_scan(const NetworkSpec& base,
                                                  const std::vector<double>& distances,
                                                  const SteadyStateConfig& steady = {},
                                                  const RelaxationConfig& relax = {});

}  // namespace activegrid::probe
