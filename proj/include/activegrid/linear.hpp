// linear.hpp: Spectrum of the linearized network and the stalled-transport region.

#pragma once

#include "activegrid/model.hpp"

#include <vector>

namespace activegrid::linear {

struct SpectrumReport {
    std::vector<Complex> eigenvalues;  // descending real part
    double spectral_abscissa{0.0};
    bool stable{false};                // abscissa < 0
};

/// Eigenvalues of an arbitrary drift matrix. Throws std::runtime_error if the
/// eigensolver fails.
[[nodiscard]] SpectrumReport spectrum(const Eigen::MatrixXcd& drift);

/// Eigenvalues of drift_matrix(spec).
[[nodiscard]] SpectrumReport spectrum(const NetworkSpec& spec);

/// Stalled region of the lossless linear chain: Gi < g and Gi <= Ge < g^2/Gi.
[[nodiscard]] bool is_stalled(double gain_rate, double loss_rate, double g);

struct PhaseMapPoint {
    double gain_rate;
    double loss_rate;
    double spectral_abscissa;
    bool stable;
    bool predicted_stalled;
};

/// Spectral abscissa over a (Gi, Ge) grid. `base` must carry one gain and one
/// loss terminal; their rates are replaced at each grid point.
[[nodiscard]] std::vector<PhaseMapPoint> phase_map(const NetworkSpec& base,
                                                   const std::vector<double>& gain_rates,
                                                   const std::vector<double>& loss_rates);

}  // namespace activegrid::linear
