#include "activegrid/linear.hpp"

#include <algorithm>
#include <stdexcept>

namespace activegrid::linear {

SpectrumReport spectrum(const Eigen::MatrixXcd& drift) {
    if (drift.rows() != drift.cols() || drift.rows() == 0) {
        throw std::invalid_argument("spectrum: drift matrix must be square and non-empty");
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(drift, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("spectrum: eigen decomposition failed");
    }
    SpectrumReport report;
    const auto& ev = solver.eigenvalues();
    report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end(),
              [](const Complex& a, const Complex& b) {
                  if (a.real() != b.real()) {
                      return a.real() > b.real();
                  }
                  return a.imag() > b.imag();
              });
    report.spectral_abscissa = report.eigenvalues.front().real();
    report.stable = report.spectral_abscissa < 0.0;
    return report;
}

SpectrumReport spectrum(const NetworkSpec& spec) {
    return spectrum(drift_matrix(spec));
}

bool is_stalled(double gain_rate, double loss_rate, double g) {
    if (gain_rate >= g) {
        return false;
    }
    if (loss_rate < gain_rate) {
        return false;
    }
    // Gi = 0 puts no upper bound on Ge.
    return gain_rate == 0.0 || loss_rate < g * g / gain_rate;
}

std::vector<PhaseMapPoint> phase_map(const NetworkSpec& base,
                                     const std::vector<double>& gain_rates,
                                     const std::vector<double>& loss_rates) {
    const auto gain = base.first_terminal(TerminalKind::gain);
    const auto loss = base.first_terminal(TerminalKind::loss);
    if (!gain || !loss) {
        throw std::invalid_argument("phase_map: base spec needs a gain and a loss terminal");
    }
    const double g = base.edges().front().g;
    std::vector<PhaseMapPoint> out;
    out.reserve(gain_rates.size() * loss_rates.size());
    for (double gi : gain_rates) {
        for (double ge : loss_rates) {
            const auto spec = base.with_terminal_rate(gain->site, TerminalKind::gain, gi)
                                  .with_terminal_rate(loss->site, TerminalKind::loss, ge);
            const auto rep = spectrum(spec);
            out.push_back({gi, ge, rep.spectral_abscissa, rep.stable, is_stalled(gi, ge, g)});
        }
    }
    return out;
}

}  // namespace activegrid::linear
