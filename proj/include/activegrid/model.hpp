// model.hpp: Oscillator networks with saturable gain/loss terminals and local baths.
//
// All rates are expressed in units of the coupling g (g = 1 by default),
// times in units of 1/g. Site indices are zero-based.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

namespace activegrid {

using Complex = std::complex<double>;
using Index = std::size_t;

/// Saturation law f(x) = 1 / (1 + x/n0)^(nu/2). nu = 2 is the three-level
/// generator/engine form; nu = 1 is a laser-like weaker saturation.
struct SaturationLaw {
    double n0{1.0};
    double nu{2.0};

    /// Throws std::invalid_argument unless n0 > 0 and nu > 0.
    void validate() const;
};

/// f(x) for an occupation x >= 0; throws std::domain_error for x < 0.
[[nodiscard]] double saturation_f(double x, const SaturationLaw& law);

/// Saturated rate Gamma * f(x)^2 = Gamma / (1 + x/n0)^nu.
[[nodiscard]] double rate_at(double bare_rate, double amp_sq, const SaturationLaw& law);

/// Unchecked f^2(x), used in integrator inner loops.
[[nodiscard]] inline double saturation_f2_unchecked(double x, const SaturationLaw& law) noexcept;

enum class TerminalKind { gain, loss };

struct ActiveTerminal {
    Index site{0};
    TerminalKind kind{TerminalKind::gain};
    double rate{0.0};
    SaturationLaw law{};
};

struct BathSpec {
    double gamma{0.0};
    double n_th{0.0};

    /// Thermal diffusion D_th = gamma * N_th.
    [[nodiscard]] double diffusion() const noexcept { return gamma * n_th; }
};

struct Edge {
    Index i{0};
    Index j{0};
    double g{1.0};
};

/// Rate and saturation of one terminal, before it is attached to a site.
struct Drive {
    double rate{0.0};
    SaturationLaw law{};
};

/// Immutable network description. The constructor enforces connectivity,
/// index ranges, positive couplings, no self-edges or duplicate edges, and at
/// most one terminal of each kind per site.
class NetworkSpec {
public:
    NetworkSpec(Index n_sites,
                std::vector<Edge> edges,
                std::vector<double> detunings,
                BathSpec bath,
                std::vector<ActiveTerminal> terminals);

    [[nodiscard]] Index n_sites() const noexcept { return n_sites_; }
    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const std::vector<double>& detunings() const noexcept { return detunings_; }
    [[nodiscard]] const BathSpec& bath() const noexcept { return bath_; }
    [[nodiscard]] const std::vector<ActiveTerminal>& terminals() const noexcept { return terminals_; }

    /// First terminal of the given kind, if any.
    [[nodiscard]] std::optional<ActiveTerminal> first_terminal(TerminalKind kind) const;

    /// Saturation scale used to express amplitudes in units of sqrt(n0):
    /// the n0 of the first gain terminal, else of the first terminal, else 1.
    [[nodiscard]] double reference_n0() const;

    /// Edge index of (i, j) in either orientation, or nullopt.
    [[nodiscard]] std::optional<Index> find_edge(Index i, Index j) const;

    /// Middle edge of the edge list; the default edge for headline current numbers.
    [[nodiscard]] Index headline_edge() const noexcept { return edges_.size() / 2; }

    // Copies with one component replaced (validated again).
    [[nodiscard]] NetworkSpec with_detunings(std::vector<double> detunings) const;
    [[nodiscard]] NetworkSpec with_bath(BathSpec bath) const;
    [[nodiscard]] NetworkSpec with_terminals(std::vector<ActiveTerminal> terminals) const;
    [[nodiscard]] NetworkSpec with_edges(std::vector<Edge> edges) const;
    /// Replace the rate of the terminal of `kind` at `site`; throws if absent.
    [[nodiscard]] NetworkSpec with_terminal_rate(Index site, TerminalKind kind, double rate) const;

private:
    Index n_sites_;
    std::vector<Edge> edges_;
    std::vector<double> detunings_;
    BathSpec bath_;
    std::vector<ActiveTerminal> terminals_;
};

/// Linear chain 0-1-...-(n-1), gain terminal at site 0 and loss terminal at
/// site n-1, zero detunings.
[[nodiscard]] NetworkSpec build_chain(Index n, double g, BathSpec bath, Drive gain, Drive loss);

/// Chain without active terminals.
[[nodiscard]] NetworkSpec build_passive_chain(Index n, double g, BathSpec bath);

/// Nine-site grid: path 0-1-2-3-4-5-6 with branch 3-7-8; gain at 0, loss at
/// 6 and at 8. Site 3 is the crossing site.
[[nodiscard]] NetworkSpec build_branched_grid(double g, BathSpec bath, Drive gain,
                                              Drive loss_main, Drive loss_branch);

/// Linearized drift matrix (saturation frozen at f = 1):
///   M_ll = (Gi 1_gain - Ge 1_loss - gamma)/2 - i Delta_l,  M_lm = i g_lm / 2.
[[nodiscard]] Eigen::MatrixXcd drift_matrix(const NetworkSpec& spec);

// ---------------------------------------------------------------------------

inline double saturation_f2_unchecked(double x, const SaturationLaw& law) noexcept {
    const double base = 1.0 + x / law.n0;
    if (law.nu == 2.0) {
        return 1.0 / (base * base);
    }
    if (law.nu == 1.0) {
        return 1.0 / base;
    }
    return std::pow(base, -law.nu);
}

}  // namespace activegrid
