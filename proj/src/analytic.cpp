#include "activegrid/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace activegrid::analytic {

namespace {

constexpr double pi = std::numbers::pi;

void fill_kinematics(StandingWaveSolution& s, double g) {
    s.delta = s.k0 - pi / 2.0;
    s.omega = std::abs(g * std::sin(s.delta));
}

}  // namespace

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::symmetric: return "symmetric";
        case Phase::broken: return "broken";
        case Phase::critical: return "critical";
    }
    return "unknown";
}

double k0_select(double gain_rate, double loss_rate, Index n_sites) {
    if (n_sites % 2 == 0 && gain_rate > loss_rate) {
        const double n = static_cast<double>(n_sites);
        return pi * (n + 2.0) / (2.0 * n + 2.0);
    }
    return pi / 2.0;
}

StandingWaveSolution broken_phase(double gain_rate, double loss_rate, double g, double n0) {
    if (loss_rate < gain_rate) {
        throw std::invalid_argument("broken_phase: requires Ge >= Gi");
    }
    const double root = std::sqrt(gain_rate * loss_rate) / g;
    if (root < 1.0) {
        throw std::invalid_argument("broken_phase: Gi Ge < g^2, no lasing solution");
    }
    StandingWaveSolution s;
    s.phase = Phase::broken;
    s.k0 = pi / 2.0;
    fill_kinematics(s, g);
    s.omega = 0.0;
    s.A = std::sqrt((root - 1.0) * n0);
    s.B = Complex(0.0, -g / loss_rate) * s.A;
    s.current = g * g * n0 / loss_rate * (root - 1.0);
    return s;
}

StandingWaveSolution symmetric_phase_all_damped(double gain_rate, double loss_rate, double g,
                                                double gamma, Index n_sites, double n0) {
    if (gain_rate <= loss_rate) {
        throw std::invalid_argument("symmetric_phase_all_damped: requires Gi > Ge");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("symmetric_phase_all_damped: requires gamma > 0");
    }
    const double n = static_cast<double>(n_sites);
    const double diff = gain_rate - loss_rate;
    const double root = std::sqrt(2.0 * diff / (gamma * (n + 1.0)));
    if (root < 1.0) {
        throw std::invalid_argument("symmetric_phase_all_damped: no solution above the noise floor");
    }
    const double ratio = (loss_rate * (n - 1.0) + 2.0 * gain_rate) / diff;
    StandingWaveSolution s;
    s.phase = Phase::symmetric;
    s.k0 = k0_select(gain_rate, loss_rate, n_sites);
    fill_kinematics(s, g);
    s.A = std::sqrt((root - 1.0) * n0);
    s.B = Complex(0.0, -gamma / (2.0 * g) * ratio) * s.A;
    s.current = n0 * gamma / 2.0 * ratio * (root - 1.0);
    return s;
}

StandingWaveSolution symmetric_phase_end_damped(double gain_rate, double loss_rate, double g,
                                                double gamma, Index n_sites, double n0) {
    if (gain_rate <= loss_rate) {
        throw std::invalid_argument("symmetric_phase_end_damped: requires Gi > Ge");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("symmetric_phase_end_damped: requires gamma > 0");
    }
    const double diff = gain_rate - loss_rate;
    const double root = std::sqrt(diff / (2.0 * gamma));
    if (root < 1.0) {
        throw std::invalid_argument("symmetric_phase_end_damped: no solution above the noise floor");
    }
    StandingWaveSolution s;
    s.phase = Phase::symmetric;
    s.k0 = k0_select(gain_rate, loss_rate, n_sites);
    fill_kinematics(s, g);
    s.A = std::sqrt((root - 1.0) * n0);
    s.current = n0 * gamma * (gain_rate + loss_rate) / diff * (root - 1.0);
    // J = g b |A|^2 sin k0 for B = -i b A.
    const double b = s.current / (g * std::norm(s.A) * std::sin(s.k0));
    s.B = Complex(0.0, -b) * s.A;
    return s;
}

TransitionPoints transition_point(double gain_rate, double g, double gamma, Index n_sites) {
    if (gamma < 0.0) {
        throw std::invalid_argument("transition_point: gamma must be >= 0");
    }
    const double n = static_cast<double>(n_sites);
    TransitionPoints t;
    t.general = 2.0 * gain_rate * (g - gamma) / (2.0 * g + gamma * (n - 1.0));
    t.two_site = gain_rate * (g - gamma) / (g + gamma);
    t.existence_limit = gain_rate - 2.0 * gamma;
    return t;
}

Phase classify(double gain_rate, double loss_rate, double gamma, Index n_sites) {
    if (std::abs(loss_rate - gain_rate) < gamma * static_cast<double>(n_sites)) {
        return Phase::critical;
    }
    return loss_rate > gain_rate ? Phase::broken : Phase::symmetric;
}

double energy_balance_weight(Index n_sites) {
    if (n_sites == 2) {
        return 2.0;
    }
    const double n = static_cast<double>(n_sites);
    return n_sites % 2 == 1 ? (n + 1.0) / 2.0 : n / 2.0;
}

ExistenceResult symmetric_phase_exists(const NetworkSpec& spec) {
    const auto gain = spec.first_terminal(TerminalKind::gain);
    const auto loss = spec.first_terminal(TerminalKind::loss);
    if (!gain || !loss) {
        throw std::invalid_argument("symmetric_phase_exists: need a gain and a loss terminal");
    }
    ExistenceResult res;
    res.weight = energy_balance_weight(spec.n_sites());
    const double rhs = spec.bath().gamma * res.weight;
    auto h = [&](double x) {
        return rate_at(gain->rate, x, gain->law) - rate_at(loss->rate, x, loss->law) - rhs;
    };

    // Geometric scan for the last + to - sign change, then bisection.
    const double top = 1e6 * std::max(gain->law.n0, loss->law.n0);
    const double bottom = 1e-9 * std::min(gain->law.n0, loss->law.n0);
    constexpr int n_grid = 2000;
    double lo = -1.0, hi = -1.0;
    double x_prev = 0.0, h_prev = h(0.0);
    for (int k = 0; k <= n_grid; ++k) {
        const double x = bottom * std::pow(top / bottom, static_cast<double>(k) / n_grid);
        const double hx = h(x);
        if (h_prev > 0.0 && hx <= 0.0) {
            lo = x_prev;
            hi = x;
        }
        x_prev = x;
        h_prev = hx;
    }
    if (lo < 0.0) {
        return res;
    }
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > 0.0 ? lo : hi) = mid;
    }
    res.exists = true;
    res.amp_sq = 0.5 * (lo + hi);
    return res;
}

Profile standing_wave_profile(const StandingWaveSolution& sol, Index n_sites) {
    Profile p;
    p.occupations.resize(n_sites);
    p.weights.resize(n_sites);
    for (Index l = 1; l <= n_sites; ++l) {
        const double kl = sol.k0 * static_cast<double>(l);
        p.occupations[l - 1] = std::norm(sol.A * std::sin(kl) + sol.B * std::cos(kl));
    }
    const double ref = p.occupations.front();
    for (Index l = 0; l < n_sites; ++l) {
        p.weights[l] = ref > 0.0 ? p.occupations[l] / ref : 0.0;
    }
    return p;
}

StandingWaveSolution chain_solution(double gain_rate, double loss_rate, double g, double gamma,
                                    Index n_sites, double n0) {
    if (loss_rate >= gain_rate) {
        return broken_phase(gain_rate, loss_rate, g, n0);
    }
    return symmetric_phase_all_damped(gain_rate, loss_rate, g, gamma, n_sites, n0);
}

}  // namespace activegrid::analytic
