#include "activegrid/probe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace activegrid::probe {

Rk4::Rk4(const NetworkSpec& spec)
    : kernel_(spec), k1_(spec.n_sites()), k2_(spec.n_sites()), k3_(spec.n_sites()),
      k4_(spec.n_sites()), tmp_(spec.n_sites()) {}

void Rk4::step(std::vector<Complex>& a, double dt) {
    const Index n = a.size();
    kernel_.drift(a.data(), k1_.data());
    for (Index l = 0; l < n; ++l) {
        tmp_[l] = a[l] + (0.5 * dt) * k1_[l];
    }
    kernel_.drift(tmp_.data(), k2_.data());
    for (Index l = 0; l < n; ++l) {
        tmp_[l] = a[l] + (0.5 * dt) * k2_[l];
    }
    kernel_.drift(tmp_.data(), k3_.data());
    for (Index l = 0; l < n; ++l) {
        tmp_[l] = a[l] + dt * k3_[l];
    }
    kernel_.drift(tmp_.data(), k4_.data());
    const double w = dt / 6.0;
    for (Index l = 0; l < n; ++l) {
        a[l] += w * (k1_[l] + 2.0 * (k2_[l] + k3_[l]) + k4_[l]);
    }
}

std::string to_string(SteadyOutcome outcome) {
    switch (outcome) {
        case SteadyOutcome::converged: return "converged";
        case SteadyOutcome::limit_cycle: return "limit_cycle";
        case SteadyOutcome::not_converged: return "not_converged";
    }
    return "unknown";
}

namespace {

NetworkSpec with_kind_zeroed(const NetworkSpec& spec, TerminalKind kind) {
    auto terms = spec.terminals();
    for (auto& t : terms) {
        if (t.kind == kind) {
            t.rate = 0.0;
        }
    }
    return spec.with_terminals(std::move(terms));
}

Index steps_for(double time, double dt) {
    return static_cast<Index>(std::max<long long>(1, std::llround(time / dt)));
}

/// Global phase aligning `prev` onto `now`, in (-pi, pi].
double alignment_phase(const std::vector<Complex>& prev, const std::vector<Complex>& now) {
    Complex overlap(0.0, 0.0);
    for (Index l = 0; l < now.size(); ++l) {
        overlap += std::conj(prev[l]) * now[l];
    }
    return std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0;
}

}  // namespace

namespace {

/// Real residual of F(alpha) + i omega alpha, stacked as (Re, Im).
Eigen::VectorXd corotating_drift(const sde::Kernel& kernel, const Eigen::VectorXd& uv,
                                 double omega) {
    const Index n = kernel.size();
    std::vector<Complex> a(n), f(n);
    for (Index l = 0; l < n; ++l) {
        a[l] = Complex(uv[l], uv[n + l]);
    }
    kernel.drift(a.data(), f.data());
    Eigen::VectorXd out(2 * n);
    for (Index l = 0; l < n; ++l) {
        const Complex r = f[l] + Complex(0.0, omega) * a[l];
        out[l] = r.real();
        out[n + l] = r.imag();
    }
    return out;
}

Eigen::MatrixXd corotating_jacobian(const sde::Kernel& kernel, const Eigen::VectorXd& uv,
                                    double omega, double h) {
    const Index n2 = static_cast<Index>(uv.size());
    Eigen::MatrixXd jac(n2, n2);
    for (Index k = 0; k < n2; ++k) {
        Eigen::VectorXd p = uv, m = uv;
        p[k] += h;
        m[k] -= h;
        jac.col(k) = (corotating_drift(kernel, p, omega) - corotating_drift(kernel, m, omega)) / (2.0 * h);
    }
    return jac;
}

}  // namespace

FixedPoint refine_fixed_point(const NetworkSpec& spec, const sde::AmplitudeState& guess,
                              double omega_guess) {
    const sde::Kernel kernel(spec);
    const Index n = spec.n_sites();
    if (guess.alphas.size() != n) {
        throw std::invalid_argument("refine_fixed_point: guess has wrong length");
    }
    const double scale = std::sqrt(spec.reference_n0());
    const double h = 1e-7 * scale;

    // Rotate so the largest site is real; its imaginary part is traded for omega.
    Index ref = 0;
    for (Index l = 1; l < n; ++l) {
        if (std::abs(guess.alphas[l]) > std::abs(guess.alphas[ref])) {
            ref = l;
        }
    }
    FixedPoint fp;
    if (!(std::abs(guess.alphas[ref]) > 1e-8 * scale)) {
        return fp;
    }
    const Complex gauge = std::polar(1.0, -std::arg(guess.alphas[ref]));
    Eigen::VectorXd uv(2 * n);
    for (Index l = 0; l < n; ++l) {
        const Complex a = gauge * guess.alphas[l];
        uv[l] = a.real();
        uv[n + l] = a.imag();
    }
    uv[n + ref] = 0.0;
    double omega = omega_guess;

    double res = corotating_drift(kernel, uv, omega).norm() / scale;
    for (int it = 0; it < 40 && res > 1e-14; ++it) {
        Eigen::MatrixXd jac = corotating_jacobian(kernel, uv, omega, h);
        // d/d omega of i omega alpha, placed in the slot of Im alpha_ref.
        for (Index l = 0; l < n; ++l) {
            jac(l, n + ref) = -uv[n + l];
            jac(n + l, n + ref) = uv[l];
        }
        const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-corotating_drift(kernel, uv, omega));
        if (!step.allFinite()) {
            return fp;
        }
        for (Index k = 0; k < 2 * n; ++k) {
            if (k == n + ref) {
                omega += step[k];
            } else {
                uv[k] += step[k];
            }
        }
        const double next = corotating_drift(kernel, uv, omega).norm() / scale;
        if (!(next < 1e3 * std::max(res, 1e-12))) {
            return fp;
        }
        res = next;
    }
    if (!(res < 1e-12)) {
        return fp;
    }

    const Eigen::MatrixXd jac = corotating_jacobian(kernel, uv, omega, h);
    const Eigen::VectorXcd ev = jac.eigenvalues();
    Index gauge_mode = 0;
    for (Index k = 1; k < static_cast<Index>(ev.size()); ++k) {
        if (std::abs(ev[k]) < std::abs(ev[gauge_mode])) {
            gauge_mode = k;
        }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < static_cast<Index>(ev.size()); ++k) {
        if (k != gauge_mode) {
            top = std::max(top, ev[k].real());
        }
    }

    fp.ok = true;
    fp.state.alphas.resize(n);
    const Complex back = std::conj(gauge);
    for (Index l = 0; l < n; ++l) {
        fp.state.alphas[l] = back * Complex(uv[l], uv[n + l]);
    }
    fp.state.time = guess.time;
    fp.omega = omega;
    fp.residual = res;
    fp.slowest_rate = -top;
    fp.stable = top < 0.0;
    return fp;
}

SteadyStateResult deterministic_steady_state(const NetworkSpec& spec,
                                             const SteadyStateConfig& config) {
    if (!(config.dt > 0.0) || !(config.window > 0.0) || !(config.tol > 0.0)) {
        throw std::invalid_argument("SteadyStateConfig: dt, window and tol must be positive");
    }
    const Index n = spec.n_sites();
    const double n0 = spec.reference_n0();
    const double scale = std::sqrt(n0);

    std::vector<Complex> a(n);
    if (config.initial) {
        if (config.initial->alphas.size() != n) {
            throw std::invalid_argument("deterministic_steady_state: initial state has wrong length");
        }
        a = config.initial->alphas;
    } else {
        std::mt19937_64 gen(config.seed);
        std::normal_distribution<double> nd(0.0, config.seed_amplitude * scale);
        for (auto& x : a) {
            const double re = nd(gen);
            const double im = nd(gen);
            x = Complex(re, im);
        }
    }

    double t = 0.0;
    if (config.ramp != RampOrder::none) {
        const auto partial = with_kind_zeroed(
            spec, config.ramp == RampOrder::gain_first ? TerminalKind::loss : TerminalKind::gain);
        Rk4 ramp(partial);
        const Index steps = steps_for(config.ramp_time, config.dt);
        for (Index s = 0; s < steps; ++s) {
            ramp.step(a, config.dt);
        }
        t += static_cast<double>(steps) * config.dt;
    }

    Rk4 rk(spec);
    const auto& edges = spec.edges();
    const Index window_steps = steps_for(config.window, config.dt);
    const Index sample_every = std::max<Index>(1, window_steps / 100);
    const double t_end = t + config.max_time;

    SteadyStateResult res;
    std::vector<Complex> prev = a;
    double last_polish_residual = std::numeric_limits<double>::infinity();
    std::vector<double> occ(n), occ_min(n), occ_max(n), cur(edges.size());
    // Per-window means over the trailing averaging time.
    std::deque<std::pair<std::vector<double>, std::vector<double>>> trail;
    const std::size_t trail_len =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.average_time / config.window));
    while (true) {
        std::fill(occ.begin(), occ.end(), 0.0);
        std::fill(cur.begin(), cur.end(), 0.0);
        std::fill(occ_min.begin(), occ_min.end(), std::numeric_limits<double>::infinity());
        std::fill(occ_max.begin(), occ_max.end(), 0.0);
        Index samples = 0;
        for (Index s = 0; s < window_steps; ++s) {
            rk.step(a, config.dt);
            if ((s + 1) % sample_every == 0) {
                ++samples;
                for (Index l = 0; l < n; ++l) {
                    const double x = std::norm(a[l]);
                    occ[l] += x;
                    occ_min[l] = std::min(occ_min[l], x);
                    occ_max[l] = std::max(occ_max[l], x);
                }
                for (Index k = 0; k < edges.size(); ++k) {
                    cur[k] += sde::bond_current(std::span<const Complex>(a), edges[k]);
                }
            }
        }
        t += static_cast<double>(window_steps) * config.dt;
        for (auto& x : occ) x /= static_cast<double>(samples);
        for (auto& x : cur) x /= static_cast<double>(samples);
        trail.emplace_back(occ, cur);
        if (trail.size() > trail_len) {
            trail.pop_front();
        }

        bool finite = true;
        for (const auto& x : a) {
            finite = finite && std::isfinite(x.real()) && std::isfinite(x.imag());
        }
        if (!finite) {
            throw std::runtime_error("deterministic_steady_state: integration diverged");
        }

        const double phi = alignment_phase(prev, a);
        const Complex rot = std::polar(1.0, phi);
        double d2 = 0.0;
        for (Index l = 0; l < n; ++l) {
            d2 += std::norm(a[l] - rot * prev[l]);
        }
        res.residual = std::sqrt(d2) / scale;
        res.omega = -phi / (static_cast<double>(window_steps) * config.dt);

        double swing = 0.0, occ_total = 0.0;
        for (Index l = 0; l < n; ++l) {
            occ_total += occ[l];
        }
        for (Index l = 0; l < n; ++l) {
            if (occ_total > 0.0) {
                swing = std::max(swing, (occ_max[l] - occ_min[l]) / (occ_total / static_cast<double>(n)));
            }
        }
        res.occupation_swing = swing;

        if (config.polish && res.residual < config.polish_trigger &&
            res.residual < 0.1 * last_polish_residual && res.residual >= config.tol) {
            last_polish_residual = res.residual;
            const auto fp = refine_fixed_point(spec, {a, t}, res.omega);
            double moved = 0.0, size = 0.0;
            if (fp.ok) {
                for (Index l = 0; l < n; ++l) {
                    moved += std::norm(fp.state.alphas[l] - a[l]);
                    size += std::norm(a[l]);
                }
            }
            if (fp.ok && fp.stable && moved < 0.05 * 0.05 * size) {
                a = fp.state.alphas;
                res.polished = true;
                prev = a;
                trail.clear();
                continue;
            }
        }

        const bool done = res.residual < config.tol;
        if (done || t >= t_end) {
            res.occupations = occ;
            res.currents = cur;
            if (!done) {
                std::fill(res.occupations.begin(), res.occupations.end(), 0.0);
                std::fill(res.currents.begin(), res.currents.end(), 0.0);
                for (const auto& [o, c] : trail) {
                    for (Index l = 0; l < n; ++l) res.occupations[l] += o[l] / trail.size();
                    for (Index k = 0; k < c.size(); ++k) res.currents[k] += c[k] / trail.size();
                }
            }
            if (done) {
                res.outcome = SteadyOutcome::converged;
            } else {
                res.outcome = swing > 1e-6 ? SteadyOutcome::limit_cycle : SteadyOutcome::not_converged;
            }
            res.state.alphas = a;
            res.state.time = t;
            return res;
        }
        prev = a;
    }
}

double corotating_residual(const NetworkSpec& spec, const sde::AmplitudeState& state,
                           double omega) {
    const auto f = sde::drift(state, spec);
    double r2 = 0.0;
    for (Index l = 0; l < f.size(); ++l) {
        r2 += std::norm(f[l] + Complex(0.0, omega) * state.alphas[l]);
    }
    return std::sqrt(r2) / std::sqrt(spec.reference_n0());
}

RelaxationReport relaxation_time(const NetworkSpec& spec, const sde::AmplitudeState& steady_state,
                                 const RelaxationConfig& config) {
    if (!(config.upper > config.lower) || !(config.lower > 0.0) || !(config.dt > 0.0)) {
        throw std::invalid_argument("RelaxationConfig: need upper > lower > 0 and dt > 0");
    }
    if (steady_state.alphas.size() != spec.n_sites()) {
        throw std::invalid_argument("relaxation_time: steady state has wrong length");
    }
    const double n0 = spec.reference_n0();
    Index site = 0;
    if (auto g = spec.first_terminal(TerminalKind::gain)) {
        site = g->site;
    }

    RelaxationReport rep;
    rep.upper = config.upper;
    rep.lower = config.lower;
    rep.delta_alpha = config.delta_alpha;

    std::vector<Complex> ref = steady_state.alphas;
    std::vector<Complex> kicked = ref;
    Complex direction(1.0, 0.0);
    if (config.radial_kick && std::abs(ref[site]) > 0.0) {
        direction = ref[site] / std::abs(ref[site]);
    }
    kicked[site] += config.delta_alpha * std::sqrt(n0) * direction;
    Rk4 rk_ref(spec), rk_kicked(spec);

    const Index max_steps = steps_for(config.max_time, config.dt);
    bool seen_upper = false, dropped_below_upper = false;
    double t = 0.0;
    for (Index s = 0; s < max_steps; ++s) {
        rk_ref.step(ref, config.dt);
        rk_kicked.step(kicked, config.dt);
        t += config.dt;
        const double dev = std::abs(std::norm(kicked[site]) - std::norm(ref[site])) / n0;
        if (dev >= config.upper) {
            if (dropped_below_upper) {
                rep.monotone = false;
                dropped_below_upper = false;
            }
            seen_upper = true;
            rep.t_upper = t;
        } else if (seen_upper) {
            dropped_below_upper = true;
        }
        if (dev >= config.lower) {
            rep.t_lower = t;
        }
        if (seen_upper && dev < config.lower && t - rep.t_lower > config.hold_time) {
            rep.converged = true;
            break;
        }
    }
    rep.tau_r = (rep.t_lower - rep.t_upper) / std::log(config.upper / config.lower);
    if (rep.converged && !(rep.tau_r > 0.0)) {
        rep.converged = false;
    }
    return rep;
}

PowerLawFit critical_exponent_fit(const std::vector<ScalingSample>& samples, double window_lo,
                                  double window_hi) {
    if (!(window_lo > 0.0)) {
        throw std::invalid_argument(
            "critical_exponent_fit: window must lie strictly on the Ge > Gi side");
    }
    if (!(window_hi > window_lo)) {
        throw std::invalid_argument("critical_exponent_fit: empty window");
    }
    std::vector<double> xs, ys;
    for (const auto& s : samples) {
        if (s.distance >= window_lo && s.distance <= window_hi && s.tau_r > 0.0) {
            xs.push_back(std::log(s.distance));
            ys.push_back(std::log(s.tau_r));
        }
    }
    if (xs.size() < 4) {
        throw std::invalid_argument("critical_exponent_fit: need at least four points in the window");
    }
    const double nx = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / nx;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / nx;
    double sxx = 0.0, sxy = 0.0;
    for (Index k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (Index k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (intercept + slope * xs[k]);
        ssr += r * r;
    }
    PowerLawFit fit;
    fit.xi = -slope;
    fit.xi_stderr = xs.size() > 2 ? std::sqrt(ssr / (nx - 2.0) / sxx) : 0.0;
    fit.log_prefactor = intercept;
    fit.n_points = xs.size();
    return fit;
}

CriticalScan critical_exponent_scan(const NetworkSpec& base, const std::vector<double>& distances,
                                    const SteadyStateConfig& steady, const RelaxationConfig& relax) {
    const auto gain = base.first_terminal(TerminalKind::gain);
    const auto loss = base.first_terminal(TerminalKind::loss);
    if (!gain || !loss) {
        throw std::invalid_argument("critical_exponent_scan: need a gain and a loss terminal");
    }
    CriticalScan scan;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double d : distances) {
        const auto spec = base.with_terminal_rate(loss->site, TerminalKind::loss, gain->rate + d);
        const auto ss = deterministic_steady_state(spec, steady);
        auto rep = relaxation_time(spec, ss.state, relax);
        scan.reports.push_back(rep);
        if (rep.converged) {
            scan.samples.push_back({d, rep.tau_r});
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    if (scan.samples.size() >= 4 && lo > 0.0) {
        scan.fit = critical_exponent_fit(scan.samples, lo, hi);
    }
    return scan;
}

}  // namespace activegrid::probe
