#include "activegrid/sde.hpp"

#include "activegrid/stats.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace activegrid::sde {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("IntegratorConfig: dt must be positive");
    }
    if (!(divergence_guard > 0.0)) {
        throw std::invalid_argument("IntegratorConfig: divergence_guard must be positive");
    }
}

void EnsembleConfig::validate() const {
    if (n_traj == 0 || n_samples == 0 || sample_stride_steps == 0) {
        throw std::invalid_argument("EnsembleConfig: n_traj, n_samples and stride must be positive");
    }
    if (!(burn_in_time >= 0.0)) {
        throw std::invalid_argument("EnsembleConfig: burn_in_time must be non-negative");
    }
    if (histogram.bins > 0 && !(histogram.range > 0.0)) {
        throw std::invalid_argument("EnsembleConfig: histogram range must be positive");
    }
}

namespace {

void check_state(const AmplitudeState& state, const NetworkSpec& spec) {
    if (state.alphas.size() != spec.n_sites()) {
        throw std::invalid_argument("AmplitudeState: length must equal number of sites");
    }
}

}  // namespace

std::vector<Complex> drift(const AmplitudeState& state, const NetworkSpec& spec) {
    check_state(state, spec);
    const auto& a = state.alphas;
    const double gamma = spec.bath().gamma;
    std::vector<Complex> out(a.size());
    for (Index l = 0; l < a.size(); ++l) {
        out[l] = Complex(-0.5 * gamma, -spec.detunings()[l]) * a[l];
    }
    for (const auto& e : spec.edges()) {
        out[e.i] += Complex(0.0, 0.5 * e.g) * a[e.j];
        out[e.j] += Complex(0.0, 0.5 * e.g) * a[e.i];
    }
    for (const auto& t : spec.terminals()) {
        const double r = rate_at(t.rate, std::norm(a[t.site]), t.law);
        out[t.site] += (t.kind == TerminalKind::gain ? 0.5 : -0.5) * r * a[t.site];
    }
    return out;
}

std::vector<double> noise_amplitudes(const AmplitudeState& state, const NetworkSpec& spec) {
    check_state(state, spec);
    std::vector<double> var(spec.n_sites(), spec.bath().diffusion());
    for (const auto& t : spec.terminals()) {
        if (t.kind == TerminalKind::gain) {
            var[t.site] += rate_at(t.rate, std::norm(state.alphas[t.site]), t.law);
        }
    }
    for (auto& v : var) {
        v = std::sqrt(v);
    }
    return var;
}

double bond_current(std::span<const Complex> alphas, const Edge& edge) noexcept {
    return edge.g * (std::conj(alphas[edge.i]) * alphas[edge.j]).imag();
}

double bond_current(const AmplitudeState& state, const Edge& edge) {
    if (edge.i >= state.alphas.size() || edge.j >= state.alphas.size()) {
        throw std::out_of_range("bond_current: edge outside state");
    }
    return bond_current(std::span<const Complex>(state.alphas), edge);
}

// ---------------------------------------------------------------------------
// Kernel

Kernel::Kernel(const NetworkSpec& spec)
    : n_(spec.n_sites()), edges_(spec.edges()), gamma_(spec.bath().gamma),
      d_th_(spec.bath().diffusion()) {
    diag_.resize(n_);
    for (Index l = 0; l < n_; ++l) {
        diag_[l] = Complex(-0.5 * gamma_, -spec.detunings()[l]);
    }
    std::vector<std::vector<std::pair<Index, double>>> adj(n_);
    for (const auto& e : spec.edges()) {
        adj[e.i].emplace_back(e.j, 0.5 * e.g);
        adj[e.j].emplace_back(e.i, 0.5 * e.g);
    }
    adj_ptr_.assign(n_ + 1, 0);
    for (Index l = 0; l < n_; ++l) {
        std::sort(adj[l].begin(), adj[l].end());
        adj_ptr_[l + 1] = adj_ptr_[l] + adj[l].size();
        for (const auto& [m, hg] : adj[l]) {
            adj_idx_.push_back(m);
            adj_half_g_.push_back(hg);
        }
    }
    for (const auto& t : spec.terminals()) {
        terminals_.push_back({t.site, t.kind, t.rate, t.law});
    }
    for (Index l = 0; l < n_; ++l) {
        bool noisy = d_th_ > 0.0;
        for (const auto& t : terminals_) {
            noisy = noisy || (t.site == l && t.kind == TerminalKind::gain && t.rate > 0.0);
        }
        if (noisy) {
            noisy_.push_back(l);
        }
    }
}

double Kernel::max_rate() const noexcept {
    double r = gamma_;
    for (const auto& t : terminals_) {
        r = std::max(r, t.rate);
    }
    for (Index k = 0; k < adj_half_g_.size(); ++k) {
        r = std::max(r, 2.0 * adj_half_g_[k]);
    }
    return r;
}

void Kernel::drift(const Complex* a, Complex* out) const noexcept {
    for (Index l = 0; l < n_; ++l) {
        Complex c(0.0, 0.0);
        for (Index k = adj_ptr_[l]; k < adj_ptr_[l + 1]; ++k) {
            c += adj_half_g_[k] * a[adj_idx_[k]];
        }
        out[l] = diag_[l] * a[l] + Complex(-c.imag(), c.real());
    }
    for (const auto& t : terminals_) {
        const double r = t.rate * saturation_f2_unchecked(std::norm(a[t.site]), t.law);
        out[t.site] += (t.kind == TerminalKind::gain ? 0.5 : -0.5) * r * a[t.site];
    }
}

void Kernel::diffusion(const Complex* a, double* sigma) const noexcept {
    const double s_th = std::sqrt(d_th_);
    for (Index l = 0; l < n_; ++l) {
        sigma[l] = s_th;
    }
    // One gain terminal per site at most.
    for (const auto& t : terminals_) {
        if (t.kind == TerminalKind::gain) {
            sigma[t.site] = std::sqrt(
                d_th_ + t.rate * saturation_f2_unchecked(std::norm(a[t.site]), t.law));
        }
    }
}

void Kernel::em_step(Complex* a, double dt, Rng& rng,
                     boost::random::normal_distribution<double>& normal,
                     std::vector<Complex>& f, std::vector<double>& sigma) const {
    drift(a, f.data());
    diffusion(a, sigma.data());
    for (Index l = 0; l < n_; ++l) {
        a[l] += f[l] * dt;
    }
    const double w = std::sqrt(0.5 * dt);
    for (Index l : noisy_) {
        const double n1 = normal(rng);
        const double n2 = normal(rng);
        a[l] += (sigma[l] * w) * Complex(n1, n2);
    }
}

namespace {

bool exceeds_guard(const Complex* a, Index n, double limit) noexcept {
    for (Index l = 0; l < n; ++l) {
        const double x = std::norm(a[l]);
        if (!(x <= limit)) {
            return true;  // also catches NaN
        }
    }
    return false;
}

}  // namespace

StepResult em_step(const AmplitudeState& state, const NetworkSpec& spec,
                   const IntegratorConfig& config, Rng& rng) {
    check_state(state, spec);
    config.validate();
    const Kernel kernel(spec);
    boost::random::normal_distribution<double> normal;
    std::vector<Complex> f(kernel.size());
    std::vector<double> sigma(kernel.size());
    StepResult out{state, false};
    kernel.em_step(out.state.alphas.data(), config.dt, rng, normal, f, sigma);
    out.state.time += config.dt;
    out.diverged = exceeds_guard(out.state.alphas.data(), kernel.size(),
                                 config.divergence_guard * spec.reference_n0());
    return out;
}

// ---------------------------------------------------------------------------
// Ensemble

namespace {

struct TrajectoryResult {
    bool diverged{false};
    std::vector<RunningStats> current;
    std::vector<RunningStats> occupation;
    RunningStats damping;
    RunningStats injected;
    RunningStats extracted;
    RunningStats bath;
    std::vector<std::vector<std::uint64_t>> hist;
    std::vector<std::uint64_t> overflow;
};

constexpr Index kGuardInterval = 256;

TrajectoryResult simulate_trajectory(const Kernel& kernel, const IntegratorConfig& integ,
                                     const EnsembleConfig& ens, double n0_scale, Rng rng) {
    const Index n = kernel.size();
    const auto& edges = kernel.edges();
    TrajectoryResult res;
    res.current.resize(edges.size());
    res.occupation.resize(n);
    const Index bins = ens.histogram.bins;
    if (bins > 0) {
        res.hist.assign(n, std::vector<std::uint64_t>(bins * bins, 0));
        res.overflow.assign(n, 0);
    }

    std::vector<Complex> a(n, Complex(0.0, 0.0));
    if (ens.initial) {
        a = ens.initial->alphas;
    }
    std::vector<Complex> f(n);
    std::vector<double> sigma(n);
    boost::random::normal_distribution<double> normal;
    const double limit = integ.divergence_guard * n0_scale;

    auto advance = [&](std::size_t steps) {
        for (std::size_t s = 0; s < steps; ++s) {
            kernel.em_step(a.data(), integ.dt, rng, normal, f, sigma);
            if ((s + 1) % kGuardInterval == 0 && exceeds_guard(a.data(), n, limit)) {
                return false;
            }
        }
        return !exceeds_guard(a.data(), n, limit);
    };

    const auto burn_steps = static_cast<std::size_t>(std::llround(ens.burn_in_time / integ.dt));
    if (!advance(burn_steps)) {
        res.diverged = true;
        return res;
    }

    const double inv_sqrt_n0 = 1.0 / std::sqrt(n0_scale);
    const double half_width = ens.histogram.range;
    const double bin_scale = bins > 0 ? static_cast<double>(bins) / (2.0 * half_width) : 0.0;
    auto bin_of = [&](double x) -> long {
        const double b = std::floor((x + half_width) * bin_scale);
        if (!(b >= 0.0) || b >= static_cast<double>(bins)) {
            return -1;
        }
        return static_cast<long>(b);
    };

    for (Index sample = 0; sample < ens.n_samples; ++sample) {
        if (!advance(ens.sample_stride_steps)) {
            res.diverged = true;
            return res;
        }
        for (Index k = 0; k < edges.size(); ++k) {
            res.current[k].add(bond_current(std::span<const Complex>(a), edges[k]));
        }
        double occ_sum = 0.0;
        for (Index l = 0; l < n; ++l) {
            const double x = std::norm(a[l]);
            occ_sum += x;
            res.occupation[l].add(x);
        }
        double damping = 0.0, injected = 0.0, extracted = 0.0;
        for (const auto& t : kernel.terminals()) {
            const double x = std::norm(a[t.site]);
            const double r = t.rate * saturation_f2_unchecked(x, t.law);
            if (t.kind == TerminalKind::gain) {
                damping -= r;
                injected += r * x;
            } else {
                damping += r;
                extracted += r * x;
            }
        }
        res.damping.add(damping);
        res.injected.add(injected);
        res.extracted.add(extracted);
        res.bath.add(kernel.gamma() * occ_sum);
        if (bins > 0) {
            for (Index l = 0; l < n; ++l) {
                const long br = bin_of(a[l].real() * inv_sqrt_n0);
                const long bi = bin_of(a[l].imag() * inv_sqrt_n0);
                if (br < 0 || bi < 0) {
                    ++res.overflow[l];
                } else {
                    ++res.hist[l][static_cast<Index>(br) * bins + static_cast<Index>(bi)];
                }
            }
        }
    }
    return res;
}

std::vector<Rng> trajectory_streams(std::uint64_t seed, Index n_traj) {
    std::vector<Rng> streams;
    streams.reserve(n_traj);
    Rng base(seed);
    for (Index k = 0; k < n_traj; ++k) {
        streams.push_back(base);
        base.jump();
    }
    return streams;
}

ObservableRecord reduce(const NetworkSpec& spec, const Kernel& kernel,
                        const IntegratorConfig& integ, const EnsembleConfig& ens,
                        double n0_scale, std::vector<TrajectoryResult>& results) {
    ObservableRecord rec;
    rec.edges = spec.edges();
    rec.headline_edge = spec.headline_edge();
    rec.n_traj_requested = ens.n_traj;
    rec.n0_scale = n0_scale;
    rec.histogram = ens.histogram;
    rec.dt = integ.dt;

    const Index n = spec.n_sites();
    const Index bins = ens.histogram.bins;
    std::vector<RunningStats> current(rec.edges.size()), occupation(n);
    RunningStats damping, injected, extracted, bath;
    if (bins > 0) {
        rec.histograms.assign(n, std::vector<std::uint64_t>(bins * bins, 0));
        rec.histogram_overflow.assign(n, 0);
    }
    for (Index k = 0; k < results.size(); ++k) {
        auto& r = results[k];
        if (r.diverged) {
            rec.diverged_trajectories.push_back(k);
            continue;
        }
        ++rec.n_traj_completed;
        for (Index e = 0; e < current.size(); ++e) {
            current[e].merge(r.current[e]);
        }
        for (Index l = 0; l < n; ++l) {
            occupation[l].merge(r.occupation[l]);
        }
        damping.merge(r.damping);
        injected.merge(r.injected);
        extracted.merge(r.extracted);
        bath.merge(r.bath);
        if (bins > 0) {
            for (Index l = 0; l < n; ++l) {
                for (Index b = 0; b < bins * bins; ++b) {
                    rec.histograms[l][b] += r.hist[l][b];
                }
                rec.histogram_overflow[l] += r.overflow[l];
            }
        }
    }
    for (const auto& s : current) {
        rec.mean_current.push_back(s.mean);
        rec.current_std.push_back(s.stddev());
    }
    for (const auto& s : occupation) {
        rec.occupations.push_back(s.mean);
        rec.occupation_std.push_back(s.stddev());
    }
    rec.mean_damping_rate = damping.mean;
    rec.damping_rate_std = damping.stddev();
    rec.injected_power = injected.mean;
    rec.extracted_power = extracted.mean;
    rec.bath_power = bath.mean;
    rec.sample_count = damping.n;
    rec.complete = rec.diverged_trajectories.empty();

    double gain_rate = 0.0;
    for (const auto& t : spec.terminals()) {
        if (t.kind == TerminalKind::gain) {
            gain_rate += t.rate;
        }
    }
    rec.quantum_dominance = spec.bath().gamma > 0.0
                                ? gain_rate / spec.bath().gamma
                                : std::numeric_limits<double>::infinity();

    const double dt_rate = integ.dt * kernel.max_rate();
    if (dt_rate > 0.05) {
        std::ostringstream os;
        os << "dt * max rate = " << dt_rate << " exceeds 0.05";
        rec.warnings.push_back(os.str());
    }
    if (!rec.complete) {
        std::ostringstream os;
        os << rec.diverged_trajectories.size() << " of " << ens.n_traj
           << " trajectories diverged and were dropped";
        rec.warnings.push_back(os.str());
    }
    return rec;
}

void validate_inputs(const NetworkSpec& spec, const IntegratorConfig& integ,
                     const EnsembleConfig& ens) {
    integ.validate();
    ens.validate();
    if (ens.initial) {
        check_state(*ens.initial, spec);
    }
}

}  // namespace

ObservableRecord run_ensemble(const NetworkSpec& spec, const IntegratorConfig& integ,
                              const EnsembleConfig& ens) {
    validate_inputs(spec, integ, ens);
    const Kernel kernel(spec);
    const double n0 = spec.reference_n0();
    const auto streams = trajectory_streams(integ.seed, ens.n_traj);
    std::vector<TrajectoryResult> results(ens.n_traj);
    const auto n_traj = static_cast<long>(ens.n_traj);
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n_traj; ++k) {
        results[static_cast<Index>(k)] =
            simulate_trajectory(kernel, integ, ens, n0, streams[static_cast<Index>(k)]);
    }
    return reduce(spec, kernel, integ, ens, n0, results);
}

ObservableRecord run_ensemble_serial(const NetworkSpec& spec, const IntegratorConfig& integ,
                                     const EnsembleConfig& ens) {
    validate_inputs(spec, integ, ens);
    const Kernel kernel(spec);
    const double n0 = spec.reference_n0();
    Rng stream(integ.seed);
    std::vector<TrajectoryResult> results;
    results.reserve(ens.n_traj);
    for (Index k = 0; k < ens.n_traj; ++k) {
        results.push_back(simulate_trajectory(kernel, integ, ens, n0, stream));
        stream.jump();
    }
    return reduce(spec, kernel, integ, ens, n0, results);
}

// ---------------------------------------------------------------------------

double Histogram2D::bin_center(Index b) const {
    const double width = 2.0 * range / static_cast<double>(bins);
    return -range + (static_cast<double>(b) + 0.5) * width;
}

double Histogram2D::l1_distance(const Histogram2D& other) const {
    if (other.bins != bins || other.range != range) {
        throw std::invalid_argument("Histogram2D: bin layouts differ");
    }
    double d = std::abs(overflow_fraction - other.overflow_fraction);
    for (Index b = 0; b < probability.size(); ++b) {
        d += std::abs(probability[b] - other.probability[b]);
    }
    return d;
}

Histogram2D marginal_histogram(const ObservableRecord& record, Index site) {
    if (record.histogram.bins == 0 || record.histograms.empty()) {
        throw std::invalid_argument("marginal_histogram: record has no histograms");
    }
    if (site >= record.histograms.size()) {
        throw std::out_of_range("marginal_histogram: site out of range");
    }
    Histogram2D h;
    h.bins = record.histogram.bins;
    h.range = record.histogram.range;
    const auto& counts = record.histograms[site];
    std::uint64_t total = record.histogram_overflow[site];
    for (auto c : counts) {
        total += c;
    }
    h.probability.assign(counts.size(), 0.0);
    if (total > 0) {
        const double inv = 1.0 / static_cast<double>(total);
        for (Index b = 0; b < counts.size(); ++b) {
            h.probability[b] = static_cast<double>(counts[b]) * inv;
        }
        h.overflow_fraction = static_cast<double>(record.histogram_overflow[site]) * inv;
    }
    return h;
}

}  // namespace activegrid::sde
