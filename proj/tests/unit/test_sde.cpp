#include "activegrid/probe.hpp"
#include "activegrid/sde.hpp"
#include "activegrid/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace activegrid;

namespace {

sde::AmplitudeState state_of(std::vector<Complex> a) { return {std::move(a), 0.0}; }

// Hand-written right-hand side for a chain, used as an oracle for the kernel.
std::vector<Complex> chain_drift_oracle(const std::vector<Complex>& a, double g, double gamma,
                                        double gi, double ge, const SaturationLaw& law,
                                        const std::vector<double>& delta) {
    const std::size_t n = a.size();
    std::vector<Complex> f(n);
    const Complex I(0.0, 1.0);
    for (std::size_t l = 0; l < n; ++l) {
        f[l] = -(gamma / 2 + I * delta[l]) * a[l];
        if (l > 0) f[l] += I * (g / 2) * a[l - 1];
        if (l + 1 < n) f[l] += I * (g / 2) * a[l + 1];
    }
    const double x0 = std::norm(a[0]), xn = std::norm(a[n - 1]);
    f[0] += gi / std::pow(1 + x0 / law.n0, law.nu) * a[0] / 2.0;
    f[n - 1] -= ge / std::pow(1 + xn / law.n0, law.nu) * a[n - 1] / 2.0;
    return f;
}

std::vector<Complex> random_state(std::mt19937_64& gen, std::size_t n, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<Complex> a(n);
    for (auto& z : a) z = {nd(gen), nd(gen)};
    return a;
}

}  // namespace

TEST_SUITE("sde") {

TEST_CASE("drift: hand-evaluated values") {
    const double n0 = 2.0;
    const auto spec = build_chain(2, 1.0, {}, {4.0, {n0, 2.0}}, {3.0, {n0, 2.0}});
    const auto f = sde::drift(state_of({std::sqrt(n0), 0.0}), spec);
    CHECK(f[0].real() == doctest::Approx(0.5 * std::sqrt(n0)));
    CHECK(f[0].imag() == doctest::Approx(0.0));
    CHECK(f[1].real() == doctest::Approx(0.0));
    CHECK(f[1].imag() == doctest::Approx(0.5 * std::sqrt(n0)));

    const auto zero = sde::drift(state_of(std::vector<Complex>(2)), spec);
    CHECK(zero[0] == Complex(0.0, 0.0));
    CHECK(zero[1] == Complex(0.0, 0.0));

    const auto passive = build_passive_chain(3, 1.0, {});
    const auto c = sde::drift(state_of({{0.7, 0.2}, {0.0, 0.0}, {-0.7, -0.2}}), passive);
    CHECK(std::abs(c[1]) < 1e-15);
}

TEST_CASE("drift: kernel matches the oracle and the reference") {
    std::mt19937_64 gen(11);
    const SaturationLaw law{3.0, 1.5};
    const std::vector<double> delta{0.1, -0.3, 0.0, 0.25, 0.05, -0.1};
    const auto spec = build_chain(6, 0.8, {2e-3, 4.0}, {4.5, law}, {2.5, law}).with_detunings(delta);
    const sde::Kernel kernel(spec);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_state(gen, 6, 1.5);
        const auto want = chain_drift_oracle(a, 0.8, 2e-3, 4.5, 2.5, law, delta);
        const auto ref = sde::drift(state_of(a), spec);
        std::vector<Complex> fast(6);
        kernel.drift(a.data(), fast.data());
        for (std::size_t l = 0; l < 6; ++l) {
            CHECK(std::abs(ref[l] - want[l]) < 1e-13);
            CHECK(std::abs(fast[l] - want[l]) < 1e-13);
        }
    }

    const auto grid = build_branched_grid(1.0, {1e-3, 0.0}, {4.0, {}}, {2.0, {}}, {4.0, {}})
                          .with_detunings({0.0, 0.1, 0.0, -0.2, 0.0, 0.0, 0.3, 0.0, 0.0});
    const sde::Kernel gk(grid);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_state(gen, 9, 1.0);
        const auto ref = sde::drift(state_of(a), grid);
        std::vector<Complex> fast(9);
        gk.drift(a.data(), fast.data());
        for (std::size_t l = 0; l < 9; ++l) {
            CHECK(std::abs(ref[l] - fast[l]) < 1e-13);
        }
    }
}

TEST_CASE("noise amplitudes") {
    const auto quiet = build_chain(3, 1.0, {}, {4.0, {}}, {3.0, {}});
    const auto s0 = sde::noise_amplitudes(state_of(std::vector<Complex>(3)), quiet);
    CHECK(s0[0] == doctest::Approx(2.0));
    CHECK(s0[1] == 0.0);
    CHECK(s0[2] == 0.0);

    const auto warm = build_chain(3, 1.0, {1e-3, 10.0}, {4.0, {}}, {3.0, {}});
    const auto s1 = sde::noise_amplitudes(state_of({{1.0, 0.0}, {0.5, 0.5}, {2.0, 0.0}}), warm);
    CHECK(s1[1] == doctest::Approx(0.1));
    CHECK(s1[2] == doctest::Approx(0.1));
    CHECK(s1[0] == doctest::Approx(std::sqrt(1e-2 + 4.0 / 4.0)));

    const sde::Kernel kernel(warm);
    std::vector<Complex> a{{1.0, 0.0}, {0.5, 0.5}, {2.0, 0.0}};
    std::vector<double> sigma(3);
    kernel.diffusion(a.data(), sigma.data());
    for (int l = 0; l < 3; ++l) {
        CHECK(sigma[l] == doctest::Approx(s1[l]));
    }
}

TEST_CASE("bond current") {
    const Edge e{0, 1, 1.0};
    CHECK(sde::bond_current(state_of({{1.0, 0.0}, {2.0, 0.0}}), e) == 0.0);
    const double n0 = 3.0;
    std::vector<Complex> wave;
    for (int l = 0; l < 5; ++l) {
        wave.push_back(std::polar(std::sqrt(n0), std::numbers::pi * l / 2));
    }
    for (int l = 0; l < 4; ++l) {
        const Edge fwd{static_cast<Index>(l), static_cast<Index>(l + 1), 1.0};
        const Edge back{static_cast<Index>(l + 1), static_cast<Index>(l), 1.0};
        CHECK(sde::bond_current(state_of(wave), fwd) == doctest::Approx(n0));
        CHECK(sde::bond_current(state_of(wave), back) == doctest::Approx(-n0));
    }
    CHECK(sde::bond_current(state_of(wave), Edge{0, 1, 0.5}) == doctest::Approx(0.5 * n0));
}

TEST_CASE("em_step: explicit Euler without noise") {
    const double gamma = 0.2, dt = 1e-3;
    const auto spec = build_passive_chain(2, 1e-300, {gamma, 0.0});
    Rng rng(1);
    const auto out = sde::em_step(state_of({{0.6, -0.8}, {0.0, 0.0}}), spec, {dt}, rng);
    CHECK(out.state.time == doctest::Approx(dt));
    CHECK(out.state.alphas[0].real() == doctest::Approx(0.6 * (1 - gamma * dt / 2)).epsilon(1e-14));
    CHECK(out.state.alphas[0].imag() == doctest::Approx(-0.8 * (1 - gamma * dt / 2)).epsilon(1e-14));
    CHECK_FALSE(out.diverged);
}

TEST_CASE("em_step: increment variance is gamma N_th dt") {
    const double gamma = 0.5, n_th = 3.0, dt = 1e-2;
    const auto spec = build_passive_chain(2, 1e-300, {gamma, n_th});
    const sde::Kernel kernel(spec);
    Rng rng(99);
    boost::random::normal_distribution<double> normal;
    std::vector<Complex> f(2);
    std::vector<double> sigma(2);
    RunningStats re, im, sq;
    for (int k = 0; k < 200000; ++k) {
        std::vector<Complex> a(2);
        kernel.em_step(a.data(), dt, rng, normal, f, sigma);
        sq.add(std::norm(a[0]));
        re.add(a[0].real());
        im.add(a[0].imag());
    }
    CHECK(sq.mean == doctest::Approx(gamma * n_th * dt).epsilon(0.01));
    CHECK(re.stddev() == doctest::Approx(std::sqrt(gamma * n_th * dt / 2)).epsilon(0.01));
    CHECK(im.stddev() == doctest::Approx(std::sqrt(gamma * n_th * dt / 2)).epsilon(0.01));
}

TEST_CASE("em_step: determinism and divergence flag") {
    const auto spec = build_chain(3, 1.0, {1e-2, 1.0}, {4.0, {}}, {2.0, {}});
    const auto start = state_of({{0.1, 0.0}, {0.0, 0.2}, {0.0, 0.0}});
    Rng r1(5), r2(5);
    auto a = sde::em_step(start, spec, {1e-3}, r1);
    auto b = sde::em_step(start, spec, {1e-3}, r2);
    a = sde::em_step(a.state, spec, {1e-3}, r1);
    b = sde::em_step(b.state, spec, {1e-3}, r2);
    CHECK(a.state.alphas == b.state.alphas);

    sde::IntegratorConfig tight{1e-3};
    tight.divergence_guard = 1e-6;
    Rng r3(5);
    CHECK(sde::em_step(state_of({{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}), spec, tight, r3).diverged);
    CHECK_THROWS_AS((void)sde::em_step(state_of({{1.0, 0.0}}), spec, {1e-3}, r3),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)sde::em_step(start, spec, {-1.0}, r3), std::invalid_argument);
}

TEST_CASE("ensemble: thermal calibration of a passive chain") {
    const double gamma = 1.0, n_th = 5.0;
    const auto spec = build_passive_chain(3, 1.0, {gamma, n_th});
    sde::IntegratorConfig integ{1e-3};
    integ.seed = 17;
    sde::EnsembleConfig ens;
    ens.n_traj = 4;
    ens.burn_in_time = 10.0;
    ens.n_samples = 6000;
    ens.sample_stride_steps = 500;
    ens.histogram = {61, 12.0};
    const auto rec = sde::run_ensemble(spec, integ, ens);
    CHECK(rec.complete);
    CHECK(rec.sample_count == 4 * 6000);
    for (double occ : rec.occupations) {
        CHECK(occ == doctest::Approx(n_th).epsilon(0.05));
    }
    for (double dj : rec.current_std) {
        CHECK(dj == doctest::Approx(n_th / std::sqrt(2.0)).epsilon(0.05));
    }
    CHECK(rec.quantum_dominance == 0.0);

    // Thermal P-function: isotropic Gaussian with variance N_th/2 per quadrature.
    const auto h = sde::marginal_histogram(rec, 1);
    double sum = 0.0, m_re = 0.0, v_re = 0.0, v_im = 0.0;
    for (Index i = 0; i < h.bins; ++i) {
        for (Index j = 0; j < h.bins; ++j) {
            const double p = h.at(i, j);
            sum += p;
            m_re += p * h.bin_center(i);
            v_re += p * h.bin_center(i) * h.bin_center(i);
            v_im += p * h.bin_center(j) * h.bin_center(j);
        }
    }
    CHECK(sum + h.overflow_fraction == doctest::Approx(1.0));
    CHECK(std::abs(m_re) < 0.1);
    CHECK(v_re == doctest::Approx(n_th / 2).epsilon(0.07));
    CHECK(v_im == doctest::Approx(n_th / 2).epsilon(0.07));
}

TEST_CASE("ensemble: parallel and serial drivers agree bit for bit") {
    const auto spec = build_chain(4, 1.0, {1e-2, 2.0}, {3.0, {5.0, 2.0}}, {2.0, {5.0, 2.0}});
    sde::IntegratorConfig integ{1e-3};
    integ.seed = 2024;
    sde::EnsembleConfig ens;
    ens.n_traj = 5;
    ens.burn_in_time = 5.0;
    ens.n_samples = 200;
    ens.sample_stride_steps = 20;
    ens.histogram = {11, 6.0};
    const auto a = sde::run_ensemble(spec, integ, ens);
    const auto b = sde::run_ensemble_serial(spec, integ, ens);
    const auto c = sde::run_ensemble(spec, integ, ens);
    CHECK(a.mean_current == b.mean_current);
    CHECK(a.current_std == b.current_std);
    CHECK(a.occupations == b.occupations);
    CHECK(a.mean_damping_rate == b.mean_damping_rate);
    CHECK(a.histograms == b.histograms);
    CHECK(a.occupations == c.occupations);
    CHECK(a.sample_count == 1000);
    CHECK(a.n_traj_completed == 5);

    integ.seed = 2025;
    const auto d = sde::run_ensemble(spec, integ, ens);
    CHECK(d.occupations != a.occupations);
}

TEST_CASE("ensemble: record invariants and divergence reporting") {
    const auto spec = build_chain(3, 1.0, {1e-2, 0.0}, {4.0, {}}, {2.0, {}});
    sde::IntegratorConfig integ{1e-3};
    sde::EnsembleConfig ens;
    ens.n_traj = 3;
    ens.burn_in_time = 1.0;
    ens.n_samples = 50;
    ens.sample_stride_steps = 10;
    ens.histogram.bins = 0;
    const auto ok = sde::run_ensemble(spec, integ, ens);
    for (double s : ok.current_std) CHECK(s >= 0.0);
    for (double o : ok.occupations) CHECK(o >= 0.0);
    CHECK(ok.quantum_dominance == doctest::Approx(400.0));
    CHECK_THROWS((void)sde::marginal_histogram(ok, 0));

    integ.divergence_guard = 1e-9;
    const auto bad = sde::run_ensemble(spec, integ, ens);
    CHECK_FALSE(bad.complete);
    CHECK(bad.diverged_trajectories.size() == 3);
    CHECK(bad.n_traj_completed == 0);
    CHECK_FALSE(bad.warnings.empty());

    sde::IntegratorConfig coarse{0.05};
    const auto warned = sde::run_ensemble(spec, coarse, ens);
    CHECK_FALSE(warned.warnings.empty());
}

TEST_CASE("histogram: noiseless stationary state fills one bin") {
    // Detuning cancels the hopping frequency of the symmetric mode, so
    // (c, c) is a fixed point with no noise anywhere.
    const auto spec = build_passive_chain(2, 1.0, {}).with_detunings({0.5, 0.5});
    sde::AmplitudeState init{{Complex(0.5, 0.5), Complex(0.5, 0.5)}, 0.0};
    sde::EnsembleConfig ens;
    ens.n_traj = 1;
    ens.burn_in_time = 1.0;
    ens.n_samples = 100;
    ens.sample_stride_steps = 10;
    ens.histogram = {8, 2.0};
    ens.initial = init;
    const auto rec = sde::run_ensemble(spec, {1e-3}, ens);
    const auto h = sde::marginal_histogram(rec, 0);
    int filled = 0;
    for (Index i = 0; i < h.bins; ++i) {
        for (Index j = 0; j < h.bins; ++j) {
            if (h.at(i, j) > 0) {
                ++filled;
                CHECK(h.at(i, j) == doctest::Approx(1.0));
                CHECK(std::abs(h.bin_center(i) - 0.5) <= 0.25);
                CHECK(std::abs(h.bin_center(j) - 0.5) <= 0.25);
            }
        }
    }
    CHECK(filled == 1);
    CHECK(rec.occupations[0] == doctest::Approx(0.5));
}

TEST_CASE("ensemble: uniform current and power balance in the saturated chain") {
    const double n0 = 1e4, gamma = 1e-3;
    const auto spec = build_chain(10, 1.0, {gamma, 0.0}, {4.0, {n0, 2.0}}, {4.0, {n0, 2.0}});
    probe::SteadyStateConfig steady;
    steady.dt = 1e-2;
    steady.tol = 1e-9;
    const auto warm = probe::deterministic_steady_state(spec, steady);
    sde::IntegratorConfig integ{1e-4};
    integ.seed = 3;
    sde::EnsembleConfig ens;
    ens.n_traj = 1;
    ens.burn_in_time = 100.0;
    ens.n_samples = 600;
    ens.sample_stride_steps = 1000;
    ens.histogram.bins = 0;
    ens.initial = warm.state;
    ens.initial->time = 0.0;
    const auto rec = sde::run_ensemble(spec, integ, ens);
    REQUIRE(rec.complete);
    const double mid = rec.mean_current[rec.headline_edge];
    for (double j : rec.mean_current) {
        CHECK(j == doctest::Approx(mid).epsilon(0.02));
    }
    CHECK(rec.injected_power ==
          doctest::Approx(rec.extracted_power + rec.bath_power).epsilon(0.02));
}

}
