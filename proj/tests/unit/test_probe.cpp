#include "activegrid/probe.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace activegrid;
using doctest::Approx;

namespace {

// Two-site broken state at gamma = 0. The loss-site balance gives
// alpha_2 = i alpha_1 / Ge(x2), the gain-site balance Gi(x1) Ge(x2) = 1.
// Bisect on x2 with x1 = x2 Ge(x2)^2.
struct TwoSite {
    double x1, x2;
};

TwoSite two_site_exact(double gi, double ge) {
    auto rate = [](double r, double x) { return r / ((1 + x) * (1 + x)); };
    auto residual = [&](double x2) {
        const double gx2 = rate(ge, x2);
        const double x1 = x2 * gx2 * gx2;
        return rate(gi, x1) * gx2 - 1.0;
    };
    double lo = 1e-12, hi = 1.0;
    while (residual(hi) > 0) hi *= 2;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) > 0 ? lo : hi) = mid;
    }
    const double x2 = 0.5 * (lo + hi);
    const double gx2 = rate(ge, x2);
    return {x2 * gx2 * gx2, x2};
}

probe::SteadyStateConfig fast_steady() {
    probe::SteadyStateConfig c;
    c.dt = 1e-2;
    c.tol = 1e-9;
    c.max_time = 4e4;
    return c;
}

}  // namespace

TEST_SUITE("probe") {

TEST_CASE("rk4: fourth-order accuracy on a damped rotating mode") {
    const double gamma = 0.4, delta = 0.3;
    const auto spec = build_passive_chain(2, 1e-300, {gamma, 0.0}).with_detunings({delta, 0.0});
    probe::Rk4 rk(spec);
    auto error_at = [&](double dt) {
        std::vector<Complex> a{{1.0, 0.0}, {0.0, 0.0}};
        const int steps = static_cast<int>(std::lround(2.0 / dt));
        for (int s = 0; s < steps; ++s) rk.step(a, dt);
        const Complex exact = std::exp(Complex(-gamma / 2, -delta) * 2.0);
        return std::abs(a[0] - exact);
    };
    const double e1 = error_at(0.1), e2 = error_at(0.05);
    CHECK(e1 < 1e-6);
    CHECK(e1 / e2 == Approx(16.0).epsilon(0.1));
}

TEST_CASE("steady state: exact two-site broken state") {
    const auto spec = build_chain(2, 1.0, {}, {4.0, {}}, {8.0, {}});
    auto cfg = fast_steady();
    cfg.dt = 1e-3;
    cfg.tol = 1e-11;
    const auto ss = probe::deterministic_steady_state(spec, cfg);
    const auto want = two_site_exact(4.0, 8.0);
    CHECK(ss.converged());
    CHECK(ss.occupations[0] == Approx(want.x1).epsilon(1e-6));
    CHECK(ss.occupations[1] == Approx(want.x2).epsilon(1e-6));
    CHECK(want.x1 == Approx(4.1748).epsilon(1e-4));
    CHECK(ss.omega == Approx(0.0).scale(1.0));
    // Current delivered into the loss site balances its extraction.
    const double ge = 8.0 / std::pow(1 + want.x2, 2);
    CHECK(ss.currents[0] == Approx(ge * want.x2).epsilon(1e-6));

    // The deep-broken closed form is within its approximation budget of the exact state.
    CHECK(std::abs(want.x1 - (std::sqrt(32.0) - 1)) / want.x1 < 0.12);
}

TEST_CASE("steady state: scale invariance in n0") {
    const auto a = probe::deterministic_steady_state(build_chain(2, 1.0, {}, {4.0, {}}, {8.0, {}}),
                                                     fast_steady());
    const auto b = probe::deterministic_steady_state(
        build_chain(2, 1.0, {}, {4.0, {250.0, 2.0}}, {8.0, {250.0, 2.0}}), fast_steady());
    CHECK(b.occupations[0] == Approx(250.0 * a.occupations[0]).epsilon(1e-6));
    CHECK(b.currents[0] == Approx(250.0 * a.currents[0]).epsilon(1e-6));
}

TEST_CASE("steady state: rotating symmetric standing wave") {
    const auto spec = build_chain(10, 1.0, {1e-3, 0.0}, {4.2, {}}, {4.0, {}});
    auto cfg = fast_steady();
    cfg.ramp = probe::RampOrder::gain_first;
    cfg.ramp_time = 2000.0;
    const auto ss = probe::deterministic_steady_state(spec, cfg);
    REQUIRE(ss.converged());
    CHECK(ss.occupations[0] / ss.occupations[9] == Approx(1.0).epsilon(0.01));
    CHECK(std::abs(ss.omega) == Approx(std::sin(std::numbers::pi / 22)).epsilon(0.02));
    CHECK(probe::corotating_residual(spec, ss.state, ss.omega) < 1e-6);
    CHECK(probe::corotating_residual(spec, ss.state, 0.0) > 1e-2);
}

TEST_CASE("steady state: passive network decays to the vacuum") {
    const auto spec = build_passive_chain(4, 1.0, {0.1, 0.0});
    const auto ss = probe::deterministic_steady_state(spec, fast_steady());
    for (double x : ss.occupations) CHECK(x < 1e-12);
}

TEST_CASE("steady state: input validation") {
    const auto spec = build_chain(3, 1.0, {}, {1.0, {}}, {1.0, {}});
    probe::SteadyStateConfig bad;
    bad.dt = 0.0;
    CHECK_THROWS_AS((void)probe::deterministic_steady_state(spec, bad), std::invalid_argument);
    probe::SteadyStateConfig wrong;
    wrong.initial = sde::AmplitudeState{{Complex(1.0, 0.0)}, 0.0};
    CHECK_THROWS_AS((void)probe::deterministic_steady_state(spec, wrong), std::invalid_argument);
}

TEST_CASE("fixed-point refinement") {
    const auto spec = build_chain(2, 1.0, {}, {4.0, {}}, {8.0, {}});
    const auto want = two_site_exact(4.0, 8.0);
    sde::AmplitudeState guess{{Complex(2.1, 0.1), Complex(0.05, 0.3)}, 0.0};
    const auto fp = probe::refine_fixed_point(spec, guess, 0.01);
    REQUIRE(fp.ok);
    CHECK(std::norm(fp.state.alphas[0]) == Approx(want.x1).epsilon(1e-8));
    CHECK(std::norm(fp.state.alphas[1]) == Approx(want.x2).epsilon(1e-8));
    CHECK(fp.omega == Approx(0.0).scale(1.0));
    CHECK(fp.residual < 1e-10);
    CHECK(fp.stable);
    CHECK(fp.slowest_rate > 0.0);
}

TEST_CASE("relaxation time matches the slowest linearized rate") {
    const auto spec = build_chain(4, 1.0, {1e-3, 0.0}, {4.0, {}}, {2.0, {}});
    auto cfg = fast_steady();
    cfg.ramp = probe::RampOrder::gain_first;
    cfg.ramp_time = 1000.0;
    const auto ss = probe::deterministic_steady_state(spec, cfg);
    REQUIRE(ss.converged());
    const auto fp = probe::refine_fixed_point(spec, ss.state, ss.omega);
    REQUIRE(fp.ok);
    const auto rep = probe::relaxation_time(spec, ss.state);
    REQUIRE(rep.converged);
    CHECK(rep.tau_r > 0.0);
    CHECK(rep.t_lower > rep.t_upper);
    CHECK(rep.tau_r == Approx(1.0 / fp.slowest_rate).epsilon(0.1));
}

TEST_CASE("relaxation config validation") {
    const auto spec = build_chain(2, 1.0, {1e-3, 0.0}, {4.0, {}}, {2.0, {}});
    probe::RelaxationConfig bad;
    bad.upper = 1e-9;
    bad.lower = 1e-8;
    sde::AmplitudeState s{{Complex(1.0, 0.0), Complex(0.0, 1.0)}, 0.0};
    CHECK_THROWS_AS((void)probe::relaxation_time(spec, s, bad), std::invalid_argument);
}

TEST_CASE("power-law fit") {
    std::vector<probe::ScalingSample> samples;
    for (int k = 0; k < 12; ++k) {
        const double d = 0.02 * std::pow(1.5, k);
        samples.push_back({d, 3.0 * std::pow(d, -1.3)});
    }
    const auto fit = probe::critical_exponent_fit(samples, 0.05, 1.0);
    CHECK(fit.xi == Approx(1.3));
    CHECK(fit.log_prefactor == Approx(std::log(3.0)));
    CHECK(fit.xi_stderr < 1e-10);
    CHECK(fit.n_points == 7);

    CHECK_THROWS_AS((void)probe::critical_exponent_fit(samples, -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)probe::critical_exponent_fit(samples, 0.5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)probe::critical_exponent_fit(samples, 0.05, 0.1), std::invalid_argument);
}

}
