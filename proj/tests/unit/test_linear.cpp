#include "activegrid/linear.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace activegrid;

namespace {

NetworkSpec two_site(double gi, double ge, double gamma = 0.0) {
    return build_chain(2, 1.0, {gamma, 0.0}, {gi, {}}, {ge, {}});
}

}  // namespace

TEST_SUITE("linear") {

TEST_CASE("two-site closed form") {
    // lambda = (Gi - Ge)/4 +- sqrt(((Gi + Ge)/4)^2 - g^2/4) for gamma = 0
    for (double rate : {0.5, 2.0}) {
        const auto rep = linear::spectrum(two_site(rate, rate));
        const double expected = rate < 1.0 ? 0.0 : 0.5 * std::sqrt(rate * rate - 1.0);
        CHECK(rep.spectral_abscissa == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
        CHECK(rep.eigenvalues.size() == 2);
    }
    CHECK(linear::spectrum(two_site(2.0, 2.0)).spectral_abscissa ==
          doctest::Approx(std::sqrt(3.0) / 2.0));
}

TEST_CASE("decoupled damped oscillator") {
    const auto spec = build_passive_chain(2, 1e-12, {0.3, 0.0});
    const auto rep = linear::spectrum(spec);
    for (const auto& ev : rep.eigenvalues) {
        CHECK(ev.real() == doctest::Approx(-0.15));
    }
}

TEST_CASE("passive chain: tight-binding band") {
    const Index n = 7;
    const double gamma = 0.02;
    const auto rep = linear::spectrum(build_passive_chain(n, 1.0, {gamma, 0.0}));
    CHECK(rep.stable);
    CHECK(rep.spectral_abscissa == doctest::Approx(-gamma / 2));
    std::vector<double> im, band;
    for (const auto& ev : rep.eigenvalues) {
        CHECK(ev.real() == doctest::Approx(-gamma / 2));
        im.push_back(ev.imag());
    }
    for (Index k = 1; k <= n; ++k) {
        band.push_back(std::cos(std::numbers::pi * static_cast<double>(k) / (n + 1.0)));
    }
    std::sort(im.begin(), im.end());
    std::sort(band.begin(), band.end());
    for (Index k = 0; k < n; ++k) {
        CHECK(im[k] == doctest::Approx(band[k]).scale(1.0));
    }
}

TEST_CASE("report ordering and abscissa") {
    const auto rep = linear::spectrum(build_chain(6, 1.0, {1e-2, 0.0}, {1.7, {}}, {0.4, {}}));
    CHECK(rep.eigenvalues.size() == 6);
    for (std::size_t k = 1; k < rep.eigenvalues.size(); ++k) {
        CHECK(rep.eigenvalues[k - 1].real() >= rep.eigenvalues[k].real());
    }
    CHECK(rep.spectral_abscissa == rep.eigenvalues.front().real());
    CHECK(rep.stable == (rep.spectral_abscissa < 0.0));
}

TEST_CASE("stalled-region predicate") {
    CHECK(linear::is_stalled(0.5, 1.5, 1.0));
    CHECK_FALSE(linear::is_stalled(2.0, 0.1, 1.0));
    CHECK_FALSE(linear::is_stalled(2.0, 3.0, 1.0));
    CHECK_FALSE(linear::is_stalled(0.5, 0.4, 1.0));
    CHECK(linear::is_stalled(0.5, 0.5, 1.0));
    CHECK_FALSE(linear::is_stalled(0.5, 2.0, 1.0));
}

TEST_CASE("stalled region matches the spectrum of the ten-site chain") {
    const auto base = build_chain(10, 1.0, {1e-9, 0.0}, {1.0, {}}, {1.0, {}});
    std::vector<double> rates;
    for (int k = 1; k <= 50; ++k) {
        rates.push_back(4.0 * k / 50.0);
    }
    const auto map = linear::phase_map(base, rates, rates);
    REQUIRE(map.size() == 2500);
    const double h = 4.0 / 50.0;
    int mismatches = 0, off_boundary_mismatches = 0;
    for (const auto& p : map) {
        if (p.stable == p.predicted_stalled) {
            continue;
        }
        ++mismatches;
        // Accept disagreement only within one grid spacing of the region boundary.
        bool near = false;
        for (double dx : {-h, 0.0, h}) {
            for (double dy : {-h, 0.0, h}) {
                const double gi = p.gain_rate + dx, ge = p.loss_rate + dy;
                if (gi > 0 && ge > 0 && linear::is_stalled(gi, ge, 1.0) != p.predicted_stalled) {
                    near = true;
                }
            }
        }
        if (!near) {
            ++off_boundary_mismatches;
        }
    }
    CHECK(off_boundary_mismatches == 0);
    MESSAGE("boundary cells disagreeing: " << mismatches);
}

TEST_CASE("mirrored chain has the same spectrum") {
    const auto chain = build_chain(8, 1.0, {1e-3, 0.0}, {2.3, {}}, {1.1, {}});
    std::vector<ActiveTerminal> mirrored;
    for (auto t : chain.terminals()) {
        t.site = 7 - t.site;
        mirrored.push_back(t);
    }
    const auto flipped = chain.with_terminals(mirrored);
    const auto a = linear::spectrum(chain);
    const auto b = linear::spectrum(drift_matrix(flipped).transpose().eval());
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    for (const auto& ev : a.eigenvalues) {
        double best = INFINITY;
        for (const auto& other : b.eigenvalues) {
            best = std::min(best, std::abs(ev - other));
        }
        CHECK(best < 1e-10);
    }
}

TEST_CASE("phase map requires both terminals") {
    CHECK_THROWS((void)linear::phase_map(build_passive_chain(3, 1.0, {}), {1.0}, {1.0}));
}

}
