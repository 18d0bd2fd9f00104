#include "activegrid/model.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace activegrid;

TEST_SUITE("model") {

TEST_CASE("saturation function values") {
    CHECK(saturation_f(0.0, {3.0, 2.0}) == 1.0);
    CHECK(saturation_f(0.0, {0.5, 1.0}) == 1.0);
    CHECK(saturation_f(1.0, {1.0, 2.0}) == doctest::Approx(0.5));
    CHECK(saturation_f(7.0, {7.0, 1.0}) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK_THROWS_AS((void)saturation_f(-1e-3, {}), std::domain_error);
}

TEST_CASE("saturation function decreases towards zero") {
    const SaturationLaw law{2.0, 1.3};
    double prev = saturation_f(0.0, law);
    for (double x = 0.1; x < 1e4; x *= 1.7) {
        const double f = saturation_f(x, law);
        CHECK(f < prev);
        prev = f;
    }
    CHECK(saturation_f(1e12, law) < 1e-6);
}

TEST_CASE("saturated rates") {
    const SaturationLaw law{1.0, 2.0};
    CHECK(rate_at(4.0, 0.0, law) == 4.0);
    CHECK(rate_at(4.0, 1.0, law) == doctest::Approx(1.0));
    CHECK(rate_at(4.0, 3.0, law) == doctest::Approx(0.25));
    CHECK_THROWS_AS((void)rate_at(4.0, -1.0, law), std::domain_error);
    for (double nu : {0.5, 1.0, 2.0, 3.7}) {
        for (double x : {0.0, 0.3, 2.0, 50.0}) {
            const SaturationLaw l{2.5, nu};
            const double f = saturation_f(x, l);
            CHECK(rate_at(3.0, x, l) == doctest::Approx(3.0 * f * f).epsilon(1e-14));
            CHECK(saturation_f2_unchecked(x, l) == doctest::Approx(f * f).epsilon(1e-14));
        }
    }
}

TEST_CASE("law validation") {
    CHECK_THROWS_AS((SaturationLaw{0.0, 2.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SaturationLaw{1.0, -1.0}.validate()), std::invalid_argument);
    CHECK_NOTHROW((SaturationLaw{1.0, 1.0}.validate()));
}

TEST_CASE("chain construction") {
    for (Index n = 2; n <= 12; ++n) {
        const auto spec = build_chain(n, 1.0, {}, {1.0, {}}, {1.0, {}});
        CHECK(spec.edges().size() == n - 1);
        CHECK(spec.n_sites() == n);
        CHECK(spec.first_terminal(TerminalKind::gain)->site == 0);
        CHECK(spec.first_terminal(TerminalKind::loss)->site == n - 1);
        for (double d : spec.detunings()) {
            CHECK(d == 0.0);
        }
    }
    CHECK_THROWS_AS((void)build_chain(1, 1.0, {}, {}, {}), std::invalid_argument);
}

TEST_CASE("network invariants") {
    const std::vector<Edge> path{{0, 1, 1.0}, {1, 2, 1.0}};
    CHECK_NOTHROW(NetworkSpec(3, path, {}, {}, {}));
    CHECK_THROWS_AS(NetworkSpec(4, path, {}, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, {{0, 1, 1.0}, {1, 1, 1.0}, {1, 2, 1.0}}, {}, {}, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}}, {}, {}, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, {{0, 1, 1.0}, {1, 3, 1.0}}, {}, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, {{0, 1, -1.0}, {1, 2, 1.0}}, {}, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, path, {}, {-1.0, 0.0}, {}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, path, {0.0, 0.0}, {}, {}), std::invalid_argument);
    const ActiveTerminal g0{0, TerminalKind::gain, 1.0, {}};
    CHECK_THROWS_AS(NetworkSpec(3, path, {}, {}, {g0, g0}), std::invalid_argument);
    CHECK_THROWS_AS(NetworkSpec(3, path, {}, {}, {{0, TerminalKind::gain, -1.0, {}}}),
                    std::invalid_argument);
    CHECK_NOTHROW(NetworkSpec(3, path, {}, {}, {g0, {0, TerminalKind::loss, 1.0, {}}}));
}

TEST_CASE("branched grid") {
    const auto spec = build_branched_grid(1.0, {1e-3, 3.0}, {4.0, {}}, {2.0, {}}, {4.0, {}});
    CHECK(spec.n_sites() == 9);
    CHECK(spec.edges().size() == 8);
    CHECK(spec.find_edge(3, 7).has_value());
    CHECK(spec.find_edge(8, 7).has_value());
    CHECK_FALSE(spec.find_edge(6, 7).has_value());
    int gains = 0, losses = 0;
    for (const auto& t : spec.terminals()) {
        if (t.kind == TerminalKind::gain) {
            CHECK(t.site == 0);
            ++gains;
        } else {
            CHECK((t.site == 6 || t.site == 8));
            ++losses;
        }
    }
    CHECK(gains == 1);
    CHECK(losses == 2);

    auto edges = spec.edges();
    std::erase_if(edges, [](const Edge& e) { return e.i == 3 && e.j == 7; });
    CHECK_THROWS_AS((void)spec.with_edges(edges), std::invalid_argument);
}

TEST_CASE("terminal rate replacement") {
    const auto spec = build_chain(4, 1.0, {}, {4.0, {}}, {2.0, {}});
    const auto changed = spec.with_terminal_rate(3, TerminalKind::loss, 7.0);
    CHECK(changed.first_terminal(TerminalKind::loss)->rate == 7.0);
    CHECK(spec.first_terminal(TerminalKind::loss)->rate == 2.0);
    CHECK_THROWS((void)spec.with_terminal_rate(1, TerminalKind::loss, 1.0));
}

TEST_CASE("drift matrix entries") {
    const auto two = build_chain(2, 1.0, {}, {4.0, {}}, {6.0, {}});
    const auto m = drift_matrix(two);
    CHECK(m(0, 0) == Complex(2.0, 0.0));
    CHECK(m(1, 1) == Complex(-3.0, 0.0));
    CHECK(m(0, 1) == Complex(0.0, 0.5));
    CHECK(m(1, 0) == Complex(0.0, 0.5));

    const auto detuned = build_chain(5, 0.7, {1e-2, 0.0}, {1.0, {}}, {1.0, {}})
                             .with_detunings({0.0, 0.0, 0.05, 0.0, 0.0});
    const auto md = drift_matrix(detuned);
    CHECK(md(2, 2).real() == doctest::Approx(-5e-3));
    CHECK(md(2, 2).imag() == doctest::Approx(-0.05));
    CHECK(md(2, 1) == Complex(0.0, 0.35));
    CHECK(md(2, 3) == Complex(0.0, 0.35));
    CHECK(md(2, 0) == Complex(0.0, 0.0));
}

TEST_CASE("hermitian part of the drift matrix is the rate diagonal") {
    const auto spec = build_branched_grid(1.3, {2e-2, 0.0}, {4.0, {}}, {2.5, {}}, {3.0, {}})
                          .with_detunings({0.1, -0.2, 0.0, 0.3, 0.0, 0.0, -0.4, 0.0, 0.2});
    const Eigen::MatrixXcd m = drift_matrix(spec);
    const Eigen::MatrixXcd h = m + m.adjoint();
    Eigen::VectorXd expected = Eigen::VectorXd::Constant(9, -2e-2);
    expected[0] += 4.0;
    expected[6] -= 2.5;
    expected[8] -= 3.0;
    for (Index a = 0; a < 9; ++a) {
        for (Index b = 0; b < 9; ++b) {
            const Complex want = a == b ? Complex(expected[a], 0.0) : Complex(0.0, 0.0);
            CHECK(std::abs(h(a, b) - want) < 1e-14);
        }
    }
}

}
