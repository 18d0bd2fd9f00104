#include "activegrid/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace activegrid;
using namespace activegrid::cli;
using doctest::Approx;

namespace {

constexpr const char* small_steady = R"(
network:
  kind: chain
  n_sites: 3
  gain: {rate: 2}
  loss: {rate: 3}
  bath: {gamma: 0.01}
engine: steady
steady: {dt: 0.01, tol: 1.0e-9, max_time: 20000}
sweep:
  - {path: loss.rate, values: [1.5, 3.0]}
  - {path: gain.rate, range: [1.0, 2.0, 3]}
seed: 7
)";

std::string error_of(const std::string& yaml) {
    try {
        (void)parse_config(yaml);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config: parsed values") {
    const auto cfg = parse_config(small_steady);
    CHECK(cfg.engine == Engine::steady);
    CHECK(cfg.spec.n_sites() == 3);
    CHECK(cfg.spec.bath().gamma == 0.01);
    CHECK(cfg.steady.dt == 0.01);
    CHECK(cfg.seed == 7);
    REQUIRE(cfg.axes.size() == 2);
    CHECK(cfg.axes[0].values == std::vector<double>{1.5, 3.0});
    CHECK(cfg.axes[1].values == std::vector<double>{1.0, 1.5, 2.0});
}

TEST_CASE("config: error messages name the offending key") {
    CHECK(error_of("network: {kind: chain}\nfoo: 1\n") == "config: root: unknown key 'foo'");
    CHECK(error_of("network: {kind: chain, gain: {rate: 2, n1: 3}}\n") ==
          "config: network.gain: unknown key 'n1'");
    CHECK(error_of("network: {kind: chain, coupling: abc}\n") ==
          "config: network.coupling: wrong type");
    CHECK(error_of("network: {kind: chain}\nintegrator: {dt: -1}\n") ==
          "config: integrator.dt: must be positive");
    CHECK(error_of("network: {kind: ring}\n").find("network.kind") != std::string::npos);
    CHECK(error_of("engine: sde\n").find("missing 'network'") != std::string::npos);
    CHECK(error_of("network: {kind: chain}\nengine: magic\n").find("engine") != std::string::npos);
    CHECK(error_of("network: {kind: chain, edges: [[0, 1]]}\n").find("network.edges") !=
          std::string::npos);
    CHECK_FALSE(error_of("network: [1, 2\n").empty());
}

TEST_CASE("config: custom networks") {
    const auto cfg = parse_config(R"(
network:
  kind: custom
  n_sites: 3
  edges: [[0, 1], [1, 2, 0.5]]
  terminals: [{site: 0, kind: gain, rate: 2}, {site: 2, kind: loss, rate: 1, n0: 5}]
)");
    CHECK(cfg.spec.edges().size() == 2);
    CHECK(cfg.spec.edges()[1].g == 0.5);
    CHECK(read_parameter(cfg.spec, "loss@2.rate") == 1.0);
    CHECK(read_parameter(cfg.spec, "loss.n0") == 5.0);
}

TEST_CASE("parameter paths") {
    const auto spec = build_chain(4, 1.0, {1e-3, 2.0}, {4.0, {}}, {3.0, {}});
    CHECK(read_parameter(spec, "gain.rate") == 4.0);
    CHECK(read_parameter(apply_parameter(spec, "gain.rate", 5.0), "gain.rate") == 5.0);
    CHECK(read_parameter(apply_parameter(spec, "loss@3.rate", 6.0), "loss.rate") == 6.0);
    CHECK(read_parameter(apply_parameter(spec, "terminal[0].rate", 1.5), "gain.rate") == 1.5);
    CHECK(read_parameter(apply_parameter(spec, "bath.gamma", 0.2), "bath.gamma") == 0.2);
    CHECK(read_parameter(apply_parameter(spec, "bath.n_th", 9.0), "bath.n_th") == 9.0);
    CHECK(read_parameter(apply_parameter(spec, "gain.n0", 50.0), "gain.n0") == 50.0);
    const auto c = apply_parameter(spec, "coupling", 2.0);
    for (const auto& e : c.edges()) CHECK(e.g == 2.0);
    CHECK(read_parameter(apply_parameter(spec, "detuning[2]", 0.3), "detuning[2]") == 0.3);
    CHECK(apply_parameter(spec, "detuning[2]", 0.3).detunings()[1] == 0.0);

    CHECK_THROWS_AS((void)read_parameter(spec, "gain@2.rate"), std::invalid_argument);
    CHECK_THROWS_AS((void)read_parameter(spec, "detuning[9]"), std::invalid_argument);
    CHECK_THROWS_AS((void)read_parameter(spec, "detuning[x]"), std::invalid_argument);
    CHECK_THROWS_AS((void)read_parameter(spec, "nothing"), std::invalid_argument);
    CHECK_THROWS_AS((void)apply_parameter(spec, "gain.rate", -1.0), std::invalid_argument);
}

TEST_CASE("axis parsing") {
    const auto r = parse_axis("loss.rate=1:2:5");
    CHECK(r.path == "loss.rate");
    REQUIRE(r.values.size() == 5);
    CHECK(r.values[1] == Approx(1.25));
    CHECK(r.values.back() == 2.0);
    const auto l = parse_axis("gain.rate=0.5,1,4");
    CHECK(l.values == std::vector<double>{0.5, 1.0, 4.0});
    CHECK(parse_axis("bath.gamma=3:3:1").values == std::vector<double>{3.0});
    CHECK_THROWS_AS((void)parse_axis("loss.rate"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_axis("loss.rate=1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_axis("loss.rate=1,x"), std::invalid_argument);
}

TEST_CASE("number formatting round trip") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        CHECK(parse_double(format_double(x)) == x);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(std::isnan(parse_double("nan")));
    CHECK(parse_double("-inf") == -std::numeric_limits<double>::infinity());
    CHECK_THROWS((void)parse_double("1.0x"));
}

TEST_CASE("csv round trip with quoting") {
    Table t;
    t.columns = {"a", "b,c", "q"};
    t.rows = {{"1", "x, y", "say \"hi\""}, {"", "line\nbreak", "plain"}};
    const auto back = parse_csv(to_csv(t));
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
    CHECK(back.at(0, "b,c") == "x, y");
    CHECK(back.column("missing") < 0);
    CHECK_THROWS_AS((void)back.at(0, "missing"), std::out_of_range);
}

TEST_CASE("fingerprint is stable and content sensitive") {
    CHECK(fingerprint("abc") == fingerprint("abc"));
    CHECK(fingerprint("abc") != fingerprint("abd"));
    CHECK(fingerprint("").size() == 16);
    // FNV-1a offset basis for the empty string.
    CHECK(fingerprint("") == "cbf29ce484222325");
}

TEST_CASE("plan ordering") {
    const std::vector<Axis> axes{{"a", {1, 2}}, {"b", {10, 20, 30}}};
    CHECK(plan_size(axes) == 6);
    CHECK(plan_size({}) == 1);
    CHECK(plan_point(axes, 0) == std::vector<double>{1, 10});
    CHECK(plan_point(axes, 2) == std::vector<double>{1, 30});
    CHECK(plan_point(axes, 3) == std::vector<double>{2, 10});
}

TEST_CASE("engine columns") {
    const auto spec = build_chain(3, 1.0, {}, {1.0, {}}, {1.0, {}});
    for (auto e : {Engine::sde, Engine::steady, Engine::analytic, Engine::linear, Engine::relax,
                   Engine::quantum}) {
        const auto cols = engine_columns(e, spec);
        REQUIRE_FALSE(cols.empty());
        CHECK(cols.front() == "status");
        CHECK(engine_from_string(to_string(e)) == e);
    }
}

TEST_CASE("sweep: determinism, failures and resume") {
    const auto cfg = parse_config(small_steady);
    const auto a = run_sweep(cfg);
    REQUIRE(a.ok());
    REQUIRE(a.table.rows.size() == 6);
    CHECK(a.table.columns[0] == "point");
    CHECK(a.table.columns[1] == "loss.rate");
    CHECK(a.table.columns[3] == "seed");
    CHECK(a.table.at(4, "loss.rate") == "3");
    CHECK(a.table.at(4, "gain.rate") == "1.5");
    CHECK(a.table.at(4, "seed") == std::to_string(derive_seed(7, 4)));

    const auto b = run_sweep(cfg);
    CHECK(b.table.rows == a.table.rows);

    auto partial = a.table;
    partial.rows.erase(partial.rows.begin() + 2);
    partial.rows[0][partial.column("status")] = "error: boom";
    SweepOptions opt;
    opt.previous = &partial;
    const auto c = run_sweep(cfg, opt);
    CHECK(c.reused == 4);
    CHECK(c.table.rows == a.table.rows);

    auto bad = cfg;
    bad.axes = {{"gain.rate", {1.0, -1.0}}};
    const auto d = run_sweep(bad);
    CHECK_FALSE(d.ok());
    REQUIRE(d.errors.size() == 1);
    CHECK(d.errors[0].rfind("point 1:", 0) == 0);
    CHECK(d.table.at(0, "status") == "ok");
    CHECK(d.table.at(1, "status").rfind("error:", 0) == 0);
}

TEST_CASE("analytic and linear engines") {
    auto cfg = parse_config("network: {kind: chain, n_sites: 10, gain: {rate: 4}, "
                            "loss: {rate: 8}, bath: {gamma: 0.001}}\nengine: analytic\n");
    const auto row = evaluate_point(cfg, cfg.spec, 0);
    CHECK(row.at("status") == "ok");
    CHECK(row.at("phase") == "broken");
    CHECK(parse_double(row.at("J")) == Approx(0.582).epsilon(1e-3));
    cfg.engine = Engine::linear;
    const auto lin = evaluate_point(cfg, cfg.spec, 0);
    CHECK(lin.at("stable") == "0");
}

TEST_CASE("disorder: zero width reproduces the ordered network") {
    auto cfg = parse_config(small_steady);
    cfg.axes.clear();
    cfg.disorder.sigma_delta = 0.0;
    cfg.disorder.n_realizations = 3;
    const auto res = run_disorder(cfg);
    REQUIRE(res.ok());
    CHECK(res.realizations.rows.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
        for (Index l = 0; l < 3; ++l) {
            const auto col = "occ_" + std::to_string(l);
            CHECK(res.realizations.number(r, col) == res.ordered_occupations[l]);
        }
    }
    CHECK(res.relative_l2_deviation < 1e-15);

    cfg.disorder.sigma_delta = 0.5;
    const auto w = run_disorder(cfg);
    REQUIRE(w.ok());
    CHECK(w.relative_l2_deviation > 0.0);
    CHECK(w.realizations.number(0, "delta_0") != w.realizations.number(1, "delta_0"));
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(std::abs(w.realizations.number(r, "delta_1")) <= 0.5);
    }

    cfg.engine = Engine::analytic;
    CHECK_THROWS_AS((void)run_disorder(cfg), std::invalid_argument);
}

TEST_CASE("multiport scan") {
    auto cfg = parse_config(R"(
network:
  kind: branched
  gain: {rate: 4}
  loss: {rate: 4}
  loss_branch: {rate: 4}
  bath: {gamma: 0.01}
engine: steady
steady: {dt: 0.01, tol: 1.0e-9, max_time: 20000, ramp: gain_first, ramp_time: 500}
)");
    const auto res = run_multiport(cfg, {2.0, 6.0});
    REQUIRE(res.ok());
    REQUIRE(res.table.rows.size() == 2);
    CHECK(res.table.columns[1] == "loss@6.rate");
    CHECK(res.table.at(1, "loss@6.rate") == "6");
    for (std::size_t r = 0; r < 2; ++r) {
        CHECK(res.table.at(r, "status") == "ok");
        CHECK(res.table.number(r, "occ_3") > 0.0);
        CHECK(res.table.at(r, "dJ_into_6").empty());
    }

    cfg.spec = build_chain(9, 1.0, {}, {1.0, {}}, {1.0, {}});
    CHECK_THROWS_AS((void)run_multiport(cfg, {1.0}), std::invalid_argument);
}

}
