// activegrid: command-line driver for sweeps, ensembles and quantum runs.

#include "activegrid/experiments.hpp"
#include "activegrid/probe.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace activegrid;
using namespace activegrid::cli;

struct Common {
    std::string config_path;
    std::uint64_t seed{0};
    bool seed_set{false};
    std::string out;
    std::string meta;
    int threads{0};
    std::vector<std::string> sets;    // PATH=value
    std::vector<std::string> axes;    // PATH=start:stop:count or PATH=v1,v2
    std::string engine;
    bool no_resume{false};
};

void add_common(CLI::App* app, Common& c, bool with_axes) {
    app->add_option("-c,--config", c.config_path, "YAML run configuration");
    app->add_option("--seed", c.seed, "Master seed (overrides the config)")
        ->each([&c](const std::string&) { c.seed_set = true; });
    app->add_option("-o,--out", c.out, "Output file (stdout if omitted)");
    app->add_option("--meta", c.meta, "Metadata sidecar path (default: OUT.meta.json)");
    app->add_option("-t,--threads", c.threads, "OpenMP threads (0: default)")->check(CLI::NonNegativeNumber);
    app->add_option("--set", c.sets, "Override a parameter, PATH=value");
    if (with_axes) {
        app->add_option("--axis", c.axes, "Sweep axis PATH=start:stop:count or PATH=v1,v2 (replaces config axes)");
        app->add_flag("--no-resume", c.no_resume, "Ignore existing output");
    }
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    if (c.seed_set) {
        cfg.seed = c.seed;
    }
    if (!c.engine.empty()) {
        cfg.engine = engine_from_string(c.engine);
    }
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--set expects PATH=value, got '" + s + "'");
        }
        cfg.spec = apply_parameter(cfg.spec, s.substr(0, eq), std::stod(s.substr(eq + 1)));
    }
    if (!c.axes.empty()) {
        cfg.axes.clear();
        for (const auto& a : c.axes) {
            auto axis = parse_axis(a);
            (void)read_parameter(cfg.spec, axis.path);
            cfg.axes.push_back(std::move(axis));
        }
    }
    return cfg;
}

std::string meta_path(const Common& c) {
    if (!c.meta.empty()) return c.meta;
    return c.out.empty() ? std::string{} : c.out + ".meta.json";
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
    } else {
        write_text_file(c.out, text);
    }
}

void write_meta(const Common& c, const std::string& command, const RunConfig& cfg,
                const std::string& fp, const nlohmann::json& extra = {}) {
    const auto path = meta_path(c);
    if (path.empty()) return;
    auto j = run_metadata(command, cfg, fp);
    if (!extra.is_null()) {
        j["summary"] = extra;
    }
    write_text_file(path, j.dump(2) + "\n");
}

// Previous table of the same plan, if the sidecar fingerprint matches.
std::optional<Table> previous_table(const Common& c, const std::string& fp) {
    const auto mp = meta_path(c);
    if (c.no_resume || c.out.empty() || mp.empty() || !std::filesystem::exists(c.out) ||
        !std::filesystem::exists(mp)) {
        return std::nullopt;
    }
    try {
        const auto meta = nlohmann::json::parse(read_text_file(mp));
        if (meta.value("fingerprint", "") != fp) {
            return std::nullopt;
        }
        return parse_csv(read_text_file(c.out));
    } catch (const std::exception& e) {
        std::cerr << "warning: ignoring existing output: " << e.what() << "\n";
        return std::nullopt;
    }
}

int finish(const SweepResult& res) {
    if (res.reused > 0) {
        std::cerr << "resumed: " << res.reused << " points reused\n";
    }
    if (res.ok()) return 0;
    std::cerr << res.errors.size() << " point(s) failed:\n";
    for (const auto& e : res.errors) {
        std::cerr << "  " << e << "\n";
    }
    return 2;
}

int table_command(const std::string& command, const Common& c, const RunConfig& cfg,
                  const std::function<SweepResult(const SweepOptions&)>& run) {
    const auto fp = fingerprint(command + "\n" + to_json(cfg).dump());
    const auto prev = previous_table(c, fp);
    SweepOptions opt;
    opt.threads = c.threads;
    opt.previous = prev ? &*prev : nullptr;
    // Sidecar first, so an interrupted run can be resumed.
    write_meta(c, command, cfg, fp);
    const auto res = run(opt);
    emit(c, to_csv(res.table));
    return finish(res);
}

nlohmann::json cells_json(const std::map<std::string, std::string>& cells,
                          const std::vector<std::string>& order) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& col : order) {
        const auto it = cells.find(col);
        if (it == cells.end()) continue;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used == it->second.size()) {
                j[col] = v;
                continue;
            }
        } catch (const std::exception&) {
        }
        j[col] = it->second;
    }
    return j;
}

int single_point(const std::string& command, const Common& c, const RunConfig& cfg) {
    const auto fp = fingerprint(command + "\n" + to_json(cfg).dump());
    const auto seed = derive_seed(cfg.seed, 0);
    nlohmann::json j;
    j["engine"] = to_string(cfg.engine);
    j["seed"] = seed;
    j["network"] = to_json(cfg.spec);
    int code = 0;
    try {
        j["record"] = cells_json(evaluate_point(cfg, cfg.spec, seed),
                                 engine_columns(cfg.engine, cfg.spec));
    } catch (const std::exception& e) {
        j["record"] = {{"status", std::string("error: ") + e.what()}};
        std::cerr << "point 0: " << e.what() << "\n";
        code = 2;
    }
    write_meta(c, command, cfg, fp);
    emit(c, j.dump(2) + "\n");
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"activegrid: energy transport through networks of saturable gain/loss oscillators"};
    app.require_subcommand(1);

    Common c;

    auto* simulate = app.add_subcommand("simulate", "Run one point and print its record as JSON");
    add_common(simulate, c, false);
    simulate->add_option("--engine", c.engine, "sde, steady, analytic, linear, relax or quantum");

    auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep to CSV");
    add_common(sweep, c, true);
    sweep->add_option("--engine", c.engine, "sde, steady, analytic, linear, relax or quantum");

    std::string gain_range = "0.2:8:40", loss_range = "0.2:8:40";
    auto* lin = app.add_subcommand("linear", "Spectral abscissa over a (gain, loss) rate grid");
    add_common(lin, c, false);
    lin->add_option("--gain-range", gain_range, "start:stop:count");
    lin->add_option("--loss-range", loss_range, "start:stop:count");
    add_common(app.add_subcommand("analytic", "Closed-form solution record as JSON"), c, false);

    std::optional<Index> n_basis, n_traj, n_samples, stride;
    std::optional<double> q_dt, n0, nu, burn_in;
    std::string method;
    auto* quantum = app.add_subcommand("quantum", "Two-site quantum steady states vs swept parameter");
    add_common(quantum, c, true);
    quantum->add_option("--n-basis", n_basis, "Fock levels per mode");
    quantum->add_option("--n0", n0, "Saturation number of both terminals");
    quantum->add_option("--nu", nu, "Saturation exponent of both terminals");
    quantum->add_option("--method", method, "direct or mcwf")->check(CLI::IsMember({"direct", "mcwf"}));
    quantum->add_option("--dt", q_dt, "MCWF time step");
    quantum->add_option("--traj", n_traj, "MCWF trajectories");
    quantum->add_option("--samples", n_samples, "MCWF samples per trajectory");
    quantum->add_option("--stride", stride, "MCWF steps between samples");
    quantum->add_option("--burn-in", burn_in, "MCWF burn-in time");

    auto* relax = app.add_subcommand("relax", "Relaxation time vs swept parameter");
    add_common(relax, c, true);

    std::optional<double> sigma;
    std::optional<Index> n_real;
    std::string summary_path;
    auto* disorder = app.add_subcommand("disorder", "Random-detuning ensemble");
    add_common(disorder, c, false);
    disorder->add_option("--engine", c.engine, "steady or sde");
    disorder->add_option("--sigma", sigma, "Detuning half-width sigma_delta");
    disorder->add_option("--realizations", n_real, "Number of realizations");
    disorder->add_option("--summary", summary_path, "Averaged profile JSON (default: OUT.summary.json)");

    std::string rates = "0.5:8:16";
    auto* multiport = app.add_subcommand("multiport", "Branched-grid currents vs loss rate at site 6");
    add_common(multiport, c, false);
    multiport->add_option("--engine", c.engine, "steady or sde");
    multiport->add_option("--rates", rates, "start:stop:count or v1,v2,...");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c.threads > 0) {
            omp_set_num_threads(c.threads);
        }
        if (simulate->parsed()) {
            return single_point("simulate", c, resolve(c));
        }
        if (sweep->parsed()) {
            const auto cfg = resolve(c);
            return table_command("sweep", c, cfg, [&](const SweepOptions& o) { return run_sweep(cfg, o); });
        }
        if (lin->parsed()) {
            auto cfg = resolve(c);
            cfg.engine = Engine::linear;
            cfg.axes = {parse_axis("gain.rate=" + gain_range), parse_axis("loss.rate=" + loss_range)};
            return table_command("linear", c, cfg, [&](const SweepOptions& o) { return run_sweep(cfg, o); });
        }
        if (app.got_subcommand("analytic")) {
            auto cfg = resolve(c);
            cfg.engine = Engine::analytic;
            return single_point("analytic", c, cfg);
        }
        if (quantum->parsed()) {
            auto cfg = resolve(c);
            cfg.engine = Engine::quantum;
            auto& q = cfg.quantum;
            if (n_basis) q.n_basis = *n_basis;
            if (!method.empty()) q.direct = method == "direct";
            if (q_dt) q.mcwf.dt = *q_dt;
            if (n_traj) q.mcwf.n_traj = *n_traj;
            if (n_samples) q.mcwf.n_samples = *n_samples;
            if (stride) q.mcwf.sample_stride_steps = *stride;
            if (burn_in) q.mcwf.burn_in_time = *burn_in;
            q.mcwf.validate();
            auto terms = cfg.spec.terminals();
            for (auto& t : terms) {
                if (n0) t.law.n0 = *n0;
                if (nu) t.law.nu = *nu;
            }
            cfg.spec = cfg.spec.with_terminals(std::move(terms));
            return table_command("quantum", c, cfg, [&](const SweepOptions& o) { return run_sweep(cfg, o); });
        }
        if (relax->parsed()) {
            auto cfg = resolve(c);
            cfg.engine = Engine::relax;
            return table_command("relax", c, cfg, [&](const SweepOptions& o) { return run_sweep(cfg, o); });
        }
        if (disorder->parsed()) {
            auto cfg = resolve(c);
            if (c.engine.empty() && cfg.engine != Engine::sde) cfg.engine = Engine::steady;
            if (sigma) cfg.disorder.sigma_delta = *sigma;
            if (n_real) cfg.disorder.n_realizations = *n_real;
            const auto fp = fingerprint("disorder\n" + to_json(cfg).dump());
            const auto res = run_disorder(cfg, c.threads);
            nlohmann::json summary = {{"sigma_delta", cfg.disorder.sigma_delta},
                                      {"n_realizations", cfg.disorder.n_realizations},
                                      {"mean_occupations", res.mean_occupations},
                                      {"ordered_occupations", res.ordered_occupations},
                                      {"relative_l2_deviation", res.relative_l2_deviation},
                                      {"argmax_site", res.argmax_site}};
            write_meta(c, "disorder", cfg, fp, summary);
            emit(c, to_csv(res.realizations));
            const std::string sp = !summary_path.empty() ? summary_path
                                   : c.out.empty()        ? std::string{}
                                                          : c.out + ".summary.json";
            if (sp.empty()) {
                std::cout << summary.dump(2) << "\n";
            } else {
                write_text_file(sp, summary.dump(2) + "\n");
            }
            SweepResult shim;
            shim.errors = res.errors;
            return finish(shim);
        }
        if (multiport->parsed()) {
            auto cfg = resolve(c);
            if (c.engine.empty() && cfg.engine != Engine::steady) cfg.engine = Engine::sde;
            const auto values = parse_axis("loss@6.rate=" + rates).values;
            cfg.axes = {Axis{"loss@6.rate", values}};
            return table_command("multiport", c, cfg,
                                 [&](const SweepOptions& o) { return run_multiport(cfg, values, o); });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
