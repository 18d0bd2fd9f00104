#include "activegrid/experiments.hpp"

#include "activegrid/analytic.hpp"
#include "activegrid/linear.hpp"
#include "activegrid/liouvillian.hpp"
#include "activegrid/quantum_measures.hpp"
#include "activegrid/rng.hpp"

#include <omp.h>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace activegrid::cli {

namespace {

using Cells = std::map<std::string, std::string>;

std::string edge_name(const char* prefix, const Edge& e) {
    return std::string(prefix) + "_" + std::to_string(e.i) + "_" + std::to_string(e.j);
}

std::string site_name(const char* prefix, Index l) {
    return std::string(prefix) + "_" + std::to_string(l);
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::string count(std::size_t n) { return std::to_string(n); }

void put(Cells& c, const std::string& key, double v) { c[key] = format_double(v); }

std::vector<std::string> edge_columns(const char* prefix, const NetworkSpec& spec) {
    std::vector<std::string> cols;
    for (const auto& e : spec.edges()) {
        cols.push_back(edge_name(prefix, e));
    }
    return cols;
}

std::vector<std::string> site_columns(const char* prefix, const NetworkSpec& spec) {
    std::vector<std::string> cols;
    for (Index l = 0; l < spec.n_sites(); ++l) {
        cols.push_back(site_name(prefix, l));
    }
    return cols;
}

void append(std::vector<std::string>& out, const std::vector<std::string>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

ActiveTerminal require_terminal(const NetworkSpec& spec, TerminalKind kind, const char* engine) {
    const auto t = spec.first_terminal(kind);
    if (!t) {
        throw std::invalid_argument(std::string(engine) + ": need a " +
                                    (kind == TerminalKind::gain ? "gain" : "loss") + " terminal");
    }
    return *t;
}

Cells eval_sde(const RunConfig& cfg, const NetworkSpec& spec, std::uint64_t seed) {
    auto integ = cfg.integrator;
    integ.seed = seed;
    auto ens = cfg.ensemble;
    if (cfg.warm_start) {
        const auto ss = probe::deterministic_steady_state(spec, cfg.steady);
        ens.initial = ss.state;
        ens.initial->time = 0.0;
    }
    const auto rec = sde::run_ensemble(spec, integ, ens);
    Cells c;
    const auto& edges = spec.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        put(c, edge_name("J", edges[k]), rec.mean_current[k]);
        put(c, edge_name("dJ", edges[k]), rec.current_std[k]);
    }
    for (Index l = 0; l < spec.n_sites(); ++l) {
        put(c, site_name("occ", l), rec.occupations[l]);
        put(c, site_name("occ_std", l), rec.occupation_std[l]);
    }
    put(c, "J", rec.mean_current[rec.headline_edge]);
    put(c, "dJ", rec.current_std[rec.headline_edge]);
    put(c, "damping_rate", rec.mean_damping_rate);
    put(c, "damping_rate_std", rec.damping_rate_std);
    put(c, "injected_power", rec.injected_power);
    put(c, "extracted_power", rec.extracted_power);
    put(c, "bath_power", rec.bath_power);
    put(c, "n_q", rec.quantum_dominance);
    c["samples"] = count(rec.sample_count);
    c["traj_completed"] = count(rec.n_traj_completed);
    c["traj_diverged"] = count(rec.diverged_trajectories.size());
    if (!rec.complete) {
        throw std::runtime_error("ensemble incomplete: " + count(rec.diverged_trajectories.size()) +
                                 " trajectories diverged");
    }
    return c;
}

Cells steady_cells(const NetworkSpec& spec, const probe::SteadyStateResult& ss) {
    Cells c;
    c["outcome"] = probe::to_string(ss.outcome);
    put(c, "omega", ss.omega);
    put(c, "residual", ss.residual);
    c["polished"] = flag(ss.polished);
    for (std::size_t k = 0; k < spec.edges().size(); ++k) {
        put(c, edge_name("J", spec.edges()[k]), ss.currents[k]);
    }
    for (Index l = 0; l < spec.n_sites(); ++l) {
        put(c, site_name("occ", l), ss.occupations[l]);
    }
    put(c, "J", ss.currents[spec.headline_edge()]);
    return c;
}

Cells eval_steady(const RunConfig& cfg, const NetworkSpec& spec) {
    return steady_cells(spec, probe::deterministic_steady_state(spec, cfg.steady));
}

Cells eval_analytic(const NetworkSpec& spec) {
    const auto gain = require_terminal(spec, TerminalKind::gain, "analytic");
    const auto loss = require_terminal(spec, TerminalKind::loss, "analytic");
    const double gi = gain.rate, ge = loss.rate, n0 = gain.law.n0;
    const double g = spec.edges().front().g;
    const double gamma = spec.bath().gamma;
    const Index n = spec.n_sites();

    Cells c;
    c["phase"] = analytic::to_string(analytic::classify(gi, ge, gamma, n));
    put(c, "k0", analytic::k0_select(gi, ge, n));
    const auto tp = analytic::transition_point(gi, g, gamma, n);
    put(c, "transition_general", tp.general);
    put(c, "transition_two_site", tp.two_site);
    put(c, "existence_limit", tp.existence_limit);
    const auto ex = analytic::symmetric_phase_exists(spec);
    c["symmetric_exists"] = flag(ex.exists);
    put(c, "symmetric_amp_sq", ex.amp_sq);
    put(c, "energy_balance_weight", ex.weight);
    try {
        const auto s = analytic::chain_solution(gi, ge, g, gamma, n, n0);
        c["closed_form"] = analytic::to_string(s.phase);
        put(c, "A_sq", std::norm(s.A));
        put(c, "B_sq", std::norm(s.B));
        put(c, "omega", s.omega);
        put(c, "J", s.current);
    } catch (const std::invalid_argument&) {
        c["closed_form"] = "none";
    }
    return c;
}

Cells eval_linear(const NetworkSpec& spec) {
    const auto rep = linear::spectrum(spec);
    Cells c;
    put(c, "spectral_abscissa", rep.spectral_abscissa);
    c["stable"] = flag(rep.stable);
    const auto gain = spec.first_terminal(TerminalKind::gain);
    const auto loss = spec.first_terminal(TerminalKind::loss);
    if (gain && loss) {
        c["predicted_stalled"] = flag(linear::is_stalled(gain->rate, loss->rate,
                                                         spec.edges().front().g));
    }
    return c;
}

Cells eval_relax(const RunConfig& cfg, const NetworkSpec& spec) {
    const double gi = require_terminal(spec, TerminalKind::gain, "relax").rate;
    const double ge = require_terminal(spec, TerminalKind::loss, "relax").rate;
    const auto ss = probe::deterministic_steady_state(spec, cfg.steady);
    if (!ss.converged()) {
        throw std::runtime_error("steady state " + probe::to_string(ss.outcome));
    }
    const auto rep = probe::relaxation_time(spec, ss.state, cfg.relax);
    Cells c;
    put(c, "distance", ge - gi);
    put(c, "tau_r", rep.tau_r);
    put(c, "tau_r_gamma", rep.tau_r * spec.bath().gamma);
    c["relax_converged"] = flag(rep.converged);
    c["monotone"] = flag(rep.monotone);
    put(c, "t_upper", rep.t_upper);
    put(c, "t_lower", rep.t_lower);
    c["steady_outcome"] = probe::to_string(ss.outcome);
    if (!rep.converged) {
        throw std::runtime_error("relaxation did not settle below the lower threshold");
    }
    return c;
}

double top_level_weight(const fock::DensityMatrix& rho) {
    const auto& space = rho.space();
    double w = 0.0;
    for (Index s = 0; s < space.dim(); ++s) {
        for (Index m = 0; m < space.n_modes(); ++m) {
            if (space.occupation(s, m) == space.n_basis() - 1) {
                w += rho.matrix()(s, s).real();
                break;
            }
        }
    }
    return w;
}

Cells eval_quantum(const RunConfig& cfg, const NetworkSpec& spec, std::uint64_t seed) {
    if (spec.n_sites() != 2) {
        throw std::invalid_argument("quantum: only two-site networks are supported");
    }
    const auto& q = cfg.quantum;
    const fock::FockSpace space(2, q.n_basis);
    const auto model = fock::build_quantum_model(spec, space);
    Cells c;
    auto rho = [&]() {
        if (q.direct) {
            const fock::Liouvillian lv(model, fock::LiouvilleBasis::balanced);
            fock::DirectOptions opt;
            opt.max_dim = std::max<Index>(opt.max_dim, space.dim());
            auto r = fock::steady_state_direct(lv, opt);
            put(c, "residual", fock::relative_residual(lv, r));
            c["samples"] = "0";
            return r;
        }
        auto mc = q.mcwf;
        mc.seed = seed;
        auto res = fock::mcwf_run(model, mc);
        c["samples"] = count(res.sample_count);
        put(c, "max_jump_probability", res.max_jump_probability);
        return std::move(res.rho);
    }();
    const double g = spec.edges().front().g;
    const auto occ = fock::occupations(rho);
    for (Index l = 0; l < 2; ++l) {
        put(c, site_name("occ", l), occ[l]);
    }
    c["method"] = q.direct ? "direct" : "mcwf";
    put(c, "J", fock::expectation_current(rho, g));
    put(c, "dJ", fock::current_fluctuation(rho, g));
    const std::optional<Index> k = q.negativity_k > 0 ? std::optional<Index>(q.negativity_k)
                                                      : std::nullopt;
    put(c, "negativity", fock::negativity(rho, k));
    put(c, "top_level_population", top_level_weight(rho));
    put(c, "min_eigenvalue", rho.min_eigenvalue());
    return c;
}

bool engine_runs_parallel(const RunConfig& cfg) {
    // These engines already spread one point over all threads.
    return cfg.engine == Engine::sde || (cfg.engine == Engine::quantum && !cfg.quantum.direct);
}

std::vector<std::string> make_row(const std::vector<std::string>& columns, const Cells& cells) {
    std::vector<std::string> row(columns.size());
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (const auto it = cells.find(columns[k]); it != cells.end()) {
            row[k] = it->second;
        }
    }
    return row;
}

// Evaluates `count` independent items under the sweep's scheduling policy.
template <class Fn>
void dispatch(std::size_t n, bool inner_parallel, int threads, Fn&& fn) {
    if (inner_parallel || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) {
            fn(k);
        }
        return;
    }
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (std::size_t k = 0; k < n; ++k) {
        fn(k);
    }
}

}  // namespace

std::vector<std::string> engine_columns(Engine engine, const NetworkSpec& spec) {
    std::vector<std::string> cols{"status"};
    switch (engine) {
        case Engine::sde:
            append(cols, {"J", "dJ"});
            append(cols, edge_columns("J", spec));
            append(cols, edge_columns("dJ", spec));
            append(cols, site_columns("occ", spec));
            append(cols, site_columns("occ_std", spec));
            append(cols, {"damping_rate", "damping_rate_std", "injected_power", "extracted_power",
                          "bath_power", "n_q", "samples", "traj_completed", "traj_diverged"});
            break;
        case Engine::steady:
            append(cols, {"outcome", "omega", "residual", "polished", "J"});
            append(cols, edge_columns("J", spec));
            append(cols, site_columns("occ", spec));
            break;
        case Engine::analytic:
            append(cols, {"phase", "closed_form", "k0", "omega", "A_sq", "B_sq", "J",
                          "transition_general", "transition_two_site", "existence_limit",
                          "symmetric_exists", "symmetric_amp_sq", "energy_balance_weight"});
            break;
        case Engine::linear:
            append(cols, {"spectral_abscissa", "stable", "predicted_stalled"});
            break;
        case Engine::relax:
            append(cols, {"distance", "tau_r", "tau_r_gamma", "relax_converged", "monotone",
                          "t_upper", "t_lower", "steady_outcome"});
            break;
        case Engine::quantum:
            append(cols, {"method", "J", "dJ", "negativity"});
            append(cols, site_columns("occ", spec));
            append(cols, {"top_level_population", "min_eigenvalue", "residual", "samples",
                          "max_jump_probability"});
            break;
    }
    return cols;
}

std::map<std::string, std::string> evaluate_point(const RunConfig& config, const NetworkSpec& spec,
                                                  std::uint64_t seed) {
    Cells c;
    switch (config.engine) {
        case Engine::sde: c = eval_sde(config, spec, seed); break;
        case Engine::steady: c = eval_steady(config, spec); break;
        case Engine::analytic: c = eval_analytic(spec); break;
        case Engine::linear: c = eval_linear(spec); break;
        case Engine::relax: c = eval_relax(config, spec); break;
        case Engine::quantum: c = eval_quantum(config, spec, seed); break;
    }
    c["status"] = status_ok;
    return c;
}

std::size_t plan_size(const std::vector<Axis>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) {
        n *= a.values.size();
    }
    return n;
}

std::vector<double> plan_point(const std::vector<Axis>& axes, std::size_t k) {
    std::vector<double> v(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
        const auto m = axes[a].values.size();
        v[a] = axes[a].values[k % m];
        k /= m;
    }
    return v;
}

namespace {

struct PlanRow {
    std::vector<std::string> cells;
    std::string error;
};

SweepResult run_plan(const std::vector<std::string>& leading_columns, std::size_t n_points,
                     const std::vector<std::string>& engine_cols, bool inner_parallel,
                     const SweepOptions& options,
                     const std::function<std::vector<std::string>(std::size_t)>& leading,
                     const std::function<Cells(std::size_t)>& evaluate) {
    SweepResult res;
    auto& t = res.table;
    t.columns = leading_columns;
    append(t.columns, engine_cols);

    std::vector<PlanRow> rows(n_points);
    std::vector<char> todo(n_points, 1);
    if (options.previous && options.previous->columns == t.columns) {
        const auto& prev = *options.previous;
        const long status_col = prev.column("status");
        for (const auto& row : prev.rows) {
            std::size_t k = n_points;
            try {
                k = static_cast<std::size_t>(std::stoull(row[0]));
            } catch (const std::exception&) {
                continue;
            }
            if (k < n_points && todo[k] && row[status_col] == status_ok &&
                row[0] == std::to_string(k)) {
                rows[k].cells = row;
                todo[k] = 0;
                ++res.reused;
            }
        }
    }

    std::vector<std::size_t> pending;
    for (std::size_t k = 0; k < n_points; ++k) {
        if (todo[k]) pending.push_back(k);
    }
    dispatch(pending.size(), inner_parallel, options.threads, [&](std::size_t p) {
        const std::size_t k = pending[p];
        Cells cells;
        try {
            cells = evaluate(k);
        } catch (const std::exception& e) {
            cells.clear();
            cells["status"] = std::string("error: ") + e.what();
            rows[k].error = e.what();
        }
        auto row = leading(k);
        const auto tail = make_row(engine_cols, cells);
        row.insert(row.end(), tail.begin(), tail.end());
        rows[k].cells = std::move(row);
    });

    for (std::size_t k = 0; k < n_points; ++k) {
        if (!rows[k].error.empty()) {
            res.errors.push_back("point " + std::to_string(k) + ": " + rows[k].error);
        }
        t.rows.push_back(std::move(rows[k].cells));
    }
    return res;
}

}  // namespace

SweepResult run_sweep(const RunConfig& config, const SweepOptions& options) {
    const auto n = plan_size(config.axes);
    std::vector<std::string> lead{"point"};
    for (const auto& a : config.axes) {
        lead.push_back(a.path);
    }
    lead.push_back("seed");
    auto point_spec = [&](std::size_t k) {
        auto spec = config.spec;
        const auto v = plan_point(config.axes, k);
        for (std::size_t a = 0; a < v.size(); ++a) {
            spec = apply_parameter(spec, config.axes[a].path, v[a]);
        }
        return spec;
    };
    return run_plan(
        lead, n, engine_columns(config.engine, config.spec), engine_runs_parallel(config), options,
        [&](std::size_t k) {
            std::vector<std::string> row{std::to_string(k)};
            for (double v : plan_point(config.axes, k)) {
                row.push_back(format_double(v));
            }
            row.push_back(std::to_string(derive_seed(config.seed, k)));
            return row;
        },
        [&](std::size_t k) { return evaluate_point(config, point_spec(k), derive_seed(config.seed, k)); });
}

DisorderResult run_disorder(const RunConfig& config, int threads) {
    if (config.engine != Engine::steady && config.engine != Engine::sde) {
        throw std::invalid_argument("disorder: engine must be steady or sde");
    }
    const double sigma = config.disorder.sigma_delta;
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("disorder: sigma_delta must be >= 0");
    }
    const Index n_real = config.disorder.n_realizations;
    const Index n_sites = config.spec.n_sites();
    const std::uint64_t engine_seed = derive_seed(config.seed, 0);

    auto detunings = [&](std::size_t r) {
        Rng rng(derive_seed(config.seed, r));
        std::vector<double> d(n_sites);
        for (auto& x : d) {
            x = sigma * (2.0 * rng.uniform() - 1.0);
        }
        return d;
    };

    std::vector<std::string> lead{"realization"};
    append(lead, site_columns("delta", config.spec));
    SweepOptions opt;
    opt.threads = threads;
    auto sweep = run_plan(
        lead, n_real, engine_columns(config.engine, config.spec), engine_runs_parallel(config), opt,
        [&](std::size_t r) {
            std::vector<std::string> row{std::to_string(r)};
            for (double d : detunings(r)) {
                row.push_back(format_double(d));
            }
            return row;
        },
        [&](std::size_t r) {
            return evaluate_point(config, config.spec.with_detunings(detunings(r)), engine_seed);
        });

    DisorderResult res;
    res.realizations = std::move(sweep.table);
    res.errors = std::move(sweep.errors);

    const auto ordered = evaluate_point(config, config.spec, engine_seed);
    res.ordered_occupations.resize(n_sites);
    res.mean_occupations.assign(n_sites, 0.0);
    for (Index l = 0; l < n_sites; ++l) {
        res.ordered_occupations[l] = parse_double(ordered.at(site_name("occ", l)));
    }
    std::size_t used = 0;
    for (std::size_t r = 0; r < res.realizations.rows.size(); ++r) {
        if (res.realizations.at(r, "status") != status_ok) continue;
        for (Index l = 0; l < n_sites; ++l) {
            res.mean_occupations[l] += res.realizations.number(r, site_name("occ", l));
        }
        ++used;
    }
    if (used == 0) {
        throw std::runtime_error("disorder: no realization succeeded");
    }
    double num = 0.0, den = 0.0;
    for (Index l = 0; l < n_sites; ++l) {
        res.mean_occupations[l] /= static_cast<double>(used);
        num += std::pow(res.mean_occupations[l] - res.ordered_occupations[l], 2);
        den += std::pow(res.ordered_occupations[l], 2);
        if (res.mean_occupations[l] > res.mean_occupations[res.argmax_site]) {
            res.argmax_site = l;
        }
    }
    res.relative_l2_deviation = std::sqrt(num / den);
    return res;
}

SweepResult run_multiport(const RunConfig& config, const std::vector<double>& loss_rates,
                          const SweepOptions& options) {
    if (config.engine != Engine::steady && config.engine != Engine::sde) {
        throw std::invalid_argument("multiport: engine must be steady or sde");
    }
    const auto& spec = config.spec;
    const auto e6 = spec.find_edge(5, 6);
    const auto e7 = spec.find_edge(3, 7);
    const auto e8 = spec.find_edge(7, 8);
    const bool has_loss6 = [&] {
        for (const auto& t : spec.terminals()) {
            if (t.site == 6 && t.kind == TerminalKind::loss) return true;
        }
        return false;
    }();
    if (spec.n_sites() != 9 || !e6 || !e7 || !e8 || !has_loss6) {
        throw std::invalid_argument(
            "multiport: needs the branched grid (edges 5-6, 3-7, 7-8, loss at site 6)");
    }
    const double n0 = spec.reference_n0();
    const std::vector<std::string> cols{"status",     "J_into_6",   "J_into_7",  "J_into_8",
                                        "dJ_into_6",  "dJ_into_7",  "dJ_into_8", "occ_3",
                                        "engine_status"};
    auto oriented = [&](const Cells& c, const char* prefix, Index from, Index to) {
        const auto& e = spec.edges()[*spec.find_edge(from, to)];
        const double v = parse_double(c.at(edge_name(prefix, e)));
        return e.i == from ? v : (prefix[0] == 'd' ? v : -v);
    };
    return run_plan(
        {"point", "loss@6.rate", "seed"}, loss_rates.size(), cols, engine_runs_parallel(config),
        options,
        [&](std::size_t k) {
            return std::vector<std::string>{std::to_string(k), format_double(loss_rates[k]),
                                            std::to_string(derive_seed(config.seed, k))};
        },
        [&](std::size_t k) {
            const auto s = spec.with_terminal_rate(6, TerminalKind::loss, loss_rates[k]);
            const auto c = evaluate_point(config, s, derive_seed(config.seed, k));
            Cells out;
            const Index from[3] = {5, 3, 7}, to[3] = {6, 7, 8};
            const char* names[3] = {"6", "7", "8"};
            for (int p = 0; p < 3; ++p) {
                put(out, std::string("J_into_") + names[p], oriented(c, "J", from[p], to[p]) / n0);
                if (config.engine == Engine::sde) {
                    put(out, std::string("dJ_into_") + names[p],
                        oriented(c, "dJ", from[p], to[p]) / n0);
                }
            }
            put(out, "occ_3", parse_double(c.at("occ_3")) / n0);
            out["engine_status"] = config.engine == Engine::steady ? c.at("outcome") : "ok";
            out["status"] = status_ok;
            return out;
        });
}

}  // namespace activegrid::cli
