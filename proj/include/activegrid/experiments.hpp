// experiments.hpp: Sweeps, disorder ensembles and the multiport scan.
//
// Every engine maps (config, spec, seed) to one table row. Row columns are
// fixed by the engine and the network topology, so all points of a plan
// share one header. Point k of a plan uses derive_seed(master, k).

#pragma once

#include "activegrid/config.hpp"
#include "activegrid/table.hpp"

#include <map>
#include <string>
#include <vector>

namespace activegrid::cli {

inline constexpr const char* status_ok = "ok";

/// Engine columns after the swept values: "status" first, then observables.
[[nodiscard]] std::vector<std::string> engine_columns(Engine engine, const NetworkSpec& spec);

/// Runs one engine invocation. Cells are keyed by column name; an exception
/// propagates to the caller.
[[nodiscard]] std::map<std::string, std::string> evaluate_point(const RunConfig& config,
                                                                const NetworkSpec& spec,
                                                                std::uint64_t seed);

struct SweepOptions {
    int threads{0};                       // 0: OpenMP default
    const Table* previous{nullptr};       // rows of an earlier run of the same plan
};

struct SweepResult {
    Table table;
    std::vector<std::string> errors;      // "point k: message"
    std::size_t reused{0};

    [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

/// Number of points in the Cartesian product of axes (1 without axes).
[[nodiscard]] std::size_t plan_size(const std::vector<Axis>& axes);

/// Values of point k, first axis varying slowest.
[[nodiscard]] std::vector<double> plan_point(const std::vector<Axis>& axes, std::size_t k);

/// One row per point: "point", one column per axis path, "seed", then the
/// engine columns. Failures are recorded in "status" and the sweep goes on.
/// Rows of `previous` with status ok and a matching point are reused verbatim.
[[nodiscard]] SweepResult run_sweep(const RunConfig& config, const SweepOptions& options = {});

struct DisorderResult {
    Table realizations;                   // detunings, status, currents, occupations
    std::vector<double> mean_occupations;
    std::vector<double> ordered_occupations;
    double relative_l2_deviation{0.0};    // ||mean - ordered|| / ||ordered||
    Index argmax_site{0};                 // of mean_occupations
    std::vector<std::string> errors;

    [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

/// Realization r draws Delta_l uniformly in [-sigma, sigma] from
/// derive_seed(master, r). The engine (steady or sde) runs with the same
/// probe or noise seed for every realization, so sigma = 0 reproduces the
/// ordered network exactly.
[[nodiscard]] DisorderResult run_disorder(const RunConfig& config, int threads = 0);

/// Currents into sites 6, 7, 8 (edges 5-6, 3-7, 7-8) and the crossing-site
/// occupation, for each rate of the loss terminal at site 6. Values are in
/// units of g n0 and n0 with n0 the reference scale of the spec.
[[nodiscard]] SweepResult run_multiport(const RunConfig& config,
                                        const std::vector<double>& loss_rates,
                                        const SweepOptions& options = {});

}  // namespace activegrid::cli
