#include "activegrid/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace activegrid::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config: " + where + ": " + what);
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!node.IsMap()) {
        fail(where, "expected a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) {
            fail(where, "unknown key '" + key + "'");
        }
    }
}

template <class T>
T get(const YAML::Node& node, const std::string& key, const std::string& where, T fallback) {
    const auto child = node[key];
    if (!child) {
        return fallback;
    }
    try {
        return child.as<T>();
    } catch (const YAML::Exception&) {
        fail(where + "." + key, "wrong type");
    }
}

double get_positive(const YAML::Node& node, const std::string& key, const std::string& where,
                    double fallback) {
    const double v = get<double>(node, key, where, fallback);
    if (!(v > 0.0)) {
        fail(where + "." + key, "must be positive");
    }
    return v;
}

Drive read_drive(const YAML::Node& node, const std::string& where, Drive fallback) {
    if (!node) {
        return fallback;
    }
    check_keys(node, {"rate", "n0", "nu"}, where);
    Drive d = fallback;
    d.rate = get<double>(node, "rate", where, d.rate);
    d.law.n0 = get<double>(node, "n0", where, d.law.n0);
    d.law.nu = get<double>(node, "nu", where, d.law.nu);
    if (d.rate < 0.0) {
        fail(where + ".rate", "must be >= 0");
    }
    return d;
}

TerminalKind kind_from_string(const std::string& s, const std::string& where) {
    if (s == "gain") return TerminalKind::gain;
    if (s == "loss") return TerminalKind::loss;
    fail(where, "terminal kind must be 'gain' or 'loss', got '" + s + "'");
}

NetworkSpec read_network(const YAML::Node& node) {
    const std::string where = "network";
    check_keys(node, {"kind", "n_sites", "coupling", "gain", "loss", "loss_branch", "bath",
                      "detunings", "edges", "terminals"},
               where);
    const auto kind = get<std::string>(node, "kind", where, "chain");
    const double g = get_positive(node, "coupling", where, 1.0);

    BathSpec bath;
    if (const auto b = node["bath"]) {
        check_keys(b, {"gamma", "n_th"}, where + ".bath");
        bath.gamma = get<double>(b, "gamma", where + ".bath", 0.0);
        bath.n_th = get<double>(b, "n_th", where + ".bath", 0.0);
    }
    const auto detunings = get<std::vector<double>>(node, "detunings", where, {});

    auto reject = [&](const char* key) {
        if (node[key]) {
            fail(where + "." + key, "not used by kind '" + kind + "'");
        }
    };

    NetworkSpec spec = [&]() -> NetworkSpec {
        try {
            if (kind == "chain") {
                reject("loss_branch");
                reject("edges");
                reject("terminals");
                const auto n = get<Index>(node, "n_sites", where, 10);
                return build_chain(n, g, bath, read_drive(node["gain"], where + ".gain", {4.0, {}}),
                                   read_drive(node["loss"], where + ".loss", {4.0, {}}));
            }
            if (kind == "branched") {
                reject("n_sites");
                reject("edges");
                reject("terminals");
                return build_branched_grid(
                    g, bath, read_drive(node["gain"], where + ".gain", {4.0, {}}),
                    read_drive(node["loss"], where + ".loss", {4.0, {}}),
                    read_drive(node["loss_branch"], where + ".loss_branch", {4.0, {}}));
            }
            if (kind == "custom") {
                reject("gain");
                reject("loss");
                reject("loss_branch");
                const auto n = get<Index>(node, "n_sites", where, 0);
                std::vector<Edge> edges;
                for (const auto& e : node["edges"]) {
                    if (!e.IsSequence() || (e.size() != 2 && e.size() != 3)) {
                        fail(where + ".edges", "each edge is [i, j] or [i, j, g]");
                    }
                    edges.push_back({e[0].as<Index>(), e[1].as<Index>(),
                                     e.size() == 3 ? e[2].as<double>() : g});
                }
                std::vector<ActiveTerminal> terms;
                for (const auto& t : node["terminals"]) {
                    const std::string tw = where + ".terminals";
                    check_keys(t, {"site", "kind", "rate", "n0", "nu"}, tw);
                    ActiveTerminal at;
                    at.site = get<Index>(t, "site", tw, 0);
                    at.kind = kind_from_string(get<std::string>(t, "kind", tw, "gain"), tw);
                    at.rate = get<double>(t, "rate", tw, 0.0);
                    at.law.n0 = get<double>(t, "n0", tw, 1.0);
                    at.law.nu = get<double>(t, "nu", tw, 2.0);
                    terms.push_back(at);
                }
                return NetworkSpec(n, std::move(edges), {}, bath, std::move(terms));
            }
        } catch (const YAML::Exception& e) {
            fail(where, e.what());
        }
        fail(where + ".kind", "must be chain, branched or custom, got '" + kind + "'");
    }();
    if (!detunings.empty()) {
        spec = spec.with_detunings(detunings);
    }
    return spec;
}

void read_integrator(const YAML::Node& node, sde::IntegratorConfig& c) {
    const std::string where = "integrator";
    check_keys(node, {"dt", "divergence_guard"}, where);
    c.dt = get_positive(node, "dt", where, c.dt);
    c.divergence_guard = get_positive(node, "divergence_guard", where, c.divergence_guard);
}

void read_ensemble(const YAML::Node& node, RunConfig& cfg) {
    const std::string where = "ensemble";
    check_keys(node, {"n_traj", "burn_in_time", "n_samples", "sample_stride_steps", "histogram",
                      "warm_start"},
               where);
    auto& e = cfg.ensemble;
    e.n_traj = get<Index>(node, "n_traj", where, e.n_traj);
    e.burn_in_time = get<double>(node, "burn_in_time", where, e.burn_in_time);
    e.n_samples = get<Index>(node, "n_samples", where, e.n_samples);
    e.sample_stride_steps = get<Index>(node, "sample_stride_steps", where, e.sample_stride_steps);
    cfg.warm_start = get<bool>(node, "warm_start", where, cfg.warm_start);
    if (const auto h = node["histogram"]) {
        check_keys(h, {"bins", "range"}, where + ".histogram");
        e.histogram.bins = get<Index>(h, "bins", where + ".histogram", e.histogram.bins);
        e.histogram.range = get_positive(h, "range", where + ".histogram", e.histogram.range);
    }
}

probe::RampOrder ramp_from_string(const std::string& s) {
    if (s == "none") return probe::RampOrder::none;
    if (s == "gain_first") return probe::RampOrder::gain_first;
    if (s == "loss_first") return probe::RampOrder::loss_first;
    fail("steady.ramp", "must be none, gain_first or loss_first, got '" + s + "'");
}

void read_steady(const YAML::Node& node, probe::SteadyStateConfig& c) {
    const std::string where = "steady";
    check_keys(node, {"dt", "window", "tol", "max_time", "seed_amplitude", "ramp", "ramp_time",
                      "polish", "average_time"},
               where);
    c.dt = get_positive(node, "dt", where, c.dt);
    c.window = get_positive(node, "window", where, c.window);
    c.tol = get_positive(node, "tol", where, c.tol);
    c.max_time = get_positive(node, "max_time", where, c.max_time);
    c.seed_amplitude = get_positive(node, "seed_amplitude", where, c.seed_amplitude);
    c.ramp_time = get<double>(node, "ramp_time", where, c.ramp_time);
    c.polish = get<bool>(node, "polish", where, c.polish);
    c.average_time = get_positive(node, "average_time", where, c.average_time);
    if (node["ramp"]) {
        c.ramp = ramp_from_string(node["ramp"].as<std::string>());
    }
}

void read_relax(const YAML::Node& node, probe::RelaxationConfig& c) {
    const std::string where = "relax";
    check_keys(node, {"delta_alpha", "upper", "lower", "dt", "max_time", "hold_time",
                      "radial_kick"},
               where);
    c.delta_alpha = get_positive(node, "delta_alpha", where, c.delta_alpha);
    c.upper = get_positive(node, "upper", where, c.upper);
    c.lower = get_positive(node, "lower", where, c.lower);
    c.dt = get_positive(node, "dt", where, c.dt);
    c.max_time = get_positive(node, "max_time", where, c.max_time);
    c.hold_time = get<double>(node, "hold_time", where, c.hold_time);
    c.radial_kick = get<bool>(node, "radial_kick", where, c.radial_kick);
    if (!(c.lower < c.upper)) {
        fail(where, "lower must be below upper");
    }
}

void read_quantum(const YAML::Node& node, QuantumSettings& q) {
    const std::string where = "quantum";
    check_keys(node, {"n_basis", "method", "negativity_k", "dt", "burn_in_time", "n_samples",
                      "sample_stride_steps", "n_traj"},
               where);
    q.n_basis = get<Index>(node, "n_basis", where, q.n_basis);
    if (q.n_basis < 2) {
        fail(where + ".n_basis", "must be >= 2");
    }
    const auto method = get<std::string>(node, "method", where, q.direct ? "direct" : "mcwf");
    if (method != "direct" && method != "mcwf") {
        fail(where + ".method", "must be direct or mcwf, got '" + method + "'");
    }
    q.direct = method == "direct";
    q.negativity_k = get<Index>(node, "negativity_k", where, q.negativity_k);
    q.mcwf.dt = get_positive(node, "dt", where, q.mcwf.dt);
    q.mcwf.burn_in_time = get<double>(node, "burn_in_time", where, q.mcwf.burn_in_time);
    q.mcwf.n_samples = get<Index>(node, "n_samples", where, q.mcwf.n_samples);
    q.mcwf.sample_stride_steps =
        get<Index>(node, "sample_stride_steps", where, q.mcwf.sample_stride_steps);
    q.mcwf.n_traj = get<Index>(node, "n_traj", where, q.mcwf.n_traj);
}

std::vector<double> linspace(double start, double stop, Index count) {
    if (count == 0) {
        throw std::invalid_argument("axis: count must be positive");
    }
    std::vector<double> v(count);
    for (Index k = 0; k < count; ++k) {
        v[k] = count == 1 ? start
                          : start + (stop - start) * static_cast<double>(k) /
                                        static_cast<double>(count - 1);
    }
    return v;
}

void read_sweep(const YAML::Node& node, const NetworkSpec& spec, std::vector<Axis>& axes) {
    if (!node.IsSequence()) {
        fail("sweep", "expected a list of axes");
    }
    for (std::size_t k = 0; k < node.size(); ++k) {
        const std::string where = "sweep[" + std::to_string(k) + "]";
        const auto a = node[k];
        check_keys(a, {"path", "values", "range"}, where);
        Axis axis;
        axis.path = get<std::string>(a, "path", where, "");
        if (a["values"] && a["range"]) {
            fail(where, "give either values or range");
        }
        if (a["values"]) {
            axis.values = get<std::vector<double>>(a, "values", where, {});
        } else if (a["range"]) {
            const auto r = get<std::vector<double>>(a, "range", where, {});
            if (r.size() != 3 || r[2] < 1.0) {
                fail(where + ".range", "expected [start, stop, count]");
            }
            axis.values = linspace(r[0], r[1], static_cast<Index>(r[2]));
        }
        if (axis.values.empty()) {
            fail(where, "no values");
        }
        try {
            (void)read_parameter(spec, axis.path);
        } catch (const std::invalid_argument& e) {
            fail(where + ".path", e.what());
        }
        axes.push_back(std::move(axis));
    }
}

// Parameter path pieces: "<head>[.<field>]" where head may carry "[k]" or "@S".
struct PathRef {
    std::string head;
    std::optional<Index> index;
    std::optional<Index> site;
    std::string field;
};

Index parse_index(const std::string& s, const std::string& path) {
    Index v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        throw std::invalid_argument("parameter path '" + path + "': bad index '" + s + "'");
    }
    return v;
}

PathRef split_path(const std::string& path) {
    PathRef ref;
    const auto dot = path.find('.');
    std::string head = path.substr(0, dot);
    ref.field = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (const auto at = head.find('@'); at != std::string::npos) {
        ref.site = parse_index(head.substr(at + 1), path);
        head = head.substr(0, at);
    } else if (const auto br = head.find('['); br != std::string::npos) {
        if (head.back() != ']') {
            throw std::invalid_argument("parameter path '" + path + "': missing ']'");
        }
        ref.index = parse_index(head.substr(br + 1, head.size() - br - 2), path);
        head = head.substr(0, br);
    }
    ref.head = head;
    return ref;
}

[[noreturn]] void bad_path(const std::string& path, const std::string& why) {
    throw std::invalid_argument("parameter path '" + path + "' " + why);
}

// Locates the terminal a path refers to; returns its position in spec.terminals().
Index locate_terminal(const NetworkSpec& spec, const PathRef& ref, const std::string& path) {
    const auto& terms = spec.terminals();
    if (ref.head == "terminal") {
        if (!ref.index || *ref.index >= terms.size()) {
            bad_path(path, "needs terminal[k] with k < " + std::to_string(terms.size()));
        }
        return *ref.index;
    }
    const TerminalKind kind = ref.head == "gain" ? TerminalKind::gain : TerminalKind::loss;
    for (Index k = 0; k < terms.size(); ++k) {
        if (terms[k].kind == kind && (!ref.site || terms[k].site == *ref.site)) {
            return k;
        }
    }
    bad_path(path, "does not match any terminal");
}

double& terminal_field(ActiveTerminal& t, const std::string& field, const std::string& path) {
    if (field == "rate") return t.rate;
    if (field == "n0") return t.law.n0;
    if (field == "nu") return t.law.nu;
    bad_path(path, "field must be rate, n0 or nu");
}

}  // namespace

std::string to_string(Engine engine) {
    switch (engine) {
        case Engine::sde: return "sde";
        case Engine::steady: return "steady";
        case Engine::analytic: return "analytic";
        case Engine::linear: return "linear";
        case Engine::relax: return "relax";
        case Engine::quantum: return "quantum";
    }
    return "unknown";
}

Engine engine_from_string(const std::string& name) {
    for (Engine e : {Engine::sde, Engine::steady, Engine::analytic, Engine::linear, Engine::relax,
                     Engine::quantum}) {
        if (to_string(e) == name) {
            return e;
        }
    }
    throw std::invalid_argument("unknown engine '" + name + "'");
}

double read_parameter(const NetworkSpec& spec, const std::string& path) {
    const auto ref = split_path(path);
    if (ref.head == "gain" || ref.head == "loss" || ref.head == "terminal") {
        auto t = spec.terminals()[locate_terminal(spec, ref, path)];
        return terminal_field(t, ref.field, path);
    }
    if (ref.head == "bath") {
        if (ref.field == "gamma") return spec.bath().gamma;
        if (ref.field == "n_th") return spec.bath().n_th;
        bad_path(path, "field must be gamma or n_th");
    }
    if (ref.head == "coupling" && ref.field.empty()) {
        return spec.edges().front().g;
    }
    if (ref.head == "detuning" && ref.field.empty()) {
        if (!ref.index || *ref.index >= spec.n_sites()) {
            bad_path(path, "needs detuning[k] with k < n_sites");
        }
        return spec.detunings()[*ref.index];
    }
    bad_path(path, "does not resolve");
}

NetworkSpec apply_parameter(const NetworkSpec& spec, const std::string& path, double value) {
    const auto ref = split_path(path);
    if (ref.head == "gain" || ref.head == "loss" || ref.head == "terminal") {
        auto terms = spec.terminals();
        terminal_field(terms[locate_terminal(spec, ref, path)], ref.field, path) = value;
        return spec.with_terminals(std::move(terms));
    }
    if (ref.head == "bath") {
        auto bath = spec.bath();
        if (ref.field == "gamma") {
            bath.gamma = value;
        } else if (ref.field == "n_th") {
            bath.n_th = value;
        } else {
            bad_path(path, "field must be gamma or n_th");
        }
        return spec.with_bath(bath);
    }
    if (ref.head == "coupling" && ref.field.empty()) {
        auto edges = spec.edges();
        for (auto& e : edges) {
            e.g = value;
        }
        return spec.with_edges(std::move(edges));
    }
    if (ref.head == "detuning" && ref.field.empty()) {
        if (!ref.index || *ref.index >= spec.n_sites()) {
            bad_path(path, "needs detuning[k] with k < n_sites");
        }
        auto det = spec.detunings();
        det[*ref.index] = value;
        return spec.with_detunings(std::move(det));
    }
    bad_path(path, "does not resolve");
}

Axis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("axis '" + text + "': expected PATH=start:stop:count or PATH=v1,v2");
    }
    Axis axis;
    axis.path = text.substr(0, eq);
    const std::string rhs = text.substr(eq + 1);
    auto to_double = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("axis '" + text + "': bad number '" + s + "'");
        }
    };
    if (std::count(rhs.begin(), rhs.end(), ':') == 2) {
        const auto c1 = rhs.find(':');
        const auto c2 = rhs.find(':', c1 + 1);
        const double count = to_double(rhs.substr(c2 + 1));
        if (count < 1.0 || count != static_cast<double>(static_cast<Index>(count))) {
            throw std::invalid_argument("axis '" + text + "': count must be a positive integer");
        }
        axis.values = linspace(to_double(rhs.substr(0, c1)), to_double(rhs.substr(c1 + 1, c2 - c1 - 1)),
                               static_cast<Index>(count));
        return axis;
    }
    std::stringstream ss(rhs);
    std::string item;
    while (std::getline(ss, item, ',')) {
        axis.values.push_back(to_double(item));
    }
    if (axis.values.empty()) {
        throw std::invalid_argument("axis '" + text + "': no values");
    }
    return axis;
}

RunConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("config: YAML parse error: ") + e.what());
    }
    if (!root || root.IsNull()) {
        fail("root", "empty document");
    }
    check_keys(root, {"network", "engine", "integrator", "ensemble", "steady", "relax", "quantum",
                      "sweep", "disorder", "seed"},
               "root");
    if (!root["network"]) {
        fail("root", "missing 'network' section");
    }
    RunConfig cfg;
    cfg.source = yaml_text;
    cfg.spec = read_network(root["network"]);
    if (root["engine"]) {
        try {
            cfg.engine = engine_from_string(root["engine"].as<std::string>());
        } catch (const std::invalid_argument& e) {
            fail("engine", e.what());
        }
    }
    if (root["integrator"]) read_integrator(root["integrator"], cfg.integrator);
    if (root["ensemble"]) read_ensemble(root["ensemble"], cfg);
    if (root["steady"]) read_steady(root["steady"], cfg.steady);
    if (root["relax"]) read_relax(root["relax"], cfg.relax);
    if (root["quantum"]) read_quantum(root["quantum"], cfg.quantum);
    if (root["sweep"]) read_sweep(root["sweep"], cfg.spec, cfg.axes);
    if (const auto d = root["disorder"]) {
        check_keys(d, {"sigma_delta", "n_realizations"}, "disorder");
        cfg.disorder.sigma_delta = get<double>(d, "sigma_delta", "disorder", 0.0);
        cfg.disorder.n_realizations = get<Index>(d, "n_realizations", "disorder", 100);
        if (cfg.disorder.sigma_delta < 0.0) {
            fail("disorder.sigma_delta", "must be >= 0");
        }
    }
    cfg.seed = get<std::uint64_t>(root, "seed", "root", 0);
    try {
        cfg.integrator.validate();
        cfg.ensemble.validate();
        cfg.quantum.mcwf.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace activegrid::cli
