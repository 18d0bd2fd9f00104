#include "activegrid/table.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace activegrid::cli {

long Table::column(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] == name) {
            return static_cast<long>(k);
        }
    }
    return -1;
}

const std::string& Table::at(std::size_t row, const std::string& name) const {
    const long c = column(name);
    if (c < 0) {
        throw std::out_of_range("table: no column '" + name + "'");
    }
    return rows.at(row).at(static_cast<std::size_t>(c));
}

double Table::number(std::size_t row, const std::string& name) const {
    return parse_double(at(row, name));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& cell) {
    if (cell == "nan") return std::nan("");
    if (cell == "inf") return INFINITY;
    if (cell == "-inf") return -INFINITY;
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) {
        throw std::invalid_argument("table: not a number '" + cell + "'");
    }
    return v;
}

namespace {

void append_field(std::string& out, const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) out += ',';
        append_field(out, fields[k]);
    }
    out += '\n';
}

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    append_line(out, table.columns);
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) {
            throw std::logic_error("table: row width differs from header");
        }
        append_line(out, row);
    }
    return out;
}

Table parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (quoted) {
            if (c == '"' && k + 1 < text.size() && text[k + 1] == '"') {
                field += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            field.clear();
            lines.push_back(std::move(fields));
            fields.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) {
        throw std::invalid_argument("table: unterminated quote");
    }
    if (any) {
        fields.push_back(std::move(field));
        lines.push_back(std::move(fields));
    }
    Table t;
    if (lines.empty()) {
        return t;
    }
    t.columns = std::move(lines.front());
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].size() != t.columns.size()) {
            throw std::invalid_argument("table: row " + std::to_string(k) + " has " +
                                        std::to_string(lines[k].size()) + " fields, header has " +
                                        std::to_string(t.columns.size()));
        }
        t.rows.push_back(std::move(lines[k]));
    }
    return t;
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp + "'");
        }
        out << text;
        if (!out) {
            throw std::runtime_error("write failed for '" + tmp + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json to_json(const NetworkSpec& spec) {
    nlohmann::json j;
    j["n_sites"] = spec.n_sites();
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const auto& e : spec.edges()) {
        edges.push_back({e.i, e.j, e.g});
    }
    j["detunings"] = spec.detunings();
    j["bath"] = {{"gamma", spec.bath().gamma}, {"n_th", spec.bath().n_th}};
    auto& terms = j["terminals"] = nlohmann::json::array();
    for (const auto& t : spec.terminals()) {
        terms.push_back({{"site", t.site},
                         {"kind", t.kind == TerminalKind::gain ? "gain" : "loss"},
                         {"rate", t.rate},
                         {"n0", t.law.n0},
                         {"nu", t.law.nu}});
    }
    return j;
}

namespace {

std::string to_string(probe::RampOrder r) {
    switch (r) {
        case probe::RampOrder::none: return "none";
        case probe::RampOrder::gain_first: return "gain_first";
        case probe::RampOrder::loss_first: return "loss_first";
    }
    return "unknown";
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["network"] = to_json(c.spec);
    j["engine"] = to_string(c.engine);
    j["integrator"] = {{"dt", c.integrator.dt},
                       {"divergence_guard", c.integrator.divergence_guard},
                       {"scheme", "euler_maruyama"}};
    j["ensemble"] = {{"n_traj", c.ensemble.n_traj},
                     {"burn_in_time", c.ensemble.burn_in_time},
                     {"n_samples", c.ensemble.n_samples},
                     {"sample_stride_steps", c.ensemble.sample_stride_steps},
                     {"histogram", {{"bins", c.ensemble.histogram.bins},
                                    {"range", c.ensemble.histogram.range}}},
                     {"warm_start", c.warm_start}};
    const auto& s = c.steady;
    j["steady"] = {{"dt", s.dt},           {"window", s.window},
                   {"tol", s.tol},         {"max_time", s.max_time},
                   {"seed_amplitude", s.seed_amplitude}, {"seed", s.seed},
                   {"ramp", to_string(s.ramp)}, {"ramp_time", s.ramp_time},
                   {"polish", s.polish},   {"polish_trigger", s.polish_trigger},
                   {"average_time", s.average_time}};
    const auto& r = c.relax;
    j["relax"] = {{"delta_alpha", r.delta_alpha}, {"upper", r.upper},         {"lower", r.lower},
                  {"dt", r.dt},                   {"max_time", r.max_time},   {"hold_time", r.hold_time},
                  {"radial_kick", r.radial_kick}};
    const auto& q = c.quantum;
    j["quantum"] = {{"n_basis", q.n_basis},
                    {"method", q.direct ? "direct" : "mcwf"},
                    {"negativity_k", q.negativity_k},
                    {"dt", q.mcwf.dt},
                    {"burn_in_time", q.mcwf.burn_in_time},
                    {"n_samples", q.mcwf.n_samples},
                    {"sample_stride_steps", q.mcwf.sample_stride_steps},
                    {"n_traj", q.mcwf.n_traj},
                    {"leakage_limit", q.mcwf.leakage_limit}};
    auto& axes = j["sweep"] = nlohmann::json::array();
    for (const auto& a : c.axes) {
        axes.push_back({{"path", a.path}, {"values", a.values}});
    }
    j["disorder"] = {{"sigma_delta", c.disorder.sigma_delta},
                     {"n_realizations", c.disorder.n_realizations}};
    j["seed"] = c.seed;
    return j;
}

std::string fingerprint(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json run_metadata(const std::string& command, const RunConfig& config,
                            const std::string& plan_fingerprint) {
    nlohmann::json j;
    j["program"] = "activegrid";
    j["version"] = version;
    j["command"] = command;
    j["fingerprint"] = plan_fingerprint;
    j["master_seed"] = config.seed;
    j["seed_derivation"] = "point k uses derive_seed(master_seed, k): splitmix64 mix";
    j["libraries"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__},
    };
    j["units"] = {
        {"time", "1/g"},
        {"rates", "g"},
        {"occupations", "quanta; multiport columns are divided by the reference n0"},
        {"currents", "g * quanta, oriented edge.i -> edge.j; multiport columns in g * n0"},
        {"sites", "zero-based"},
    };
    j["resolved"] = to_json(config);
    return j;
}

}  // namespace activegrid::cli
