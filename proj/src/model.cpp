#include "activegrid/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace activegrid {

void SaturationLaw::validate() const {
    if (!(n0 > 0.0) || !std::isfinite(n0)) {
        throw std::invalid_argument("SaturationLaw: n0 must be positive and finite");
    }
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        throw std::invalid_argument("SaturationLaw: nu must be positive and finite");
    }
}

double saturation_f(double x, const SaturationLaw& law) {
    if (x < 0.0) {
        throw std::domain_error("saturation_f: occupation must be non-negative");
    }
    return std::pow(1.0 + x / law.n0, -0.5 * law.nu);
}

double rate_at(double bare_rate, double amp_sq, const SaturationLaw& law) {
    if (amp_sq < 0.0) {
        throw std::domain_error("rate_at: |alpha|^2 must be non-negative");
    }
    return bare_rate * saturation_f2_unchecked(amp_sq, law);
}

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument("NetworkSpec: " + what);
    }
}

bool connected(Index n, const std::vector<Edge>& edges) {
    std::vector<Index> parent(n);
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    Index components = n;
    for (const auto& e : edges) {
        const Index a = find(e.i), b = find(e.j);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

}  // namespace

NetworkSpec::NetworkSpec(Index n_sites,
                         std::vector<Edge> edges,
                         std::vector<double> detunings,
                         BathSpec bath,
                         std::vector<ActiveTerminal> terminals)
    : n_sites_(n_sites),
      edges_(std::move(edges)),
      detunings_(std::move(detunings)),
      bath_(bath),
      terminals_(std::move(terminals)) {
    require(n_sites_ >= 2, "need at least two sites");
    if (detunings_.empty()) {
        detunings_.assign(n_sites_, 0.0);
    }
    require(detunings_.size() == n_sites_, "detuning count must equal site count");
    for (double d : detunings_) {
        require(std::isfinite(d), "detunings must be finite");
    }
    require(bath_.gamma >= 0.0 && std::isfinite(bath_.gamma), "gamma must be >= 0");
    require(bath_.n_th >= 0.0 && std::isfinite(bath_.n_th), "n_th must be >= 0");

    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const auto& e = edges_[k];
        require(e.i < n_sites_ && e.j < n_sites_, "edge index out of range");
        require(e.i != e.j, "self-edges are not allowed");
        require(e.g > 0.0 && std::isfinite(e.g), "couplings must be positive");
        for (std::size_t m = 0; m < k; ++m) {
            const auto& o = edges_[m];
            require(!((o.i == e.i && o.j == e.j) || (o.i == e.j && o.j == e.i)),
                    "duplicate edge");
        }
    }
    require(connected(n_sites_, edges_), "graph must be connected");

    for (std::size_t k = 0; k < terminals_.size(); ++k) {
        const auto& t = terminals_[k];
        require(t.site < n_sites_, "terminal site out of range");
        require(t.rate >= 0.0 && std::isfinite(t.rate), "terminal rate must be >= 0");
        t.law.validate();
        for (std::size_t m = 0; m < k; ++m) {
            require(!(terminals_[m].site == t.site && terminals_[m].kind == t.kind),
                    "a site hosts at most one terminal of each kind");
        }
    }
}

std::optional<ActiveTerminal> NetworkSpec::first_terminal(TerminalKind kind) const {
    for (const auto& t : terminals_) {
        if (t.kind == kind) {
            return t;
        }
    }
    return std::nullopt;
}

double NetworkSpec::reference_n0() const {
    if (auto g = first_terminal(TerminalKind::gain)) {
        return g->law.n0;
    }
    if (!terminals_.empty()) {
        return terminals_.front().law.n0;
    }
    return 1.0;
}

std::optional<Index> NetworkSpec::find_edge(Index i, Index j) const {
    for (Index k = 0; k < edges_.size(); ++k) {
        const auto& e = edges_[k];
        if ((e.i == i && e.j == j) || (e.i == j && e.j == i)) {
            return k;
        }
    }
    return std::nullopt;
}

NetworkSpec NetworkSpec::with_detunings(std::vector<double> detunings) const {
    return NetworkSpec(n_sites_, edges_, std::move(detunings), bath_, terminals_);
}

NetworkSpec NetworkSpec::with_bath(BathSpec bath) const {
    return NetworkSpec(n_sites_, edges_, detunings_, bath, terminals_);
}

NetworkSpec NetworkSpec::with_terminals(std::vector<ActiveTerminal> terminals) const {
    return NetworkSpec(n_sites_, edges_, detunings_, bath_, std::move(terminals));
}

NetworkSpec NetworkSpec::with_edges(std::vector<Edge> edges) const {
    return NetworkSpec(n_sites_, std::move(edges), detunings_, bath_, terminals_);
}

NetworkSpec NetworkSpec::with_terminal_rate(Index site, TerminalKind kind, double rate) const {
    auto terms = terminals_;
    auto it = std::find_if(terms.begin(), terms.end(), [&](const ActiveTerminal& t) {
        return t.site == site && t.kind == kind;
    });
    if (it == terms.end()) {
        throw std::invalid_argument("with_terminal_rate: no such terminal");
    }
    it->rate = rate;
    return with_terminals(std::move(terms));
}

namespace {

std::vector<Edge> chain_edges(Index n, double g) {
    std::vector<Edge> edges;
    edges.reserve(n > 0 ? n - 1 : 0);
    for (Index l = 0; l + 1 < n; ++l) {
        edges.push_back({l, l + 1, g});
    }
    return edges;
}

}  // namespace

NetworkSpec build_chain(Index n, double g, BathSpec bath, Drive gain, Drive loss) {
    if (n < 2) {
        throw std::invalid_argument("build_chain: N must be >= 2");
    }
    std::vector<ActiveTerminal> terms{
        {0, TerminalKind::gain, gain.rate, gain.law},
        {n - 1, TerminalKind::loss, loss.rate, loss.law},
    };
    return NetworkSpec(n, chain_edges(n, g), {}, bath, std::move(terms));
}

NetworkSpec build_passive_chain(Index n, double g, BathSpec bath) {
    if (n < 2) {
        throw std::invalid_argument("build_passive_chain: N must be >= 2");
    }
    return NetworkSpec(n, chain_edges(n, g), {}, bath, {});
}

NetworkSpec build_branched_grid(double g, BathSpec bath, Drive gain, Drive loss_main,
                                Drive loss_branch) {
    auto edges = chain_edges(7, g);
    edges.push_back({3, 7, g});
    edges.push_back({7, 8, g});
    std::vector<ActiveTerminal> terms{
        {0, TerminalKind::gain, gain.rate, gain.law},
        {6, TerminalKind::loss, loss_main.rate, loss_main.law},
        {8, TerminalKind::loss, loss_branch.rate, loss_branch.law},
    };
    return NetworkSpec(9, std::move(edges), {}, bath, std::move(terms));
}

Eigen::MatrixXcd drift_matrix(const NetworkSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.n_sites());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const double gamma = spec.bath().gamma;
    for (Eigen::Index l = 0; l < n; ++l) {
        m(l, l) = Complex(-0.5 * gamma, -spec.detunings()[static_cast<Index>(l)]);
    }
    for (const auto& t : spec.terminals()) {
        const auto s = static_cast<Eigen::Index>(t.site);
        m(s, s) += (t.kind == TerminalKind::gain ? 0.5 : -0.5) * t.rate;
    }
    for (const auto& e : spec.edges()) {
        const auto i = static_cast<Eigen::Index>(e.i), j = static_cast<Eigen::Index>(e.j);
        m(i, j) += Complex(0.0, 0.5 * e.g);
        m(j, i) += Complex(0.0, 0.5 * e.g);
    }
    return m;
}

}  // namespace activegrid
