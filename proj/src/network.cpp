#include "dpgm/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "dpgm/errors.hpp"

namespace dpgm {

namespace {

std::pair<int, int> ordered(int i, int j) { return i < j ? std::pair{i, j} : std::pair{j, i}; }

std::vector<std::pair<int, int>> circulant_edges(int n, int reach) {
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
        for (int s = 1; s <= reach; ++s) {
            const int j = (i + s) % n;
            if (j != i) edges.insert(ordered(i, j));
        }
    }
    return {edges.begin(), edges.end()};
}

} // namespace

TopologySpec TopologySpec::parse(const std::string& text) {
    // Accepted forms: path, star, circle, complete, circulant(d), random(edges=M), random(p=0.3)
    TopologySpec spec;
    auto open = text.find('(');
    const std::string head = text.substr(0, open);
    std::string arg;
    if (open != std::string::npos) {
        auto close = text.find(')', open);
        if (close == std::string::npos) throw ConfigError("unterminated topology argument: " + text);
        arg = text.substr(open + 1, close - open - 1);
    }
    if (head == "path") {
        spec.kind = TopologyKind::Path;
    } else if (head == "star") {
        spec.kind = TopologyKind::Star;
    } else if (head == "circle") {
        spec.kind = TopologyKind::Circle;
    } else if (head == "complete") {
        spec.kind = TopologyKind::Complete;
    } else if (head == "circulant") {
        spec.kind = TopologyKind::Circulant;
        try {
            spec.degree = std::stoi(arg);
        } catch (const std::exception&) {
            throw ConfigError("circulant needs an integer reach: " + text);
        }
    } else if (head == "random") {
        spec.kind = TopologyKind::Random;
        auto eq = arg.find('=');
        if (eq == std::string::npos) throw ConfigError("random needs edges=M or p=P: " + text);
        const std::string key = arg.substr(0, eq);
        const std::string value = arg.substr(eq + 1);
        try {
            if (key == "edges") {
                spec.target_edges = std::stoi(value);
            } else if (key == "p") {
                spec.edge_probability = std::stod(value);
            } else {
                throw ConfigError("unknown random-graph parameter: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw ConfigError("bad random-graph parameter: " + text);
        }
    } else {
        throw ConfigError("unknown topology: " + text);
    }
    return spec;
}

std::string TopologySpec::name() const {
    switch (kind) {
    case TopologyKind::Path: return "path";
    case TopologyKind::Star: return "star";
    case TopologyKind::Circle: return "circle";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::Circulant: return "circulant(" + std::to_string(degree) + ")";
    case TopologyKind::Random:
        if (target_edges > 0) return "random(edges=" + std::to_string(target_edges) + ")";
        {
            std::ostringstream os;
            os << "random(p=" << edge_probability << ")";
            return os.str();
        }
    }
    return "unknown";
}

bool is_connected(int node_count, const std::vector<std::pair<int, int>>& edges) {
    if (node_count <= 1) return node_count == 1;
    std::vector<int> parent(node_count);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    int components = node_count;
    for (auto [i, j] : edges) {
        int a = find(i), b = find(j);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

Topology Topology::from_edges(int node_count, std::vector<std::pair<int, int>> edges) {
    if (node_count < 1) throw TopologyError("node count must be positive");
    for (auto& e : edges) {
        if (e.first == e.second) throw TopologyError("self-loop at node " + std::to_string(e.first + 1));
        if (e.first < 0 || e.second < 0 || e.first >= node_count || e.second >= node_count)
            throw TopologyError("edge endpoint out of range");
        e = ordered(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw TopologyError("duplicate edge");
    if (!is_connected(node_count, edges)) throw TopologyError("graph is not connected");
    return Topology(node_count, std::move(edges));
}

std::vector<int> Topology::degrees() const {
    std::vector<int> deg(node_count_, 0);
    for (auto [i, j] : edges_) {
        ++deg[i];
        ++deg[j];
    }
    return deg;
}

bool Topology::has_edge(int i, int j) const {
    return std::binary_search(edges_.begin(), edges_.end(), ordered(i, j));
}

Topology build_topology(const TopologySpec& spec, int n, std::uint64_t seed) {
    if (n < 2) throw TopologyError("topologies need at least two nodes");
    std::vector<std::pair<int, int>> edges;
    switch (spec.kind) {
    case TopologyKind::Path:
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
        break;
    case TopologyKind::Star:
        for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
        break;
    case TopologyKind::Circle:
        edges = circulant_edges(n, 1);
        break;
    case TopologyKind::Circulant:
        if (spec.degree < 1 || spec.degree >= n)
            throw TopologyError("circulant reach must satisfy 1 <= d < N");
        edges = circulant_edges(n, spec.degree);
        break;
    case TopologyKind::Complete:
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
        break;
    case TopologyKind::Random: {
        const int max_edges = n * (n - 1) / 2;
        if (spec.target_edges > 0 && (spec.target_edges < n - 1 || spec.target_edges > max_edges))
            throw TopologyError("random target edge count cannot give a connected simple graph");
        if (spec.target_edges <= 0 && !(spec.edge_probability > 0.0 && spec.edge_probability <= 1.0))
            throw TopologyError("random edge probability must lie in (0, 1]");
        std::vector<std::pair<int, int>> all;
        all.reserve(max_edges);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
        constexpr int max_attempts = 10000;
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
            edges.clear();
            if (spec.target_edges > 0) {
                // G(N, M): exactly M edges drawn uniformly without replacement.
                std::sample(all.begin(), all.end(), std::back_inserter(edges), spec.target_edges, rng);
            } else {
                std::bernoulli_distribution keep(spec.edge_probability);
                for (const auto& e : all)
                    if (keep(rng)) edges.push_back(e);
            }
            if (is_connected(n, edges)) return Topology::from_edges(n, std::move(edges));
        }
        throw TopologyError("random graph stayed disconnected after resampling");
    }
    }
    return Topology::from_edges(n, std::move(edges));
}

void write_edge_list(std::ostream& out, const Topology& topology) {
    out << topology.node_count() << '\n';
    for (auto [i, j] : topology.edges()) out << i + 1 << ' ' << j + 1 << '\n';
}

Topology read_edge_list(std::istream& in) {
    int n = 0;
    if (!(in >> n)) throw TopologyError("edge list: missing node count");
    std::vector<std::pair<int, int>> edges;
    int i = 0, j = 0;
    while (in >> i >> j) edges.emplace_back(i - 1, j - 1);
    if (!in.eof()) throw TopologyError("edge list: malformed pair");
    return Topology::from_edges(n, std::move(edges));
}

ConsensusNetwork::ConsensusNetwork(Topology topology, Eigen::MatrixXd weights)
    : topology_(std::move(topology)), weights_(std::move(weights)) {
    const int n = topology_.node_count();
    if (weights_.rows() != n || weights_.cols() != n)
        throw TopologyError("weight matrix size does not match node count");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weights_, Eigen::EigenvaluesOnly);
    eigenvalues_ = solver.eigenvalues();  // ascending
    lambda_min_ = eigenvalues_(0);
    rho_ = 0.0;
    for (int k = 0; k + 1 < n; ++k) rho_ = std::max(rho_, std::abs(eigenvalues_(k)));
}

ConsensusNetwork metropolis_hastings(const Topology& topology) {
    const int n = topology.node_count();
    const auto deg = topology.degrees();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j] : topology.edges()) {
        const double wij = 1.0 / (1.0 + std::max(deg[i], deg[j]));
        w(i, j) = wij;
        w(j, i) = wij;
    }
    for (int i = 0; i < n; ++i) w(i, i) = 1.0 - w.row(i).sum();
    ConsensusNetwork net(topology, std::move(w));
    const auto at_one = (net.eigenvalues().array() > 1.0 - 1e-10).count();
    if (at_one != 1) throw TopologyError("eigenvalue 1 of W must be simple (connected graph)");
    return net;
}

ConsensusNetwork single_node_network() {
    return ConsensusNetwork(Topology::from_edges(1, {}), Eigen::MatrixXd::Ones(1, 1));
}

SpectralReport spectral_check(const ConsensusNetwork& net, double tol) {
    const auto& w = net.weights();
    const int n = net.node_count();
    SpectralReport r;
    r.row_residual = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
    r.column_residual = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
    r.symmetry_residual = (w - w.transpose()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd e = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    r.commute_residual = (w * e - e * w).cwiseAbs().maxCoeff();
    r.is_doubly_stochastic = r.row_residual <= tol && r.column_residual <= tol;
    r.is_symmetric = r.symmetry_residual <= tol;
    r.pattern_matches = true;
    const auto& topo = net.topology();
    for (int i = 0; i < n && r.pattern_matches; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if ((w(i, j) != 0.0) != topo.has_edge(i, j)) {
                r.pattern_matches = false;
                break;
            }
        }
    }
    r.lambda_min = net.lambda_min();
    r.rho = net.rho();
    return r;
}

} // namespace dpgm
