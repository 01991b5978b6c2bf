#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dpgm {

enum class TopologyKind { Path, Star, Circle, Circulant, Complete, Random };

/// Describes a graph family. `degree` is the circulant reach; for the random
/// family either `target_edges` (exact edge count) or `edge_probability` is used.
struct TopologySpec {
    TopologyKind kind = TopologyKind::Circle;
    int degree = 1;
    int target_edges = 0;
    double edge_probability = 0.0;

    static TopologySpec parse(const std::string& text);
    std::string name() const;
};

/// Undirected simple graph on nodes 0..N-1. Edges are stored as (i, j) with i < j, sorted.
class Topology {
public:
    /// Validates the edge set: no self-loops, no duplicates, in range, connected.
    static Topology from_edges(int node_count, std::vector<std::pair<int, int>> edges);

    int node_count() const { return node_count_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    std::vector<int> degrees() const;
    bool has_edge(int i, int j) const;

private:
    Topology(int n, std::vector<std::pair<int, int>> e) : node_count_(n), edges_(std::move(e)) {}

    int node_count_ = 0;
    std::vector<std::pair<int, int>> edges_;
};

bool is_connected(int node_count, const std::vector<std::pair<int, int>>& edges);

/// Builds a connected topology of the requested family. The random family is
/// resampled under an incremented seed until connected.
Topology build_topology(const TopologySpec& spec, int node_count, std::uint64_t seed);

/// Edge-list text format: N on the first line, then one 1-indexed "i j" pair per line.
void write_edge_list(std::ostream& out, const Topology& topology);
Topology read_edge_list(std::istream& in);

/// Immutable doubly stochastic mixing matrix with cached spectral quantities.
class ConsensusNetwork {
public:
    /// Wraps an explicit weight matrix; no stochasticity is enforced here (see
    /// spectral_check). rho is taken over all eigenvalues but the largest.
    ConsensusNetwork(Topology topology, Eigen::MatrixXd weights);

    const Topology& topology() const { return topology_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    int node_count() const { return topology_.node_count(); }
    double lambda_min() const { return lambda_min_; }
    /// Largest singular value strictly below one, i.e. ||W - 11^T/N||_2.
    double rho() const { return rho_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

private:
    Topology topology_;
    Eigen::MatrixXd weights_;
    Eigen::VectorXd eigenvalues_;
    double lambda_min_ = 0.0;
    double rho_ = 0.0;
};

/// w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, remaining mass on the diagonal.
ConsensusNetwork metropolis_hastings(const Topology& topology);

/// The single-node network with W = [1].
ConsensusNetwork single_node_network();

struct SpectralReport {
    bool is_doubly_stochastic = false;
    bool is_symmetric = false;
    bool pattern_matches = false;
    double row_residual = 0.0;
    double column_residual = 0.0;
    double symmetry_residual = 0.0;
    double commute_residual = 0.0;
    double lambda_min = 0.0;
    double rho = 0.0;
};

/// Verifies the mixing-matrix invariants. Reports failures instead of throwing.
SpectralReport spectral_check(const ConsensusNetwork& net, double tol = 1e-12);

} // namespace dpgm
