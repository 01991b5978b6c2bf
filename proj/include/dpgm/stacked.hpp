#pragma once

#include <Eigen/Dense>

// Helpers for network states stored as N stacked n-vectors (node i occupies
// entries [i*n, (i+1)*n)).

namespace dpgm {

inline Eigen::Map<const Eigen::MatrixXd> as_columns(const Eigen::VectorXd& x, int dim) {
    return {x.data(), dim, x.size() / dim};
}

/// (W kron I_n) x for symmetric W.
inline Eigen::VectorXd mix(const Eigen::MatrixXd& w, const Eigen::VectorXd& x, int dim) {
    Eigen::VectorXd out(x.size());
    Eigen::Map<Eigen::MatrixXd>(out.data(), dim, w.rows()).noalias() = as_columns(x, dim) * w;
    return out;
}

/// Node-wise mean of a stacked state.
inline Eigen::VectorXd node_mean(const Eigen::VectorXd& x, int dim) {
    return as_columns(x, dim).rowwise().mean();
}

/// 1 kron v for N nodes.
inline Eigen::VectorXd lift(const Eigen::VectorXd& v, int nodes) {
    return v.replicate(nodes, 1);
}

/// (11^T/N kron I_n) x.
inline Eigen::VectorXd consensus_average(const Eigen::VectorXd& x, int dim) {
    const auto nodes = static_cast<int>(x.size() / dim);
    return lift(node_mean(x, dim), nodes);
}

} // namespace dpgm
