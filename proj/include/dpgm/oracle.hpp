#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dpgm/network.hpp"
#include "dpgm/problems.hpp"

namespace dpgm {

struct OracleOptions {
    double tol = 1e-12;
    long max_iterations = 1'000'000;
};

/// Minimizer of sum_i f_i(x) + g_i(x) over a single n-vector, by centralized
/// proximal gradient with step 1 / sum_i L_{f_i}. Stops on the fixed-point residual
/// ||x - prox(x - step grad)|| <= tol. Throws OracleError at the iteration cap.
Eigen::VectorXd solve_consensus_optimum(const ProblemSnapshot& problem, const OracleOptions& opts = {},
                                        const std::optional<Eigen::VectorXd>& warm = std::nullopt);

/// Minimizer of 1/2 x^T (I - W) x + alpha (f(x) + g(x)) over stacked states, by the
/// exact unit-step recursion x <- prox_{alpha g}(W x - alpha grad f(x)) until the
/// residual is below tol. Throws OracleError at the iteration cap.
Eigen::VectorXd solve_relaxed_optimum(const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
                                      const OracleOptions& opts = {},
                                      const std::optional<Eigen::VectorXd>& warm = std::nullopt);

/// ||x - prox_{alpha g}(W x - alpha grad f(x))||
double relaxed_residual(const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
                        const Eigen::VectorXd& x);

/// ||(I - W) x|| for a stacked state.
double consensus_gap(const ConsensusNetwork& net, const Eigen::VectorXd& x, int dim);

struct OracleTrajectory {
    int node_count = 0;
    int dim = 0;
    std::vector<Eigen::VectorXd> x_star;   ///< k = 0..K, n-vectors
    std::vector<Eigen::VectorXd> x_tilde;  ///< k = 0..K, stacked; empty when alpha was not given
    std::vector<double> gap;               ///< ||(I - W) x~(t_k)||
    std::optional<double> alpha;
    double tol = 0.0;
};

/// Ground truth for every k; x~ is computed only when alpha is given (it depends on alpha).
/// Each solve is warm-started from the previous k.
OracleTrajectory compute_oracle(const ProblemSequence& seq, const ConsensusNetwork& net,
                                std::optional<double> alpha, const OracleOptions& opts = {});

struct DriftConstants {
    double sigma = 0.0;        ///< max_k max(||1 x (x*_{k+1} - x*_k)||, ||x~_{k+1} - x~_k||)
    double sigma_prime = 0.0;  ///< max_k ||(I - W) x~_k||
};

DriftConstants drift_constants(const OracleTrajectory& oracle);

/// x* as rows k,component,value (1-indexed component).
void write_oracle_csv(std::ostream& out, const OracleTrajectory& oracle);
/// x~ as rows k,node,component,value.
void write_relaxed_csv(std::ostream& out, const OracleTrajectory& oracle);

} // namespace dpgm
