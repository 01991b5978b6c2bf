#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace dpgm {

/// Soft-threshold: sign(y_j) * max(|y_j| - tau, 0).
Eigen::VectorXd l1_prox(const Eigen::VectorXd& y, double tau);

/// lambda1 * sign(x_j), with 0 chosen at x_j = 0.
Eigen::VectorXd l1_subgradient(const Eigen::VectorXd& x, double lambda1);

/// f(x) = 1/2 ||A x - b||^2. Smoothness and strong convexity are the extreme
/// eigenvalues of A^T A, computed once at construction.
class LeastSquaresCost {
public:
    LeastSquaresCost(Eigen::MatrixXd a, Eigen::VectorXd b);

    double value(const Eigen::VectorXd& x) const { return 0.5 * (a_ * x - b_).squaredNorm(); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return a_.transpose() * (a_ * x - b_); }

    const Eigen::MatrixXd& matrix() const { return a_; }
    const Eigen::VectorXd& rhs() const { return b_; }
    double smoothness() const { return smoothness_; }
    double strong_convexity() const { return strong_convexity_; }

private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    double smoothness_ = 0.0;
    double strong_convexity_ = 0.0;
};

/// g(x) = lambda ||x||_1. A zero weight gives g == 0.
class L1Norm {
public:
    explicit L1Norm(double lambda = 0.0) : lambda_(lambda) {}

    double value(const Eigen::VectorXd& x) const { return lambda_ * x.lpNorm<1>(); }
    Eigen::VectorXd prox(const Eigen::VectorXd& y, double step) const;
    Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const { return l1_subgradient(x, lambda_); }
    double weight() const { return lambda_; }
    /// Euclidean Lipschitz constant, lambda * sqrt(n).
    double lipschitz(int dim) const;

private:
    double lambda_ = 0.0;
};

/// All local costs f_i(.; t_k) + g_i(.; t_k) at one sampling time. Operations act
/// on stacked network vectors of length N * dim.
class ProblemSnapshot {
public:
    ProblemSnapshot(int dim, std::vector<LeastSquaresCost> smooth, std::vector<L1Norm> nonsmooth);

    int dim() const { return dim_; }
    int node_count() const { return static_cast<int>(smooth_.size()); }
    const std::vector<LeastSquaresCost>& smooth() const { return smooth_; }
    const std::vector<L1Norm>& nonsmooth() const { return nonsmooth_; }

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::VectorXd prox(const Eigen::VectorXd& y, double step) const;
    Eigen::VectorXd subgradient(const Eigen::VectorXd& x) const;

private:
    int dim_;
    std::vector<LeastSquaresCost> smooth_;
    std::vector<L1Norm> nonsmooth_;
};

struct ProblemConstants {
    double Lf = 0.0;  ///< max over nodes (and time) of L_{f_i}
    double mf = 0.0;  ///< min over nodes (and time) of m_{f_i}
    double Lg = 0.0;  ///< max over nodes (and time) of L_{g_i}
    /// Lipschitz constant of the stacked g(x) = sum_i g_i(x_i), sqrt(sum_i L_{g_i}^2),
    /// maximized over time. This is the constant the error-bound recursion needs.
    double Lg_network = 0.0;
};

/// Costs at t_0, ..., t_K with t_k = k * Ts. A sequence built from a single
/// snapshot is static: every k maps to that snapshot.
class ProblemSequence {
public:
    ProblemSequence(std::vector<ProblemSnapshot> snapshots, int horizon, double sampling_time);

    static ProblemSequence constant(ProblemSnapshot snapshot, int horizon, double sampling_time = 1.0);

    const ProblemSnapshot& at(int k) const;
    int horizon() const { return horizon_; }
    int node_count() const { return snapshots_.front().node_count(); }
    int dim() const { return snapshots_.front().dim(); }
    double sampling_time() const { return sampling_time_; }
    bool is_static() const { return snapshots_.size() == 1; }
    const std::vector<ProblemSnapshot>& snapshots() const { return snapshots_; }

private:
    std::vector<ProblemSnapshot> snapshots_;
    int horizon_;
    double sampling_time_;
};

/// Max/min of the local constants over nodes and every time step.
/// Throws ConfigError when strong convexity is lost (mf <= 0).
ProblemConstants aggregate_constants(const ProblemSequence& seq);
ProblemConstants aggregate_constants(const ProblemSnapshot& snapshot);

struct SparseRegressionParams {
    int dim = 8;
    int rows_per_node = 16;
    int horizon = 100;
    double lambda1 = 0.01;
    double noise_variance = 1e-3;
    double condition_number = 100.0;
    double sigma_max = 1.0;
    double omega = 0.5;
    double sampling_time = 0.01;
    bool time_varying = true;
};

struct SparseRegressionScenario {
    SparseRegressionParams params;
    std::vector<int> active;            ///< indices of the nonzero signal components
    Eigen::VectorXd phases;             ///< per active component, drawn from U[0, pi]
    std::vector<Eigen::VectorXd> signal;  ///< y(t_k), k = 0..K (one entry when static)
};

struct GeneratedProblem {
    ProblemSequence sequence;
    SparseRegressionScenario scenario;
};

/// Local least-squares costs with L1 regularization, measuring a sparse
/// sinusoidal signal. Matrices are U diag(s) V^T with s log-spaced in
/// [sigma_max / cond, sigma_max]; fresh U, V and measurement noise per node and time.
GeneratedProblem generate_sparse_regression(int node_count, const SparseRegressionParams& params,
                                            std::uint64_t seed);

/// Text snapshot for exact replay: "dpgm-problem N n r K Ts static" header, then per
/// (k, node) the L1 weight, the r x n matrix row-major and the r-vector rhs.
void write_problem(std::ostream& out, const ProblemSequence& seq);
ProblemSequence read_problem(std::istream& in);

} // namespace dpgm
