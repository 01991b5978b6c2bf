#include "dpgm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "dpgm/errors.hpp"
#include "dpgm/stacked.hpp"

namespace dpgm {

namespace {

// Per-node Hessians and linear terms so gradients cost O(n^2) instead of O(r n).
struct Quadratics {
    std::vector<Eigen::MatrixXd> hessian;
    std::vector<Eigen::VectorXd> linear;

    explicit Quadratics(const ProblemSnapshot& p) {
        for (const auto& f : p.smooth()) {
            hessian.push_back(f.matrix().transpose() * f.matrix());
            linear.push_back(f.matrix().transpose() * f.rhs());
        }
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x, int dim) const {
        Eigen::VectorXd g(x.size());
        for (std::size_t i = 0; i < hessian.size(); ++i) {
            const auto off = static_cast<Eigen::Index>(i) * dim;
            g.segment(off, dim).noalias() = hessian[i] * x.segment(off, dim) - linear[i];
        }
        return g;
    }
};

} // namespace

Eigen::VectorXd solve_consensus_optimum(const ProblemSnapshot& problem, const OracleOptions& opts,
                                        const std::optional<Eigen::VectorXd>& warm) {
    const int dim = problem.dim();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(dim);
    double lsum = 0.0;
    double lambda_sum = 0.0;
    for (int i = 0; i < problem.node_count(); ++i) {
        const auto& f = problem.smooth()[i];
        h.noalias() += f.matrix().transpose() * f.matrix();
        lin.noalias() += f.matrix().transpose() * f.rhs();
        lsum += f.smoothness();
        lambda_sum += problem.nonsmooth()[i].weight();
    }
    const double step = 1.0 / lsum;
    const L1Norm g(lambda_sum);
    Eigen::VectorXd x = warm.value_or(Eigen::VectorXd::Zero(dim));
    for (long it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXd next = g.prox(x - step * (h * x - lin), step);
        const double residual = (next - x).norm();
        x = std::move(next);
        if (residual <= opts.tol) return x;
    }
    throw OracleError("consensus optimum did not reach tolerance within the iteration cap");
}

double relaxed_residual(const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
                        const Eigen::VectorXd& x) {
    const int dim = problem.dim();
    const Eigen::VectorXd next = problem.prox(mix(net.weights(), x, dim) - alpha * problem.gradient(x), alpha);
    return (next - x).norm();
}

Eigen::VectorXd solve_relaxed_optimum(const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
                                      const OracleOptions& opts, const std::optional<Eigen::VectorXd>& warm) {
    if (!(alpha > 0.0)) throw OracleError("relaxed optimum needs a positive step size");
    const int dim = problem.dim();
    const Quadratics q(problem);
    Eigen::VectorXd x = warm.value_or(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.node_count()) * dim));
    for (long it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXd next = problem.prox(mix(net.weights(), x, dim) - alpha * q.gradient(x, dim), alpha);
        const double residual = (next - x).norm();
        x = std::move(next);
        if (residual <= opts.tol) return x;
        if (!x.allFinite()) break;
    }
    throw OracleError("relaxed optimum did not reach tolerance within the iteration cap");
}

double consensus_gap(const ConsensusNetwork& net, const Eigen::VectorXd& x, int dim) {
    return (x - mix(net.weights(), x, dim)).norm();
}

OracleTrajectory compute_oracle(const ProblemSequence& seq, const ConsensusNetwork& net,
                                std::optional<double> alpha, const OracleOptions& opts) {
    OracleTrajectory o;
    o.node_count = seq.node_count();
    o.dim = seq.dim();
    o.alpha = alpha;
    o.tol = opts.tol;
    const int steps = seq.horizon() + 1;
    std::optional<Eigen::VectorXd> warm_star;
    std::optional<Eigen::VectorXd> warm_tilde;
    for (int k = 0; k < steps; ++k) {
        if (seq.is_static() && k > 0) {
            o.x_star.push_back(o.x_star.back());
            if (alpha) {
                o.x_tilde.push_back(o.x_tilde.back());
                o.gap.push_back(o.gap.back());
            }
            continue;
        }
        const auto& p = seq.at(k);
        try {
            o.x_star.push_back(solve_consensus_optimum(p, opts, warm_star));
            warm_star = o.x_star.back();
            if (alpha) {
                o.x_tilde.push_back(solve_relaxed_optimum(p, net, *alpha, opts, warm_tilde));
                warm_tilde = o.x_tilde.back();
                o.gap.push_back(consensus_gap(net, o.x_tilde.back(), o.dim));
            }
        } catch (const OracleError& e) {
            throw OracleError(std::string(e.what()) + " (k=" + std::to_string(k) + ")");
        }
    }
    return o;
}

DriftConstants drift_constants(const OracleTrajectory& oracle) {
    DriftConstants d;
    const double lift_scale = std::sqrt(static_cast<double>(oracle.node_count));
    for (std::size_t k = 0; k + 1 < oracle.x_star.size(); ++k) {
        d.sigma = std::max(d.sigma, lift_scale * (oracle.x_star[k + 1] - oracle.x_star[k]).norm());
        if (!oracle.x_tilde.empty())
            d.sigma = std::max(d.sigma, (oracle.x_tilde[k + 1] - oracle.x_tilde[k]).norm());
    }
    for (double g : oracle.gap) d.sigma_prime = std::max(d.sigma_prime, g);
    return d;
}

void write_oracle_csv(std::ostream& out, const OracleTrajectory& oracle) {
    out << "k,component,value\n";
    out.precision(17);
    for (std::size_t k = 0; k < oracle.x_star.size(); ++k)
        for (Eigen::Index j = 0; j < oracle.x_star[k].size(); ++j)
            out << k << ',' << j + 1 << ',' << oracle.x_star[k](j) << '\n';
}

void write_relaxed_csv(std::ostream& out, const OracleTrajectory& oracle) {
    out << "k,node,component,value\n";
    out.precision(17);
    for (std::size_t k = 0; k < oracle.x_tilde.size(); ++k)
        for (int i = 0; i < oracle.node_count; ++i)
            for (int j = 0; j < oracle.dim; ++j)
                out << k << ',' << i + 1 << ',' << j + 1 << ',' << oracle.x_tilde[k](i * oracle.dim + j) << '\n';
}

} // namespace dpgm
